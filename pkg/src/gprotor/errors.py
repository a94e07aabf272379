"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` (e.g. ``"collapse-detected"``)
so callers and the CLI can branch on it without parsing messages.
"""


class GPRotorError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for this error."""

    exit_code = 3

    def __init__(self, code, message=""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class NumericalError(GPRotorError):
    """A computation failed to produce a trustworthy number."""

    exit_code = 3


class CollapseDetected(NumericalError):
    def __init__(self, message="", energy=None, iterations=None):
        super().__init__("collapse-detected", message)
        self.energy = energy
        self.iterations = iterations


class ConfigError(GPRotorError):
    """Bad user input: configuration files, CLI arguments, parameter ranges."""

    exit_code = 2


class FormatError(GPRotorError):
    """Malformed binary field snapshot."""

    exit_code = 2


class ParameterError(ConfigError):
    """A physical parameter lies outside the admissible range."""
