"""Plain-text run configuration.

One ``key = value`` per line, ``#`` starts a comment.  Couplings in
``a_list`` may be absolute numbers or multiples of the critical coupling
written as ``0.95*astar``; those are resolved once a* is known.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import ConfigError
from .trap import TrapSpec, omega_star

_FRACTION = re.compile(r"^\s*([0-9.eE+-]+)\s*\*\s*a_?star\s*$|^\s*a_?star\s*\*\s*([0-9.eE+-]+)\s*$")

MANDATORY = ("p", "omega", "a_list", "N", "L")


@dataclass(frozen=True)
class ASpec:
    value: float
    relative: bool  # multiple of a*

    def resolve(self, a_star: float) -> float:
        return self.value * a_star if self.relative else self.value

    def __str__(self):
        return f"{self.value!r}*astar" if self.relative else repr(self.value)


@dataclass
class RunConfig:
    p: float
    omega: float
    a_list: List[ASpec]
    N: int
    L: float
    a1: float = 0.0
    a2: float = 0.0
    dt: float = 5e-3
    tol: float = 1e-12
    max_iter: int = 20000
    seed: int = 0
    method: str = "cg"
    output_dir: str = "gp_rotor_out"
    formats: Tuple[str, ...] = ("csv", "png")
    expect_collapse: bool = False
    starts: int = 8
    uniqueness_a: Optional[ASpec] = None
    workers: int = 1
    align_n: int = 256
    align_l: float = 12.0
    source: Optional[str] = field(default=None, compare=False)

    @property
    def trap(self) -> TrapSpec:
        return TrapSpec(self.p, self.a1, self.a2)

    def resolved_a(self, a_star: float) -> List[float]:
        return sorted(a.resolve(a_star) for a in self.a_list)

    def canonical(self) -> str:
        """Stable text form used for content hashing (excludes the source path)."""
        d = asdict(self)
        d.pop("source")
        d["a_list"] = [str(a) for a in self.a_list]
        d["uniqueness_a"] = str(self.uniqueness_a) if self.uniqueness_a else ""
        d["formats"] = ",".join(self.formats)
        return "\n".join(f"{k}={d[k]!r}" for k in sorted(d))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def parse_a(text: str, key: str = "a") -> ASpec:
    m = _FRACTION.match(text)
    try:
        if m:
            return ASpec(float(m.group(1) or m.group(2)), True)
        return ASpec(float(text), False)
    except ValueError:
        raise ConfigError(f"config-type:{key}", f"cannot read coupling {text!r}") from None


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"config-type:{key}", f"expected a boolean, got {text!r}")


def _num(conv, key):
    def parse(text):
        try:
            v = conv(text)
        except ValueError:
            raise ConfigError(f"config-type:{key}", f"cannot convert {text!r}") from None
        return v
    return parse


def _int(key):
    def parse(text):
        try:
            f = float(text)
        except ValueError:
            raise ConfigError(f"config-type:{key}", f"cannot convert {text!r}") from None
        if f != int(f):
            raise ConfigError(f"config-type:{key}", f"expected an integer, got {text!r}")
        return int(f)
    return parse


_PARSERS = {
    "p": _num(float, "p"),
    "omega": _num(float, "omega"),
    "a1": _num(float, "a1"),
    "a2": _num(float, "a2"),
    "N": _int("N"),
    "L": _num(float, "L"),
    "dt": _num(float, "dt"),
    "tol": _num(float, "tol"),
    "max_iter": _int("max_iter"),
    "seed": _int("seed"),
    "method": str,
    "output_dir": str,
    "formats": lambda t: tuple(s.strip() for s in t.split(",") if s.strip()),
    "expect_collapse": lambda t: _bool(t, "expect_collapse"),
    "starts": _int("starts"),
    "uniqueness_a": lambda t: parse_a(t, "uniqueness_a"),
    "workers": _int("workers"),
    "align_n": _int("align_n"),
    "align_l": _num(float, "align_l"),
    "a_list": lambda t: [parse_a(s, "a_list") for s in t.split(",") if s.strip()],
}


def parse_config_text(text: str, source: Optional[str] = None) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config-syntax", f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"config-unknown:{key}", f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError("config-duplicate", f"line {lineno}: key {key!r} given twice")
        values[key] = _PARSERS[key](val)
    for key in MANDATORY:
        if key not in values:
            raise ConfigError(f"config-missing:{key}", f"mandatory key {key!r} absent")
    cfg = RunConfig(source=source, **values)
    validate(cfg)
    return cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config-missing-file", f"{path} does not exist")
    cfg = parse_config_text(path.read_text(), str(path))
    out = Path(cfg.output_dir)
    if not out.is_absolute():
        cfg.output_dir = str(path.parent / out)
    return cfg


def validate(cfg: RunConfig) -> None:
    n = cfg.N
    if n < 64 or n & (n - 1):
        raise ConfigError("config-value:N", f"N = {n} must be a power of two >= 64")
    if cfg.L < 8:
        raise ConfigError("config-value:L", f"L = {cfg.L} must be >= 8")
    if not cfg.a_list:
        raise ConfigError("config-missing:a_list", "a_list is empty")
    if cfg.method not in ("cg", "flow"):
        raise ConfigError("config-value:method", f"unknown method {cfg.method!r}")
    if cfg.starts < 2:
        raise ConfigError("config-value:starts", "need at least two starts")
    trap = cfg.trap  # validates p, a1, a2
    ws = omega_star(trap)
    if not 0 <= cfg.omega < ws:
        raise ConfigError("supercritical-velocity",
                          f"omega = {cfg.omega} is not below the critical velocity {ws:.6g}")


def check_couplings(cfg: RunConfig, a_star: float) -> List[float]:
    """Resolved couplings; each must lie in (0, a*) unless collapse is expected."""
    out = cfg.resolved_a(a_star)
    for a in out:
        if a <= 0:
            raise ConfigError("config-value:a_list", f"a = {a} must be positive")
        if a >= a_star and not cfg.expect_collapse:
            raise ConfigError("config-value:a_list",
                              f"a = {a} >= a* = {a_star:.10g}; set expect_collapse = true")
    return out
