"""Ground states of the attractive rotating Gross-Pitaevskii energy in 2-D
and the numerical checks of their blow-up as the coupling approaches a*.
"""

__version__ = "0.1.0"

from .errors import (CollapseDetected, ConfigError, FormatError, GPRotorError,
                     NumericalError, ParameterError)
from .grid import ComplexField, Grid2D, gaussian_field, random_start
from .townes import RadialProfile, a_star, check_identities, default_profile, eval_w_2d, solve_w
from .trap import (TrapSpec, eval_V, eval_V_Omega, grad_V_Omega, homogeneous_part, omega_star,
                   validate_assumption_V)
from .concentration import (ConcentrationData, H_value, alpha_of_a, concentration_data, find_y0,
                            lambda_const)
from .gp2d import (GroundState, SolverOptions, chemical_potential, el_residual, energy,
                   gn_ratio, gp_apply, minimize)

__all__ = [
    "CollapseDetected", "ConfigError", "FormatError", "GPRotorError", "NumericalError",
    "ParameterError", "ComplexField", "Grid2D", "gaussian_field", "random_start",
    "RadialProfile", "a_star", "check_identities", "default_profile", "eval_w_2d", "solve_w",
    "TrapSpec", "eval_V", "eval_V_Omega", "grad_V_Omega", "homogeneous_part", "omega_star",
    "validate_assumption_V", "ConcentrationData", "H_value", "alpha_of_a",
    "concentration_data", "find_y0", "lambda_const", "GroundState", "SolverOptions",
    "chemical_potential", "el_residual", "energy", "gn_ratio", "gp_apply", "minimize",
]
