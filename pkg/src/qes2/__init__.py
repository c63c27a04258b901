"""Axisymmetric m-quasi-Einstein structures on the two-sphere.

Closed-form profiles, admissibility of parameters, and numerical checks of
every governing equation.
"""

from .admissibility import (
    C0Result,
    Interval,
    Reason,
    RootPair,
    Verdict,
    admissible_c_range,
    classify,
    compute_c0,
    find_roots,
)
from .errors import QESError
from .geometry import SphereSolution, build_solution
from .profile import Branch, ModelParams, Profile, eval_B, make_profile
from .specfun import f_asymptotic_slope, f_positive_root, hyp_f, hyp_f_prime

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "C0Result",
    "Interval",
    "ModelParams",
    "Profile",
    "QESError",
    "Reason",
    "RootPair",
    "SphereSolution",
    "Verdict",
    "admissible_c_range",
    "build_solution",
    "classify",
    "compute_c0",
    "eval_B",
    "f_asymptotic_slope",
    "f_positive_root",
    "find_roots",
    "hyp_f",
    "hyp_f_prime",
    "make_profile",
]
