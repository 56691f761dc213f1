"""Exact canonical bases of weakly holomorphic modular forms and congruence checks."""

__version__ = "0.1.0"

from .qseries import InsufficientPrecision, NonInvertible, QSeries  # noqa: E402
from .eta import (  # noqa: E402
    EtaQuotient,
    delta,
    eisenstein_E2,
    eisenstein_E2_level,
    eisenstein_E4,
    euler_product,
    expand_eta_quotient,
    hauptmodul,
    j_invariant,
)
from .basis import BasisElement, BasisObstruction, build_f0, build_f2, weight0_family  # noqa: E402
from .cache import BasisCache  # noqa: E402
from .operators import U, V, hecke_T_weight0, theta, theta_relation_check  # noqa: E402

__all__ = [
    "BasisCache",
    "BasisElement",
    "BasisObstruction",
    "EtaQuotient",
    "InsufficientPrecision",
    "NonInvertible",
    "QSeries",
    "U",
    "V",
    "build_f0",
    "build_f2",
    "delta",
    "eisenstein_E2",
    "eisenstein_E2_level",
    "eisenstein_E4",
    "euler_product",
    "expand_eta_quotient",
    "hauptmodul",
    "hecke_T_weight0",
    "j_invariant",
    "theta",
    "theta_relation_check",
    "weight0_family",
]
