"""Blaschke products, their logarithmic derivatives and exceptional sets."""

from .errors import BlaschkeError, DomainError, ExceptionalSetError, PoleError, ZeroFileError
from .weights import TabulatedWeight, WeightFunction, check_admissible, eval_h, transfer_ratio
from .zeros import (
    ZeroSequence,
    blaschke_sum,
    counting_decay_profile,
    counting_fn,
    density_condition_check,
    gen_geometric,
    gen_power_law,
    ingest,
    export,
)
from .product import eval_B, eval_logderiv, eval_logderiv_split, remark1_delta
from .exceptional import (
    build_circular_E,
    build_radial_arcs,
    contains,
    radial_membership,
    radial_tail_measure,
    weighted_measure,
)
from .verify import (
    GrowthReport,
    fit_exponent,
    ladder,
    sweep,
    verify_circular,
    verify_radial,
    verify_remark1,
)

__version__ = "0.1.0"

__all__ = [
    "BlaschkeError", "DomainError", "ExceptionalSetError", "PoleError", "ZeroFileError",
    "TabulatedWeight", "WeightFunction", "check_admissible", "eval_h", "transfer_ratio",
    "ZeroSequence", "blaschke_sum", "counting_decay_profile", "counting_fn", "density_condition_check",
    "gen_geometric", "gen_power_law", "ingest", "export",
    "eval_B", "eval_logderiv", "eval_logderiv_split", "remark1_delta",
    "build_circular_E", "build_radial_arcs", "contains", "radial_membership", "radial_tail_measure",
    "weighted_measure",
    "GrowthReport", "fit_exponent", "ladder", "sweep", "verify_circular", "verify_radial", "verify_remark1",
]
