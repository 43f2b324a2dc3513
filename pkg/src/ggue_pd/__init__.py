"""Probability that a generalised-GUE random matrix is positive definite.

The probability equals a ratio of Hankel determinants: the partition function
of a Laguerre-type weight x^lam * exp(-N(x + s(x^2-x))) on [0, inf) at s=1,
divided by the full-line reference. Everything here is built from that ratio:
moment tables, three-term recurrence coefficients, partition functions, the
equilibrium measure, and the large-N expansion whose coefficients reproduce
the exact values to O(1/N).
"""

from .equilibrium import EquilibriumData, density_eval, equilibrium_data, equilibrium_moment, resolvent_eval
from .errors import PrecisionNotConverged, VerificationError
from .opchain import (
    RecurrenceTable,
    deformation_rhs,
    linear_statistic,
    log_partition,
    log_partition_from_table,
    partition_log_derivative_fd,
    recurrence_table,
    string_residual,
)
from .asymptotics import (
    expansion_coeffs,
    log_positivity_asymptotic,
    log_positivity_coefficients,
    log_z_ggue_exact,
    log_z_lue_exact,
)
from .specfun import ConstantSet, PrecisionContext, constants, log_barnes_g, log_gamma
from .weight import MomentTable, WeightSpec, moment, moment_table, validate_moments, weight_eval

__version__ = "0.1.0"

__all__ = [
    "ConstantSet",
    "EquilibriumData",
    "MomentTable",
    "PrecisionContext",
    "PrecisionNotConverged",
    "RecurrenceTable",
    "VerificationError",
    "WeightSpec",
    "constants",
    "deformation_rhs",
    "density_eval",
    "equilibrium_data",
    "equilibrium_moment",
    "expansion_coeffs",
    "linear_statistic",
    "log_barnes_g",
    "log_gamma",
    "log_partition",
    "log_partition_from_table",
    "log_positivity_asymptotic",
    "log_positivity_coefficients",
    "log_z_ggue_exact",
    "log_z_lue_exact",
    "moment",
    "moment_table",
    "partition_log_derivative_fd",
    "recurrence_table",
    "resolvent_eval",
    "string_residual",
    "validate_moments",
    "weight_eval",
    "__version__",
]
