"""Annihilating pairs and uncertainty constants on finite groups (Z/NZ)^d."""

from .group import (
    INF,
    ExponentPair,
    GroupMismatchError,
    GroupSpec,
    IndexSet,
    Signal,
    conjugate,
    dft,
    dft_matrix,
    idft,
    lp_norm,
    parse_exponent,
    random_signal,
)
from .operators import (
    AnnihilationReport,
    NormEstimate,
    annihilation_report,
    dense_norm,
    exact_annihilation_constant,
    operator_norm,
    weak_annihilation_check,
)
from .restriction import (
    EnergyReport,
    RestrictionBound,
    additive_energy,
    energy_restriction_constant,
    holder_convert,
    max_energy_ratio,
    restriction_norm_exact,
    restriction_norm_lower,
    restriction_norm_upper_interp,
)
from .bounds import TheoremBound
from .recovery import RecoveryProblem, RecoveryResult, iterative_projection, sparse_uniqueness_oracle

__version__ = "0.1.0"
