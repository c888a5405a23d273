"""Exact computations for Keane's minimal non-uniquely-ergodic 4-interval exchanges."""

from .construction import (
    KEANE_PERMUTATION,
    KeaneConstruction,
    ParamSeq,
    admissible,
    keane_matrix,
    lengths,
    return_times,
)
from .dimension import dim_bounds, generate_rule, generic_analysis, t_k
from .errors import DomainError, PrecisionWarning, ResourceError, StepBudgetExceeded
from .iet import IETSpec, Permutation, apply, first_return, orbit
from .measures import interval_measure, lemma_suite, level_measure, ratio_enclosure
from .recurrence import appendix_params, control_most_bound, controlled_nice_check, recurrence_stat
from .towers import TowerDecomposition

__version__ = "0.1.0"
