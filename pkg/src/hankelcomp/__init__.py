"""Positive (semi)definite completion of partial Hankel moment sequences."""

from .core import (
    DEFAULT_TOL,
    PartialSequence,
    Pattern,
    ToleranceOptions,
    pattern_of,
    subsequence,
)
from .dispatch import complete_auto, complete_dilated, complete_with_strategy
from .hankel import (
    HankelView,
    PsdReport,
    check_definiteness,
    fully_specified_principal_index_sets,
    hankel,
    is_partial_positive_definite,
    is_partial_positive_semidefinite,
    pointwise_combine,
    schur_complement,
)
from .measure import (
    AtomicMeasure,
    complete_arithmetic_pattern,
    complete_geometric,
    extract_measure,
    lift_psd_to_pd,
    moments,
)
from .oracle import (
    FeasibilityResult,
    decide_pd_completable,
    decide_psd_completable,
    find_witness,
    interval_for_single_missing,
)
from .patterns import (
    PatternVerdict,
    classify,
    contains_forbidden_submatrix_pattern,
    reduce_pattern,
)
from .schur import (
    CompletionCertificate,
    check_odd_gap_partial_pd,
    complete_double_tail,
    complete_even_tail,
    complete_odd_gap,
    complete_pattern_inductive,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "CompletionCertificate",
    "DEFAULT_TOL",
    "FeasibilityResult",
    "HankelView",
    "PartialSequence",
    "Pattern",
    "PatternVerdict",
    "PsdReport",
    "ToleranceOptions",
    "check_definiteness",
    "check_odd_gap_partial_pd",
    "classify",
    "complete_arithmetic_pattern",
    "complete_auto",
    "complete_dilated",
    "complete_double_tail",
    "complete_even_tail",
    "complete_geometric",
    "complete_odd_gap",
    "complete_pattern_inductive",
    "complete_with_strategy",
    "contains_forbidden_submatrix_pattern",
    "decide_pd_completable",
    "decide_psd_completable",
    "extract_measure",
    "find_witness",
    "fully_specified_principal_index_sets",
    "hankel",
    "interval_for_single_missing",
    "is_partial_positive_definite",
    "is_partial_positive_semidefinite",
    "lift_psd_to_pd",
    "moments",
    "pattern_of",
    "pointwise_combine",
    "reduce_pattern",
    "schur_complement",
    "subsequence",
]
