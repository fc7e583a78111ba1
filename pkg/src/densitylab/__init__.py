"""densitylab: weighted asymptotic densities of integer sets and numerical
verification of sub-series convergence/divergence constructions."""

from .errors import (
    BlockCapExceeded,
    BudgetExhausted,
    CapabilityError,
    ClassError,
    ConditionError,
    DegenerateError,
    DensityLabError,
    DivergencePrereqError,
    DomainError,
    HintError,
    HorizonError,
    StageBudgetExhausted,
    ZeroCoefficientError,
)
from .psi import (
    PsiClassReport,
    PsiFunction,
    catalog_keys,
    classify,
    get_psi,
    growth_report,
    logconcave_gap,
    psi_prime_sum,
    sandwich_check,
    sandwich_violations,
    validate,
)
from .intsets import (
    APSegmentSet,
    ArithmeticProgression,
    DensityReport,
    FiniteList,
    IncreasingGeneratorSet,
    IntegerSet,
    IntervalUnion,
    PredicateSet,
    PrimesSet,
    WeightedCount,
    chain_check,
    count,
    density_along_phi,
    linear_density_report,
    parse_set,
    psi_density_report,
    weighted_count,
)
from .series import (
    AbelCheck,
    CoeffSequence,
    Trace,
    Verdict,
    abel_identity_check,
    coeff_sequence,
    condition_trace,
    divergence_probe,
    necessity_trace,
    olivier_trace,
    parse_coeff,
    ratio_trace,
    subseries_partial_sums,
)
from .signed import (
    ABDecomposition,
    SignSequence,
    abel_signed_identity_check,
    decompose,
    parse_sign,
    rajagopal_means,
    signed_decay_traces,
    subsigned_partial_sums,
    toeplitz_row_sums_batch,
    toeplitz_rows,
    toeplitz_transform,
)
from .constructions import (
    AuerbachArtifacts,
    HammingWitness,
    SalatExample,
    auerbach_build,
    auerbach_verify,
    check_nk,
    hamming_coeffs,
    salat_example,
    salat_example_verify,
    select_nk,
    sharpness_verify,
    verify_hamming,
)

__version__ = "0.1.0"
