"""interlace-lab: interlaced Boolean-matrix constructions, balanced column
reservoirs, an exact deterministic communication-complexity solver, and the
{0,1}-vector-bin-packing reduction pipeline."""

from .brackets import (
    BracketSpec,
    Equipartition,
    FamilyComplexityResult,
    block_balance,
    enumerate_members,
    family_complexity,
    relaxed_to_classical,
)
from .harness import (
    LemmaCheckResult,
    check_double_interlace,
    check_named_inequality,
    check_robustness,
)
from .interlace import binary_interlace, k_fold_interlace, relaxed_interlace
from .matrix import (
    BooleanMatrix,
    CanonicalForm,
    canonicalize,
    extract,
    find_subgame,
    is_subgame,
    phi,
    real_rank_lower_bound,
    transpose,
)
from .reduction import (
    ImmediateNo,
    ReductionOutput,
    ReductionParams,
    VbpInstance,
    default_params,
    extract_gap_submatrix,
    measure_growth,
    preprocess,
    reduce_instance,
    toy_params,
)
from .reservoir import (
    BalancedColumnSet,
    BalanceReport,
    build_balanced_set,
    build_eps_biased_space,
    default_epsilon,
    verify_balance,
)
from .solver import (
    Internal,
    Leaf,
    ProtocolTree,
    SolveResult,
    Solver,
    decide,
    naive_reference,
    solve_exact,
    verify_protocol,
)

__version__ = "0.1.0"
