"""Optimal factorizations of positive rationals under the t-metric Mahler measure."""

from .errors import (
    AlphaMismatch,
    CapacityExceeded,
    InvalidInput,
    LevelExhausted,
    MahlerError,
    NotFound,
    ParseError,
)
from .factorization import (
    Factorization,
    Fraction,
    canonicalize,
    children_delta,
    delta,
    epsilon,
    is_direct_subfactorization,
    is_primitive,
    lex_compare,
    measure_equivalent,
    measure_vector,
    parse_factorization,
    validate_factorization,
)
from .forest import (
    FactorizationTree,
    TreeHomomorphism,
    build_canonical_optimal,
    build_maximal_primitive,
    export_tree,
    find_homomorphism,
    is_isomorphic,
    leaves,
    validate_tree,
)
from .quotient import MeasureClassGraph, export_quotient, is_binary_tree, quotient
from .rational import (
    PrimeLadder,
    ReducedRational,
    factor_integer,
    is_square_free,
    mahler_measure,
    parse_rational,
    prime_ladder,
    separation_indices,
)
from .search import (
    SearchResult,
    lex_filter,
    mt_upper,
    optimal_factorizations,
    oracle_enumerate_all,
    oracle_enumerate_primitive,
    separating_t,
    staged_frontier,
    t_norm,
    verify_theorems,
)

__version__ = "0.1.0"
