"""Optimal factorization search and the brute-force oracles that check it.

All optimality decisions compare exact integer measure vectors
lexicographically.  Floating-point t-norms are only used for diagnostics and
for the numeric cross-check that the lexicographic winner really is smaller
for large enough t.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .errors import CapacityExceeded, InvalidInput, NotFound
from .factorization import (
    Factorization,
    Fraction,
    canonicalize,
    direct_subfactorizations,
    format_factorization,
    format_measure,
    is_direct_subfactorization,
    is_primitive,
    is_valid,
    measure_vector,
)
from .forest import (
    build_canonical_optimal,
    build_maximal_primitive,
    canonical_children,
    default_node_cap,
    find_homomorphism,
    is_isomorphic,
    leaves,
    validate_tree,
)
from .quotient import are_isomorphic, check_projection, is_binary_tree, quotient
from .rational import (
    NUM,
    PrimeLadder,
    ReducedRational,
    is_separation_index_by_valuation,
    is_square_free,
    iter_primes_below,
    prime_ladder,
    separation_indices,
)

STRATEGIES = ("canonical", "primitive", "staged")
DEFAULT_T_CAP = 2.0**16
T_MARGIN = 1e-12
PRIMITIVE_ORACLE_CAP = 9
ALL_ORACLE_CAP = 7


@dataclass(frozen=True)
class TraceStep:
    level: int
    before: int
    after: int
    survivors: tuple[Factorization, ...]


@dataclass(frozen=True)
class SearchResult:
    alpha: ReducedRational
    strategy: str
    optimal_set: tuple[Factorization, ...]
    measure: tuple[int, ...]
    candidates_examined: int
    pruning_trace: tuple[TraceStep, ...] = ()


def _measure_key(F: Factorization) -> tuple[int, ...]:
    # Trimmed non-increasing vectors of integers >= 2: plain tuple order is the
    # padded lexicographic order.
    return measure_vector(F)


def _unique(items: Sequence[Factorization]) -> list[Factorization]:
    seen = set()
    out = []
    for F in items:
        key = canonicalize(F)
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def _sorted_set(items: Sequence[Factorization]) -> tuple[Factorization, ...]:
    return tuple(sorted(_unique(items), key=lambda F: F.entries, reverse=True))


def lex_filter(candidates: Sequence[Factorization]) -> list[Factorization]:
    """Keep the candidates whose measure vector is lexicographically least.

    Runs the iterated-minimum filter: at step j keep those whose j-th
    measure entry (1 past the end) is minimal, until all survivors agree.
    """
    if not candidates:
        raise InvalidInput("lex_filter needs at least one candidate")
    levels = {F.level for F in candidates}
    if len(levels) != 1:
        raise InvalidInput(f"candidates span several levels: {sorted(levels)}")
    pool = [(F, measure_vector(F)) for F in candidates]
    j = 0
    while len({v for _, v in pool}) > 1:
        mu = min(v[j] if j < len(v) else 1 for _, v in pool)
        pool = [(F, v) for F, v in pool if (v[j] if j < len(v) else 1) == mu]
        j += 1
    return [F for F, _ in pool]


def _staged(alpha: ReducedRational, stop: int | None = None,
            node_cap: int | None = None) -> tuple[list[Factorization], list[TraceStep], int]:
    ladder = prime_ladder(alpha)
    N = ladder.N if stop is None else stop
    separations = set(separation_indices(alpha))
    cap = default_node_cap() if node_cap is None else node_cap
    frontier = [Factorization((), 0)]
    trace: list[TraceStep] = []
    examined = 1
    for n in range(N + 1):
        if n in separations:
            best = min(_measure_key(F) for F in frontier)
            kept = [F for F in frontier if _measure_key(F) == best]
            trace.append(TraceStep(n, len(frontier), len(kept), tuple(kept)))
            frontier = kept
        if n == N:
            break
        nxt = []
        for F in frontier:
            nxt.extend(canonical_children(F, ladder))
        frontier = _unique(nxt)
        examined += len(nxt)
        if examined > cap:
            raise CapacityExceeded(f"staged search for {alpha} exceeds the node cap of {cap}")
    return frontier, trace, examined


def optimal_factorizations(alpha: ReducedRational, strategy: str = "canonical",
                           node_cap: int | None = None) -> SearchResult:
    if strategy == "canonical":
        tree = build_canonical_optimal(alpha, node_cap)
    elif strategy == "primitive":
        tree = build_maximal_primitive(alpha, node_cap)
    elif strategy == "staged":
        frontier, trace, examined = _staged(alpha, node_cap=node_cap)
        best = _sorted_set(frontier)
        return SearchResult(alpha, strategy, best, measure_vector(best[0]),
                            examined, tuple(trace))
    else:
        raise InvalidInput(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    candidates = leaves(tree)
    best = _sorted_set(lex_filter(candidates))
    N = tree.ladder.N
    trace = (TraceStep(N, len(candidates), len(best), best),)
    return SearchResult(alpha, strategy, best, measure_vector(best[0]), len(tree), trace)


def staged_frontier(alpha: ReducedRational, level: int,
                    node_cap: int | None = None) -> list[Factorization]:
    """The lex-minimal vertices of the canonical optimal tree at a separation level."""
    if level not in separation_indices(alpha):
        raise InvalidInput(f"{level} is not a separation index of {alpha}")
    frontier, _, _ = _staged(alpha, stop=level, node_cap=node_cap)
    return list(_sorted_set(frontier))


def t_norm(F: Factorization | Sequence[Fraction], t: float) -> float:
    """``(sum_i log(max(a_i, b_i))**t)**(1/t)``, evaluated with the largest term factored out."""
    if not t >= 1:
        raise InvalidInput(f"t must be >= 1, got {t}")
    entries = F.entries if isinstance(F, Factorization) else F
    logs = [math.log(e.height) for e in entries if e.height > 1]
    if not logs:
        return 0.0
    top = max(logs)
    if math.isinf(t):
        return top
    return top * math.fsum((x / top) ** t for x in logs) ** (1.0 / t)


def mt_upper(alpha: ReducedRational, t: float, node_cap: int | None = None) -> float:
    """Least t-norm over the canonical optimal tree's leaves.

    An upper bound on the t-metric Mahler measure for every t >= 1, and equal
    to it once t is past the optimality threshold.
    """
    if not t >= 1:
        raise InvalidInput(f"t must be >= 1, got {t}")
    return min(t_norm(F, t) for F in leaves(build_canonical_optimal(alpha, node_cap)))


def separating_t(better: Factorization, worse: Factorization | Sequence[Factorization],
                 t_cap: float = DEFAULT_T_CAP, margin: float = T_MARGIN) -> float | None:
    """Smallest power of two t <= t_cap with ``better`` strictly below ``worse`` at t and 2t.

    ``worse`` may be a single factorization or a collection; with a collection
    one t has to separate ``better`` from all of them at once.
    """
    rivals = [worse] if isinstance(worse, Factorization) else list(worse)
    t = 1.0
    while t <= t_cap:
        if all(t_norm(W, s) - t_norm(better, s) > margin for W in rivals for s in (t, 2 * t)):
            return t
        t *= 2
    return None


def _set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings: slot labels for n items, each labelling up to relabelling once."""
    if n == 0:
        yield []
        return
    labels = [0] * n

    def rec(i: int, used: int) -> Iterator[list[int]]:
        if i == n:
            yield labels
            return
        for s in range(used + 1):
            labels[i] = s
            yield from rec(i + 1, max(used, s + 1))

    yield from rec(1, 1)


def _enumerate(alpha: ReducedRational, cap: int, primitive_only: bool) -> dict[int, set[Factorization]]:
    ladder = prime_ladder(alpha)
    if ladder.N > cap:
        raise CapacityExceeded(f"{alpha} has {ladder.N} prime factors; oracle cap is {cap}")
    out: dict[int, set[Factorization]] = {}
    for n in range(ladder.N + 1):
        found = set()
        occurrences = ladder.entries[:n]
        for labels in _set_partitions(n):
            slots = [[1, 1] for _ in range(max(labels, default=-1) + 1)]
            for (p, sign), s in zip(occurrences, labels):
                slots[s][0 if sign == NUM else 1] *= p
            F = canonicalize(Factorization(tuple(Fraction(a, b) for a, b in slots), n))
            if not is_valid(F, ladder):
                continue
            if primitive_only and not is_primitive(F):
                continue
            found.add(F)
        out[n] = found
    return out


def oracle_enumerate_primitive(alpha: ReducedRational,
                               cap: int = PRIMITIVE_ORACLE_CAP) -> dict[int, set[Factorization]]:
    """Every primitive factorization of every partial product, by exhaustive grouping.

    Independent of the delta/epsilon child maps: each prime occurrence is
    assigned to a group, groups become entries, and the result is filtered by
    the factorization axioms.
    """
    return _enumerate(alpha, cap, primitive_only=True)


def oracle_enumerate_all(alpha: ReducedRational,
                         cap: int = ALL_ORACLE_CAP) -> dict[int, set[Factorization]]:
    return _enumerate(alpha, cap, primitive_only=False)


@dataclass
class CheckResult:
    theorem: str
    status: str  # "pass" | "fail" | "n/a"
    witness: Any = None

    def as_dict(self) -> dict:
        return {"theorem": self.theorem, "status": self.status, "witness": self.witness}


@dataclass
class VerifyReport:
    alpha: ReducedRational
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def add(self, theorem: str, ok: bool | None, witness: Any = None) -> None:
        status = "n/a" if ok is None else ("pass" if ok else "fail")
        self.checks.append(CheckResult(theorem, status, witness))

    def status(self, theorem: str) -> str:
        for c in self.checks:
            if c.theorem == theorem:
                return c.status
        raise KeyError(theorem)


def _fmt(F: Factorization) -> str:
    return format_factorization(F)


def _check_ladder(ladder: PrimeLadder) -> str | None:
    primes = [e.prime for e in ladder.entries]
    if primes != sorted(primes, reverse=True):
        return "ladder not non-increasing"
    if ladder.partials[-1] != ladder.alpha:
        return "top partial product differs from alpha"
    sep = set(separation_indices(ladder.alpha))
    for n in range(ladder.N + 1):
        if (n in sep) != is_separation_index_by_valuation(ladder, n):
            return f"separation index {n} disagrees with the valuation definition"
    return None


def _check_children(P, ladder: PrimeLadder) -> str | None:
    for node in P.nodes:
        A = node.content
        if A.level == ladder.N:
            continue
        kids = [P.content(c) for c in node.children]
        if not kids:
            return f"{_fmt(A)} has no children"
        mA = measure_vector(A)
        grown = mA + (ladder.prime(A.level + 1),)
        for B in kids:
            if not is_valid(B, ladder) or B.level != A.level + 1:
                return f"child {_fmt(B)} of {_fmt(A)} is not a valid factorization one level up"
            if not is_direct_subfactorization(A, B, ladder):
                return f"{_fmt(A)} is not a direct subfactorization of {_fmt(B)}"
            if not is_primitive(B):
                return f"child {_fmt(B)} of primitive {_fmt(A)} is not primitive"
            if measure_vector(B) not in (mA, grown):
                return f"child {_fmt(B)} changes the measure of {_fmt(A)} unexpectedly"
    return None


def verify_theorems(alpha: ReducedRational, node_cap: int | None = None,
                    primitive_cap: int = PRIMITIVE_ORACLE_CAP, all_cap: int = ALL_ORACLE_CAP,
                    t_cap: float = DEFAULT_T_CAP, seed: int = 0) -> VerifyReport:
    """Run every structural check for one rational and collect pass/fail/n/a results."""
    report = VerifyReport(alpha)
    ladder = prime_ladder(alpha)
    N = ladder.N
    square_free = is_square_free(alpha)
    rng = random.Random(seed)

    report.add("prime-ladder", _check_ladder(ladder) is None, _check_ladder(ladder))

    P = build_maximal_primitive(alpha, node_cap)
    O = build_canonical_optimal(alpha, node_cap)
    P2 = build_maximal_primitive(alpha, node_cap, rng=rng)
    O2 = build_canonical_optimal(alpha, node_cap, rng=rng)

    bad = [(name, validate_tree(T).violations) for name, T in (("P", P), ("O", O))
           if not validate_tree(T).ok]
    report.add("tree-axioms", not bad, bad or None)

    problem = _check_children(P, ladder)
    report.add("delta-children", problem is None, problem)

    oracle = oracle_enumerate_primitive(alpha, primitive_cap)
    mismatch = None
    for n in range(N + 1):
        tree_set = {canonicalize(P.content(i)) for i in P.level_nodes(n)}
        if tree_set != oracle[n]:
            extra = sorted(map(_fmt, tree_set - oracle[n]))
            missing = sorted(map(_fmt, oracle[n] - tree_set))
            mismatch = {"level": n, "tree_only": extra, "oracle_only": missing}
            break
    report.add("primitive-complete", mismatch is None, mismatch)

    if square_free:
        contents = [canonicalize(n.content) for n in P.nodes]
        report.add("content-injective", len(set(contents)) == len(contents))
        multi = [(_fmt(n.content), len(direct_subfactorizations(n.content, ladder)))
                 for n in P.nodes if n.level >= 1
                 and len(direct_subfactorizations(n.content, ladder)) != 1]
        report.add("unique-subfactorization", not multi, multi[:5] or None)
    else:
        report.add("content-injective", None, "alpha is not square-free")
        report.add("unique-subfactorization", None, "alpha is not square-free")

    try:
        hom = find_homomorphism(O, P)
        ok = hom.is_injective() and hom.is_edge_preserving() and hom.is_content_preserving()
        report.add("optimal-embeds-in-primitive", ok)
    except NotFound as exc:
        report.add("optimal-embeds-in-primitive", False, str(exc))

    try:
        ident = find_homomorphism(P, P).vertex_map
        report.add("identity-only-automorphism", all(k == v for k, v in ident.items()))
    except NotFound as exc:
        report.add("identity-only-automorphism", False, str(exc))

    report.add("primitive-tree-unique", is_isomorphic(P, P2) and is_isomorphic(P2, P))
    report.add("optimal-tree-unique", is_isomorphic(O, O2) and is_isomorphic(O2, O))

    results = {s: optimal_factorizations(alpha, s, node_cap) for s in STRATEGIES}
    base = results["canonical"]
    disagree = [s for s, r in results.items()
                if r.optimal_set != base.optimal_set or r.measure != base.measure]
    report.add("strategy-agreement", not disagree, disagree or None)

    oracle_best = _sorted_set(lex_filter(list(oracle[N])))
    report.add("oracle-agreement", oracle_best == base.optimal_set,
               None if oracle_best == base.optimal_set else [_fmt(F) for F in oracle_best])

    if N <= all_cap:
        everything = oracle_enumerate_all(alpha, all_cap)
        all_best = lex_filter(list(everything[N]))
        ok = (measure_vector(all_best[0]) == measure_vector(oracle_best[0])
              and all(is_primitive(F) for F in all_best))
        report.add("optimal-is-primitive", ok,
                   None if ok else [_fmt(F) for F in all_best])
    else:
        report.add("optimal-is-primitive", None, f"N = {N} exceeds the all-factorization cap {all_cap}")

    missing_sep = None
    O_levels: dict[int, set[Factorization]] = {}
    for node in O.nodes:
        O_levels.setdefault(node.level, set()).add(canonicalize(node.content))
    for n in separation_indices(alpha):
        optimal_n = set(lex_filter(list(oracle[n])))
        if not optimal_n <= O_levels.get(n, set()):
            missing_sep = {"level": n, "missing": sorted(map(_fmt, optimal_n - O_levels[n]))}
            break
        if set(staged_frontier(alpha, n, node_cap)) != optimal_n:
            missing_sep = {"level": n, "staged_frontier": [_fmt(F) for F in staged_frontier(alpha, n)]}
            break
    report.add("separation-levels-optimal", missing_sep is None, missing_sep)

    qP, qO, qP2 = quotient(P), quotient(O), quotient(P2)
    failures = check_projection(qP) + check_projection(qO)
    report.add("quotient-projection", not failures, failures or None)
    report.add("quotient-unique", are_isomorphic(qP, qP2))
    if square_free:
        report.add("measure-class-binary-tree", is_binary_tree(qP) and is_binary_tree(qO))
    else:
        report.add("measure-class-binary-tree", None, "alpha is not square-free")

    A = base.optimal_set[0]
    stuck = []
    for B in _unique(leaves(O)):
        if measure_vector(B) == base.measure:
            continue
        if separating_t(A, B, t_cap) is None:
            stuck.append(_fmt(B))
    report.add("t-regime", not stuck, stuck or None)
    return report


def random_alpha(rng: random.Random, max_primes: int, prime_bound: int = 100,
                 square_prob: float = 0.3) -> ReducedRational:
    """Random rational with at most ``max_primes`` prime occurrences below ``prime_bound``.

    Distinct primes are put on a uniformly random side; with probability
    ``square_prob`` one of them is doubled to exercise non-square-free paths.
    """
    primes = list(iter_primes_below(prime_bound))
    N = rng.randint(1, max_primes)
    square = N >= 2 and rng.random() < square_prob
    chosen = rng.sample(primes, N - 1 if square else N)
    occurrences = [(p, rng.random() < 0.5) for p in chosen]
    if square:
        occurrences.append(rng.choice(occurrences))
    num = math.prod(p for p, top in occurrences if top)
    den = math.prod(p for p, top in occurrences if not top)
    return ReducedRational(num, den)


def describe_result(result: SearchResult) -> str:
    lines = [_fmt(F) for F in result.optimal_set]
    lines.append(f"measure: {format_measure(result.measure)}")
    return "\n".join(lines)
