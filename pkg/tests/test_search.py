import math

import pytest

from mahler_trees.errors import CapacityExceeded, InvalidInput
from mahler_trees.factorization import (
    Factorization,
    format_factorization,
    is_primitive,
    parse_factorization,
)
from mahler_trees.forest import build_canonical_optimal, build_maximal_primitive, leaves
from mahler_trees.rational import parse_rational
from mahler_trees.search import (
    STRATEGIES,
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


def names(Fs):
    return sorted(format_factorization(F) for F in Fs)


def test_lex_filter_examples():
    O = build_canonical_optimal(parse_rational("851/858"))
    assert names(lex_filter(leaves(O))) == ["37/33·23/13·1/2"]
    P = build_maximal_primitive(parse_rational("30/7"))
    assert names(lex_filter(leaves(P))) == ["5/7·3/1·2/1"]
    single = [parse_factorization("6/7*5", level=4)]
    assert lex_filter(single) == single


def test_lex_filter_errors():
    with pytest.raises(InvalidInput):
        lex_filter([])
    with pytest.raises(InvalidInput):
        lex_filter([parse_factorization("5/7", level=2), parse_factorization("5/7*3", level=3)])


@pytest.mark.parametrize("text, expected, measure", [
    ("30/7", ["5/7·3/1·2/1"], (7, 3, 2)),
    ("851/858", ["37/33·23/13·1/2"], (37, 23, 2)),
    ("316889/549010", ["131/77·59/46·41/31·1/5"], (131, 59, 41, 5)),
    ("1", ["1"], ()),
])
@pytest.mark.parametrize("strategy", STRATEGIES)
def test_optimal_factorizations(text, expected, measure, strategy):
    result = optimal_factorizations(parse_rational(text), strategy)
    assert names(result.optimal_set) == expected
    assert result.measure == measure
    assert all(is_primitive(F) for F in result.optimal_set)
    assert all(F.product() == parse_rational(text) for F in result.optimal_set)


def test_ties_are_all_reported():
    result = optimal_factorizations(parse_rational("4/15"))
    assert names(result.optimal_set) == ["2/5·2/3", "4/5·1/3"]
    assert result.measure == (5, 3)


def test_unknown_strategy():
    with pytest.raises(InvalidInput):
        optimal_factorizations(parse_rational("30/7"), "greedy")


def test_staged_trace_for_complicated_example():
    result = optimal_factorizations(parse_rational("316889/549010"), "staged")
    step = next(s for s in result.pruning_trace if s.level == 7)
    assert (step.before, step.after) == (6, 2)
    assert names(step.survivors) == ["131/77·59/23·41/31", "131/77·59/31·41/23"]
    assert [s.level for s in result.pruning_trace] == list(range(10))


def test_staged_frontier():
    complicated = parse_rational("316889/549010")
    assert names(staged_frontier(complicated, 7)) == ["131/77·59/23·41/31", "131/77·59/31·41/23"]
    assert staged_frontier(complicated, 0) == [Factorization((), 0)]
    assert names(staged_frontier(parse_rational("30/7"), 2)) == ["5/7"]
    with pytest.raises(InvalidInput):
        staged_frontier(parse_rational("12/7"), 3)


def test_staged_frontier_is_lex_min_of_unpruned_level():
    alpha = parse_rational("316889/549010")
    O = build_canonical_optimal(alpha)
    for level in range(10):
        contents = [O.content(i) for i in O.level_nodes(level)]
        assert names(set(lex_filter(contents))) == names(staged_frontier(alpha, level))


def test_t_norm_values():
    A = parse_factorization("5/7*3*2", level=4)
    assert t_norm(A, 1) == pytest.approx(math.log(42), abs=1e-12)
    assert t_norm(A, 1) == pytest.approx(3.73767, abs=1e-5)
    assert t_norm(Factorization((), 0), 3.5) == 0.0
    assert abs(t_norm(A, 1e4) - math.log(7)) < 1e-3
    assert t_norm(A, math.inf) == math.log(7)
    with pytest.raises(InvalidInput):
        t_norm(A, 0.5)


def test_mt_upper():
    assert mt_upper(parse_rational("1"), 7) == 0.0
    hand = math.sqrt(math.log(7) ** 2 + math.log(3) ** 2 + math.log(2) ** 2)
    assert mt_upper(parse_rational("30/7"), 2) == pytest.approx(hand, abs=1e-12)
    assert hand == pytest.approx(2.33966, abs=1e-5)
    alpha = parse_rational("851/858")
    best = parse_factorization("37/33*23/13*1/2", level=6)
    value = mt_upper(alpha, 50)
    assert value == t_norm(best, 50)
    assert all(value <= t_norm(F, 50) for F in leaves(build_canonical_optimal(alpha)))
    with pytest.raises(InvalidInput):
        mt_upper(alpha, 0.99)


def test_oracle_enumeration_examples():
    P = oracle_enumerate_primitive(parse_rational("30/7"))
    assert names(P[4]) == sorted(["5/7·3/1·2/1", "6/7·5/1", "3/7·5/1·2/1",
                                  "2/7·5/1·3/1", "1/7·5/1·3/1·2/1"])
    assert oracle_enumerate_primitive(parse_rational("1")) == {0: {Factorization((), 0)}}
    assert names(oracle_enumerate_primitive(parse_rational("6"))[2]) == ["3/1·2/1"]
    assert names(oracle_enumerate_all(parse_rational("6"))[2]) == ["3/1·2/1", "6/1"]
    assert "10/7·3/1" in names(oracle_enumerate_all(parse_rational("30/7"))[4])


def test_oracle_caps():
    with pytest.raises(CapacityExceeded):
        oracle_enumerate_all(parse_rational("316889/549010"))
    with pytest.raises(CapacityExceeded):
        oracle_enumerate_primitive(parse_rational("316889/549010"), cap=8)


@pytest.mark.parametrize("text", ["30/7", "851/858", "12/7", "1/64", "90/77"])
def test_optimal_factorizations_are_primitive(text):
    alpha = parse_rational(text)
    everything = oracle_enumerate_all(alpha)
    N = max(everything)
    best_all = lex_filter(list(everything[N]))
    best_prim = lex_filter(list(oracle_enumerate_primitive(alpha)[N]))
    assert all(is_primitive(F) for F in best_all)
    assert set(best_all) == set(best_prim)


@pytest.mark.parametrize("a_k, b_k", [(6, 1), (10, 7), (15, 2), (35, 4), (77, 10)])
def test_splitting_a_composite_entry_wins_for_large_t(a_k, b_k):
    for c in range(2, a_k):
        if a_k % c:
            continue
        d = a_k // c
        if d < 2:
            continue
        t = 100
        split = (math.log(max(c, b_k)) ** t + math.log(d) ** t) ** (1 / t)
        assert split < math.log(a_k)


def test_separating_t():
    best = parse_factorization("37/33*23/13*1/2", level=6)
    other = parse_factorization("37/26*23/11*1/3", level=6)
    t = separating_t(best, other)
    assert t is not None and t <= 2**16
    assert separating_t(other, best) is None


def test_verify_theorems():
    report = verify_theorems(parse_rational("851/858"))
    assert report.passed and all(c.status == "pass" for c in report.checks)
    report = verify_theorems(parse_rational("4/15"))
    assert report.passed
    na = {c.theorem for c in report.checks if c.status == "n/a"}
    assert na == {"content-injective", "unique-subfactorization", "measure-class-binary-tree"}
    report = verify_theorems(parse_rational("1"))
    assert report.passed
