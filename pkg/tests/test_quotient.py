import json
import random

import pytest

from mahler_trees.forest import build_canonical_optimal, build_maximal_primitive
from mahler_trees.quotient import (
    are_isomorphic,
    check_projection,
    export_quotient,
    is_binary_tree,
    quotient,
)
from mahler_trees.rational import is_square_free, parse_rational
from mahler_trees.search import random_alpha


def test_quotient_of_optimal_851_858():
    G = quotient(build_canonical_optimal(parse_rational("851/858")))
    assert len(G) == 9
    top = {c.measure for c in G.classes if c.level == 6}
    assert top == {(37, 23, 3), (37, 23, 2)}
    assert is_binary_tree(G)
    assert check_projection(G) == []
    level3 = [c for c in G.classes if c.level == 3]
    assert len(level3) == 1 and len(level3[0].members) == 2


def test_quotient_single_root():
    G = quotient(build_canonical_optimal(parse_rational("1")))
    assert len(G) == 1 and not G.edges
    assert is_binary_tree(G)


def test_quotient_4_15_has_merging_class():
    G = quotient(build_maximal_primitive(parse_rational("4/15")))
    merged = [c for c in G.classes if G.in_degree(c.id) == 2]
    assert [(c.level, c.measure) for c in merged] == [(4, (5, 3, 2))]
    parents = sorted(G.classes[g].measure for g, h in G.edges if h == merged[0].id)
    assert parents == [(5, 3), (5, 3, 2)]
    assert not is_binary_tree(G)
    assert check_projection(G) == []


def test_class_count_bounded_by_vertices():
    for text in ("30/7", "851/858", "4/15", "316889/549010"):
        for build in (build_maximal_primitive, build_canonical_optimal):
            T = build(parse_rational(text))
            G = quotient(T)
            assert len(G) <= len(T)
            distinct = {(T.content(i).level, T.content(i).measure()) for i in range(len(T))}
            assert len(G) == len(distinct)


def test_binary_tree_for_square_free_random():
    rng = random.Random(11)
    checked = 0
    while checked < 60:
        alpha = random_alpha(rng, 6, square_prob=0.0)
        assert is_square_free(alpha)
        for build in (build_maximal_primitive, build_canonical_optimal):
            G = quotient(build(alpha))
            assert check_projection(G) == []
            assert is_binary_tree(G)
        checked += 1


@pytest.mark.parametrize("text", ["851/858", "4/15", "360/77", "316889/549010"])
def test_quotient_invariant_under_isomorphism(text):
    alpha = parse_rational(text)
    for build in (build_maximal_primitive, build_canonical_optimal):
        G1 = quotient(build(alpha))
        G2 = quotient(build(alpha, rng=random.Random(3)))
        assert are_isomorphic(G1, G2)


def test_export_quotient_formats():
    G = quotient(build_canonical_optimal(parse_rational("851/858")))
    text = export_quotient(G, "text").decode().splitlines()
    assert text[0] == "() x1"
    assert "(37,23,2) x1" in {line.strip() for line in text}
    dot = export_quotient(G, "dot").decode()
    assert dot.count("->") == 8
    data = json.loads(export_quotient(G, "json"))
    assert data["binary_tree"] is True and len(data["classes"]) == 9
    not_tree = export_quotient(quotient(build_maximal_primitive(parse_rational("4/15"))), "text")
    assert not_tree.decode().startswith("# not a tree")
