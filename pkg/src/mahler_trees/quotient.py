"""Measure class graphs: a factorization tree modulo measure equivalence.

Two vertices are identified when they sit at the same level and carry equal
integer measure vectors.  Classes are numbered in breadth-first order of their
first member, so the root class is always 0.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

from .errors import InvalidInput
from .factorization import format_measure, measure_vector
from .forest import FactorizationTree


@dataclass(frozen=True)
class MeasureClass:
    id: int
    level: int
    measure: tuple[int, ...]
    members: tuple[int, ...]

    @property
    def label(self) -> tuple[int, tuple[int, ...]]:
        return (self.level, self.measure)


@dataclass(frozen=True, eq=False)
class MeasureClassGraph:
    source: FactorizationTree
    classes: tuple[MeasureClass, ...]
    edges: frozenset[tuple[int, int]]
    projection: dict[int, int]

    def __len__(self) -> int:
        return len(self.classes)

    def in_degree(self, class_id: int) -> int:
        return sum(1 for _, h in self.edges if h == class_id)

    def out_degree(self, class_id: int) -> int:
        return sum(1 for g, _ in self.edges if g == class_id)

    def children(self, class_id: int) -> list[int]:
        return sorted(h for g, h in self.edges if g == class_id)

    def labelled_edges(self) -> set[tuple[tuple, tuple]]:
        return {(self.classes[g].label, self.classes[h].label) for g, h in self.edges}


def quotient(T: FactorizationTree) -> MeasureClassGraph:
    index: dict[tuple[int, tuple[int, ...]], int] = {}
    members: list[list[int]] = []
    projection: dict[int, int] = {}
    for node_id in T.bfs():
        F = T.content(node_id)
        key = (F.level, measure_vector(F))
        if key not in index:
            index[key] = len(members)
            members.append([])
        members[index[key]].append(node_id)
        projection[node_id] = index[key]
    classes = tuple(MeasureClass(cid, level, measure, tuple(members[cid]))
                    for (level, measure), cid in sorted(index.items(), key=lambda kv: kv[1]))
    edges = frozenset((projection[p], projection[c]) for p, c in T.edges())
    return MeasureClassGraph(T, classes, edges, projection)


def check_projection(G: MeasureClassGraph) -> list[str]:
    """Return a list of failed quotient invariants; empty means all hold."""
    T = G.source
    failures = []
    labels = [c.label for c in G.classes]
    if len(set(labels)) != len(labels):
        failures.append("class labels not unique")
    if set(G.projection) != set(range(len(T))):
        failures.append("projection not defined on every vertex")
    if set(G.projection.values()) != set(range(len(G.classes))):
        failures.append("projection not surjective")
    for r, g in G.projection.items():
        F = T.content(r)
        if G.classes[g].label != (F.level, measure_vector(F)):
            failures.append(f"vertex {r} does not commute with its class label")
            break
    lifted = {(G.projection[p], G.projection[c]) for p, c in T.edges()}
    if lifted != set(G.edges):
        failures.append("edge set is not exactly the image of the tree edges")
    return failures


def is_binary_tree(G: MeasureClassGraph) -> bool:
    """In-degree at most one, out-degree at most two, and a single rooted tree."""
    n = len(G.classes)
    if n == 0:
        return False
    indeg = Counter(h for _, h in G.edges)
    outdeg = Counter(g for g, _ in G.edges)
    if any(d > 1 for d in indeg.values()) or any(d > 2 for d in outdeg.values()):
        return False
    roots = [c.id for c in G.classes if indeg[c.id] == 0]
    if len(roots) != 1 or len(G.edges) != n - 1:
        return False
    seen = {roots[0]}
    stack = [roots[0]]
    while stack:
        g = stack.pop()
        for h in G.children(g):
            if h not in seen:
                seen.add(h)
                stack.append(h)
    return len(seen) == n


def are_isomorphic(G1: MeasureClassGraph, G2: MeasureClassGraph) -> bool:
    """Label-preserving isomorphism; labels are unique, so matching labels decides it."""
    l1 = [c.label for c in G1.classes]
    l2 = [c.label for c in G2.classes]
    return sorted(l1) == sorted(l2) and G1.labelled_edges() == G2.labelled_edges()


def _class_label(c: MeasureClass) -> str:
    return f"{format_measure(c.measure)} x{len(c.members)}"


def export_quotient(G: MeasureClassGraph, format: str = "text") -> bytes:
    if format == "json":
        T = G.source
        data = {
            "alpha": f"{T.alpha.numerator}/{T.alpha.denominator}",
            "kind": T.kind,
            "binary_tree": is_binary_tree(G),
            "classes": [
                {"id": c.id, "level": c.level, "measure": [str(x) for x in c.measure],
                 "members": list(c.members)}
                for c in G.classes
            ],
            "edges": sorted([g, h] for g, h in G.edges),
        }
        return (json.dumps(data, indent=2) + "\n").encode()
    if format == "dot":
        lines = ["digraph measure_classes {"]
        for c in G.classes:
            lines.append(f'  {c.id} [label="{_class_label(c)}"];')
        for g, h in sorted(G.edges):
            lines.append(f"  {g} -> {h};")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if format == "text":
        if not is_binary_tree(G):
            lines = ["# not a tree"]
            for c in G.classes:
                parents = sorted(g for g, h in G.edges if h == c.id)
                lines.append(f"[{c.id}] level {c.level} {_class_label(c)} <- {parents}")
            return ("\n".join(lines) + "\n").encode()
        lines = []
        stack = [(0, 0)]
        while stack:
            g, depth = stack.pop()
            lines.append("  " * depth + _class_label(G.classes[g]))
            stack.extend((h, depth + 1) for h in reversed(G.children(g)))
        return ("\n".join(lines) + "\n").encode()
    raise InvalidInput(f"unknown export format {format!r}; expected dot, json or text")
