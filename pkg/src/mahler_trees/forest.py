"""Factorization trees: construction, validation, homomorphisms, export.

Trees are stored as an arena of :class:`TreeNode` records indexed by id, with
node 0 as the root.  ``build_maximal_primitive`` gives every vertex the full
set of delta/epsilon children; ``build_canonical_optimal`` keeps only the
delta children when there are any.
"""

from __future__ import annotations

import json
import os
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import AlphaMismatch, CapacityExceeded, InvalidInput, NotFound
from .factorization import (
    Factorization,
    Fraction,
    canonicalize,
    children_delta,
    delta,
    epsilon,
    format_factorization,
    is_direct_subfactorization,
    validate_factorization,
)
from .rational import PrimeLadder, ReducedRational, parse_rational, prime_ladder

MAXIMAL_PRIMITIVE = "maximal-primitive"
CANONICAL_OPTIMAL = "canonical-optimal"
USER = "user"

DEFAULT_NODE_CAP = 10**6


def default_node_cap() -> int:
    env = os.environ.get("MAHLER_NODE_CAP")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InvalidInput(f"MAHLER_NODE_CAP={env!r} is not an integer") from None
        if cap < 1:
            raise InvalidInput("MAHLER_NODE_CAP must be positive")
        return cap
    return DEFAULT_NODE_CAP


@dataclass(frozen=True)
class TreeNode:
    id: int
    parent: int | None
    children: tuple[int, ...]
    content: Factorization

    @property
    def level(self) -> int:
        return self.content.level


@dataclass(frozen=True, eq=False)
class FactorizationTree:
    alpha: ReducedRational
    ladder: PrimeLadder
    nodes: tuple[TreeNode, ...]
    kind: str = USER
    root: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def content(self, node_id: int) -> Factorization:
        return self.nodes[node_id].content

    def level_nodes(self, level: int) -> list[int]:
        return [n.id for n in self.nodes if n.level == level]

    def edges(self) -> list[tuple[int, int]]:
        return [(n.parent, n.id) for n in self.nodes if n.parent is not None]

    def bfs(self) -> list[int]:
        order = [self.root]
        for node_id in order:
            order.extend(self.nodes[node_id].children)
        return order

    @classmethod
    def from_parents(cls, alpha: ReducedRational, parents: Sequence[int | None],
                     contents: Sequence[Factorization], kind: str = USER) -> FactorizationTree:
        """Assemble a tree from a parent array; the root is the entry whose parent is None."""
        if len(parents) != len(contents):
            raise InvalidInput("parents and contents must have equal length")
        roots = [i for i, p in enumerate(parents) if p is None]
        if len(roots) != 1:
            raise InvalidInput(f"expected exactly one root, found {len(roots)}")
        children: list[list[int]] = [[] for _ in parents]
        for i, p in enumerate(parents):
            if p is not None:
                if not 0 <= p < len(parents) or p == i:
                    raise InvalidInput(f"node {i} has invalid parent {p}")
                children[p].append(i)
        nodes = tuple(TreeNode(i, parents[i], tuple(children[i]), contents[i])
                      for i in range(len(parents)))
        tree = cls(alpha, prime_ladder(alpha), nodes, kind, roots[0])
        if len(tree.bfs()) != len(nodes):
            raise InvalidInput("parent array does not describe a single rooted tree")
        return tree


def _build(alpha: ReducedRational, kind: str, expand: Callable, node_cap: int | None,
           rng: random.Random | None) -> FactorizationTree:
    cap = default_node_cap() if node_cap is None else node_cap
    ladder = prime_ladder(alpha)
    parents: list[int | None] = [None]
    contents = [Factorization((), 0)]
    children: list[list[int]] = [[]]
    queue = deque([0])
    while queue:
        node_id = queue.popleft()
        F = contents[node_id]
        if F.level == ladder.N:
            continue
        kids = expand(F, ladder)
        if rng is not None:
            kids = list(kids)
            rng.shuffle(kids)
        for child in kids:
            if len(contents) >= cap:
                raise CapacityExceeded(
                    f"tree for {alpha} exceeds the node cap of {cap} vertices")
            cid = len(contents)
            parents.append(node_id)
            contents.append(child)
            children.append([])
            children[node_id].append(cid)
            queue.append(cid)
    nodes = tuple(TreeNode(i, parents[i], tuple(children[i]), contents[i])
                  for i in range(len(contents)))
    return FactorizationTree(alpha, ladder, nodes, kind)


def canonical_children(F: Factorization, ladder: PrimeLadder) -> list[Factorization]:
    return delta(F, ladder) or epsilon(F, ladder)


def build_maximal_primitive(alpha: ReducedRational, node_cap: int | None = None,
                            rng: random.Random | None = None) -> FactorizationTree:
    """Build the tree whose children at every vertex are exactly ``Delta`` of its content.

    ``rng`` shuffles each child list before insertion; the result is the same
    tree up to isomorphism.
    """
    return _build(alpha, MAXIMAL_PRIMITIVE, children_delta, node_cap, rng)


def build_canonical_optimal(alpha: ReducedRational, node_cap: int | None = None,
                            rng: random.Random | None = None) -> FactorizationTree:
    """Children are the delta set when non-empty, otherwise the single epsilon child."""
    return _build(alpha, CANONICAL_OPTIMAL, canonical_children, node_cap, rng)


@dataclass
class TreeReport:
    violations: list[tuple[str, list[int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, axiom: str, node_ids: Iterable[int]) -> None:
        ids = sorted(set(node_ids))
        if ids:
            self.violations.append((axiom, ids))

    def axioms(self) -> list[str]:
        return [a for a, _ in self.violations]


def validate_tree(T: FactorizationTree) -> TreeReport:
    """Check the four tree axioms plus content validity and the leaf/level rule.

    Axiom labels: ``"(i)"`` empty root, ``"(ii)"`` non-top vertices have
    children, ``"(iii)"`` distinct sibling contents, ``"(iv)"`` parent is a
    direct subfactorization.  ``"content"`` flags invalid factorizations and
    ``"leaves"`` flags childless vertices below the top level.
    """
    report = TreeReport()
    ladder = T.ladder
    N = ladder.N
    root = T.nodes[T.root]
    if root.content.entries or root.level != 0:
        report.add("(i)", [T.root])
    report.add("content", (n.id for n in T.nodes if validate_factorization(n.content, ladder)))
    report.add("(ii)", (n.id for n in T.nodes if n.level < N and not n.children))
    bad_siblings = []
    for n in T.nodes:
        seen: dict[Factorization, int] = {}
        for c in n.children:
            key = canonicalize(T.nodes[c].content)
            if key in seen:
                bad_siblings += [seen[key], c]
            else:
                seen[key] = c
    report.add("(iii)", bad_siblings)
    report.add("(iv)", (n.id for n in T.nodes if n.parent is not None and not
                        is_direct_subfactorization(T.nodes[n.parent].content, n.content, ladder)))
    report.add("leaves", (n.id for n in T.nodes if not n.children and n.level != N))
    return report


@dataclass(frozen=True)
class TreeHomomorphism:
    source: FactorizationTree
    target: FactorizationTree
    vertex_map: dict[int, int]

    def is_injective(self) -> bool:
        return len(set(self.vertex_map.values())) == len(self.vertex_map)

    def is_surjective(self) -> bool:
        return set(self.vertex_map.values()) == set(range(len(self.target)))

    def is_content_preserving(self) -> bool:
        s, t = self.source, self.target
        return all(canonicalize(s.content(r)) == canonicalize(t.content(q))
                   for r, q in self.vertex_map.items())

    def is_parent_preserving(self) -> bool:
        s, t = self.source, self.target
        for r, q in self.vertex_map.items():
            p = s[r].parent
            if p is None:
                if t[q].parent is not None:
                    return False
            elif self.vertex_map[p] != t[q].parent:
                return False
        return True

    def is_edge_preserving(self) -> bool:
        t = self.target
        return all(t[self.vertex_map[c]].parent == self.vertex_map[p]
                   for p, c in self.source.edges())


def find_homomorphism(T1: FactorizationTree, T2: FactorizationTree) -> TreeHomomorphism:
    """Map root to root, then each vertex to the same-content child of its parent's image.

    Raises NotFound when some vertex has no matching child, AlphaMismatch when
    the trees belong to different rationals.
    """
    if T1.alpha != T2.alpha:
        raise AlphaMismatch(f"trees are for {T1.alpha} and {T2.alpha}")
    if canonicalize(T1[T1.root].content) != canonicalize(T2[T2.root].content):
        raise NotFound("root contents differ")
    child_index: dict[int, dict[Factorization, int]] = {}
    sigma = {T1.root: T2.root}
    for r in T1.bfs():
        q = sigma[r]
        if T1[r].children and q not in child_index:
            child_index[q] = {canonicalize(T2[c].content): c for c in T2[q].children}
        for c in T1[r].children:
            match = child_index[q].get(canonicalize(T1[c].content))
            if match is None:
                raise NotFound(
                    f"vertex {c} ({format_factorization(T1[c].content)}) has no "
                    f"counterpart under target vertex {q}")
            sigma[c] = match
    hom = TreeHomomorphism(T1, T2, sigma)
    assert hom.is_injective() and hom.is_content_preserving() and hom.is_parent_preserving()
    return hom


def is_isomorphic(T1: FactorizationTree, T2: FactorizationTree) -> bool:
    try:
        hom = find_homomorphism(T1, T2)
    except NotFound:
        return False
    return hom.is_surjective()


def leaves(T: FactorizationTree) -> list[Factorization]:
    """Contents of the top-level vertices in construction (id) order."""
    N = T.ladder.N
    return [n.content for n in T.nodes if n.level == N]


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def tree_to_dict(T: FactorizationTree) -> dict:
    return {
        "alpha": f"{T.alpha.numerator}/{T.alpha.denominator}",
        "kind": T.kind,
        "nodes": [
            {
                "id": n.id,
                "parent": n.parent,
                "level": n.level,
                "entries": [[str(e.num), str(e.den)] for e in n.content.entries],
            }
            for n in T.nodes
        ],
    }


def tree_from_dict(data: dict) -> FactorizationTree:
    """Inverse of :func:`tree_to_dict`."""
    try:
        alpha = parse_rational(data["alpha"])
        records = sorted(data["nodes"], key=lambda r: r["id"])
        ids = [r["id"] for r in records]
        if ids != list(range(len(ids))):
            raise InvalidInput("node ids must be 0..n-1")
        parents = [r["parent"] for r in records]
        contents = [Factorization(tuple(Fraction(int(a), int(b)) for a, b in r["entries"]),
                                  int(r["level"])) for r in records]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"malformed tree JSON: {exc}") from exc
    return FactorizationTree.from_parents(alpha, parents, contents, data.get("kind", USER))


def export_tree(T: FactorizationTree, format: str = "text") -> bytes:
    """Serialize a tree as ``dot``, ``json`` or an indented ``text`` outline."""
    if format == "json":
        return (json.dumps(tree_to_dict(T), indent=2) + "\n").encode()
    if format == "dot":
        lines = ["digraph factorization_tree {"]
        for n in T.nodes:
            label = _dot_escape(format_factorization(n.content))
            lines.append(f'  {n.id} [label="{label}"];')
        for p, c in T.edges():
            lines.append(f"  {p} -> {c};")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if format == "text":
        lines = []
        stack = [(T.root, 0)]
        while stack:
            node_id, depth = stack.pop()
            lines.append("  " * depth + format_factorization(T[node_id].content))
            stack.extend((c, depth + 1) for c in reversed(T[node_id].children))
        return ("\n".join(lines) + "\n").encode()
    raise InvalidInput(f"unknown export format {format!r}; expected dot, json or text")
