"""Factorizations of the partial products ``alpha_n`` and the maps between them.

A factorization is a finite list of reduced fractions ``a_i/b_i`` whose
product is ``alpha_n``, whose maxima ``max(a_i, b_i)`` are non-increasing and
whose numerators are coprime to every denominator.  Only the nontrivial prefix
is stored; the implicit tail of ``1/1`` entries is dropped.

Equality is entrywise after :func:`canonicalize`, which orders entries with
tied maxima.  Every factorization produced by :func:`delta`, :func:`epsilon`
and :func:`children_delta` is already canonical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import InvalidInput, LevelExhausted, ParseError
from .rational import NUM, PrimeLadder, ReducedRational, is_probable_prime

_ENTRY_RE = re.compile(r"(\d+)(?:/(\d+))?")
_SEPARATORS = re.compile(r"\s*[*·]\s*")


class Fraction(NamedTuple):
    num: int
    den: int

    @property
    def height(self) -> int:
        return self.num if self.num > self.den else self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class Factorization:
    entries: tuple[Fraction, ...]
    level: int

    def __post_init__(self) -> None:
        entries = tuple(e if isinstance(e, Fraction) else Fraction(*e) for e in self.entries)
        end = len(entries)
        while end and entries[end - 1] == (1, 1):
            end -= 1
        object.__setattr__(self, "entries", entries[:end])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def product(self) -> ReducedRational:
        num = math.prod(e.num for e in self.entries)
        den = math.prod(e.den for e in self.entries)
        return ReducedRational(num, den)

    def measure(self) -> tuple[int, ...]:
        return measure_vector(self)

    def __str__(self) -> str:
        return format_factorization(self)


MeasureVector = tuple  # tuple[int, ...], non-increasing, no trailing 1s


def format_factorization(F: Factorization | Sequence[Fraction], sep: str = "·") -> str:
    """Render as ``"5/7·3/1·2/1"``; the empty factorization renders as ``"1"``."""
    entries = F.entries if isinstance(F, Factorization) else F
    if not entries:
        return "1"
    return sep.join(f"{e.num}/{e.den}" for e in entries)


def format_measure(v: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def parse_factorization(text: str, ladder: PrimeLadder | None = None,
                        level: int | None = None) -> Factorization:
    """Parse ``"5/7*3*2"`` (or ``·``-separated) into a Factorization.

    The level is taken from ``level`` if given, otherwise looked up by matching
    the product against ``ladder.partials``.
    """
    text = text.strip()
    if not text:
        raise ParseError("empty factorization text")
    entries = []
    for chunk in _SEPARATORS.split(text):
        m = _ENTRY_RE.fullmatch(chunk)
        if m is None:
            raise ParseError(f"malformed factorization entry {chunk!r}")
        a = int(m.group(1))
        b = int(m.group(2)) if m.group(2) is not None else 1
        if a == 0 or b == 0:
            raise InvalidInput(f"entry {chunk!r} is not a positive fraction")
        g = math.gcd(a, b)
        entries.append(Fraction(a // g, b // g))
    if level is None:
        if ladder is None:
            raise InvalidInput("either a ladder or an explicit level is required")
        level = ladder.level_of(Factorization(tuple(entries), 0).product())
        if level is None:
            raise InvalidInput(f"{text!r} does not multiply to any partial product of {ladder.alpha}")
    return Factorization(tuple(entries), level)


def validate_factorization(F: Factorization, ladder: PrimeLadder) -> list[str]:
    """Return the violated conditions; an empty list means F is valid.

    Labels: ``"(i)"`` positivity, ``"(ii)"`` product, ``"(iii)"`` non-increasing
    maxima, ``"(iv)"`` coprimality, ``"level"`` for an out-of-range level.
    """
    problems = []
    entries = F.entries
    if any(e.num < 1 or e.den < 1 for e in entries):
        return ["(i)"]
    if not 0 <= F.level <= ladder.N:
        problems.append("level")
    elif F.product() != ladder.partials[F.level]:
        problems.append("(ii)")
    heights = [e.height for e in entries]
    if any(heights[i] < heights[i + 1] for i in range(len(heights) - 1)):
        problems.append("(iii)")
    if any(math.gcd(x.num, y.den) != 1 for x in entries for y in entries):
        problems.append("(iv)")
    return problems


def is_valid(F: Factorization, ladder: PrimeLadder) -> bool:
    return not validate_factorization(F, ladder)


def is_primitive(F: Factorization) -> bool:
    return all(e.height == 1 or is_probable_prime(e.height) for e in F.entries)


def _canonical_key(e: Fraction) -> tuple[int, int, int]:
    return (-e.height, -e.num, -e.den)


def canonicalize(F: Factorization) -> Factorization:
    """Sort entries by descending maximum, ties by descending numerator then denominator.

    On a factorization satisfying (iii) only tied blocks move.
    """
    return Factorization(tuple(sorted(F.entries, key=_canonical_key)), F.level)


def _canon(entries: Iterable[Fraction], level: int) -> Factorization:
    return Factorization(tuple(sorted(entries, key=_canonical_key)), level)


def _next_prime(A: Factorization, ladder: PrimeLadder) -> tuple[int, bool]:
    if A.level >= ladder.N:
        raise LevelExhausted(f"level {A.level} is already the top level N = {ladder.N}")
    if A.level < 0:
        raise InvalidInput(f"negative level {A.level}")
    n1 = A.level + 1
    return ladder.prime(n1), ladder.sign(n1) == NUM


def delta(A: Factorization, ladder: PrimeLadder) -> list[Factorization]:
    """Absorb the next prime into an existing entry without changing its maximum.

    For a numerator prime p, entry k qualifies when ``a_k * p < b_k``; for a
    denominator prime when ``b_k * p < a_k``.  Output is ordered by k and
    deduplicated.
    """
    p, on_num = _next_prime(A, ladder)
    out: list[Factorization] = []
    seen = set()
    entries = A.entries
    for k, (a, b) in enumerate(entries):
        if on_num:
            if a * p >= b:
                continue
            new = Fraction(a * p, b)
        else:
            if b * p >= a:
                continue
            new = Fraction(a, b * p)
        child = _canon(entries[:k] + (new,) + entries[k + 1:], A.level + 1)
        if child not in seen:
            seen.add(child)
            out.append(child)
    return out


def epsilon(A: Factorization, ladder: PrimeLadder) -> list[Factorization]:
    """Append the next prime as a new last entry (``p/1`` or ``1/p``)."""
    p, on_num = _next_prime(A, ladder)
    new = Fraction(p, 1) if on_num else Fraction(1, p)
    return [_canon(A.entries + (new,), A.level + 1)]


def children_delta(A: Factorization, ladder: PrimeLadder) -> list[Factorization]:
    """The union of :func:`delta` and :func:`epsilon`; delta children first."""
    out = delta(A, ladder)
    for child in epsilon(A, ladder):
        if child not in out:
            out.append(child)
    return out


def direct_subfactorizations(B: Factorization, ladder: PrimeLadder) -> list[Factorization]:
    """All valid A with ``A < B`` directly: remove one occurrence of ``p_level`` from one entry."""
    if B.level < 1:
        return []
    p = ladder.prime(B.level)
    on_num = ladder.sign(B.level) == NUM
    out: list[Factorization] = []
    for k, (a, b) in enumerate(B.entries):
        if on_num and a % p == 0:
            new = Fraction(a // p, b)
        elif not on_num and b % p == 0:
            new = Fraction(a, b // p)
        else:
            continue
        A = _canon(B.entries[:k] + (new,) + B.entries[k + 1:], B.level - 1)
        if A not in out and is_valid(A, ladder):
            out.append(A)
    return out


def is_direct_subfactorization(A: Factorization, B: Factorization, ladder: PrimeLadder) -> bool:
    """True iff A and B are valid, B sits one level above A, and B is A with
    ``p_{n+1}`` multiplied into exactly one entry (possibly a new trailing one)."""
    if B.level != A.level + 1:
        return False
    if not (is_valid(A, ladder) and is_valid(B, ladder)):
        return False
    p = ladder.prime(B.level)
    on_num = ladder.sign(B.level) == NUM
    target = canonicalize(B)
    padded = A.entries + (Fraction(1, 1),)
    for k, (a, b) in enumerate(padded):
        new = Fraction(a * p, b) if on_num else Fraction(a, b * p)
        if _canon(padded[:k] + (new,) + padded[k + 1:], B.level) == target:
            return True
    return False


def measure_vector(F: Factorization) -> tuple[int, ...]:
    """Entrywise ``max(a_i, b_i)`` with trailing 1s trimmed."""
    v = [e.height for e in F.entries]
    while v and v[-1] == 1:
        v.pop()
    return tuple(v)


def measure_equivalent(A: Factorization, B: Factorization) -> bool:
    return A.level == B.level and measure_vector(A) == measure_vector(B)


def _check_non_increasing(v: Sequence[int]) -> None:
    if any(v[i] < v[i + 1] for i in range(len(v) - 1)):
        raise InvalidInput(f"measure vector {tuple(v)} is not non-increasing")


def lex_compare(u: Sequence[int], v: Sequence[int]) -> int:
    """Compare padded measure vectors lexicographically; returns -1, 0 or 1."""
    _check_non_increasing(u)
    _check_non_increasing(v)
    for i in range(max(len(u), len(v))):
        x = u[i] if i < len(u) else 1
        y = v[i] if i < len(v) else 1
        if x != y:
            return -1 if x < y else 1
    return 0
