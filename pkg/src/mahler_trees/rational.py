"""Reduced positive rationals, integer factoring and the prime ladder.

The prime ladder of ``a/b`` lists every prime occurrence of ``a`` and ``b``
in non-increasing order together with the side it lives on.  Its partial
products ``alpha_0 = 1, alpha_1, ..., alpha_N = a/b`` index the levels of
every factorization tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .errors import InvalidInput, ParseError

NUM = "num"
DEN = "den"

TRIAL_DIVISION_LIMIT = 1 << 20
_SMALL_PRIME_BOUND = 1000
# Deterministic for n < 3.3 * 10**24; a strong probable-prime test above that.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

_RATIONAL_RE = re.compile(r"(\d+)(?:/(\d+))?")


@dataclass(frozen=True, order=False)
class ReducedRational:
    """A positive rational ``numerator/denominator`` in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        a, b = self.numerator, self.denominator
        if not isinstance(a, int) or not isinstance(b, int):
            raise InvalidInput(f"numerator and denominator must be integers, got {a!r}/{b!r}")
        if a < 1 or b < 1:
            raise InvalidInput(f"{a}/{b} is not a positive rational")
        g = math.gcd(a, b)
        if g != 1:
            object.__setattr__(self, "numerator", a // g)
            object.__setattr__(self, "denominator", b // g)

    def __mul__(self, other: ReducedRational) -> ReducedRational:
        return ReducedRational(self.numerator * other.numerator,
                               self.denominator * other.denominator)

    def __truediv__(self, other: ReducedRational) -> ReducedRational:
        return ReducedRational(self.numerator * other.denominator,
                               self.denominator * other.numerator)

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    @property
    def height(self) -> int:
        """Exact proxy for the Mahler measure: ``max(numerator, denominator)``."""
        return max(self.numerator, self.denominator)


ONE = ReducedRational(1, 1)


class LadderEntry(NamedTuple):
    prime: int
    sign: str  # NUM or DEN


@dataclass(frozen=True)
class PrimeLadder:
    alpha: ReducedRational
    entries: tuple[LadderEntry, ...]
    partials: tuple[ReducedRational, ...]

    @property
    def N(self) -> int:
        return len(self.entries)

    def prime(self, n: int) -> int:
        """The prime ``p_n`` (1-based, as in ``alpha_n = alpha_{n-1} * p_n^{+-1}``)."""
        return self.entries[n - 1].prime

    def sign(self, n: int) -> str:
        return self.entries[n - 1].sign

    def level_of(self, value: ReducedRational) -> int | None:
        """Return the n with ``partials[n] == value``, or None."""
        for n, partial in enumerate(self.partials):
            if partial == value:
                return n
        return None

    def describe(self) -> str:
        return " ".join(f"{e.prime}({e.sign})" for e in self.entries)


def parse_rational(text: str) -> ReducedRational:
    """Parse ``"a"`` or ``"a/b"`` (decimal digits only) into a reduced rational."""
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    m = _RATIONAL_RE.fullmatch(text)
    if m is None:
        raise ParseError(f"malformed rational {text!r}; expected <digits> or <digits>/<digits>")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) is not None else 1
    if a == 0 or b == 0:
        raise InvalidInput(f"{text!r}: numerator and denominator must be positive")
    return ReducedRational(a, b)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases; exact for every n below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """Return a non-trivial factor of the odd composite ``n`` (Brent's variant)."""
    c = 1
    while True:
        y, r, q = 2, 1, 1
        g = 1
        x = ys = y
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # batched gcd overshot; back up one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        c += 1


def _trial_divide(n: int, bound: int) -> tuple[list[int], int]:
    factors = []
    for p in (2, 3):
        while n % p == 0:
            factors.append(p)
            n //= p
    p = 5
    step = 2
    while p <= bound and p * p <= n:
        while n % p == 0:
            factors.append(p)
            n //= p
        p += step
        step = 6 - step
    return factors, n


def _factor_rest(n: int, out: list[int]) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out.append(n)
        return
    r = math.isqrt(n)
    if r * r == n:
        _factor_rest(r, out)
        _factor_rest(r, out)
        return
    d = _pollard_brent(n)
    _factor_rest(d, out)
    _factor_rest(n // d, out)


def factor_integer(n: int) -> list[int]:
    """Prime factors of ``n`` with multiplicity, in non-increasing order."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise InvalidInput(f"expected an integer, got {n!r}")
    if n < 1:
        raise InvalidInput(f"cannot factor {n}")
    if n < TRIAL_DIVISION_LIMIT:
        factors, rest = _trial_divide(n, TRIAL_DIVISION_LIMIT)
        if rest > 1:
            factors.append(rest)
    else:
        factors, rest = _trial_divide(n, _SMALL_PRIME_BOUND)
        _factor_rest(rest, factors)
    factors.sort(reverse=True)
    return factors


def prime_ladder(alpha: ReducedRational) -> PrimeLadder:
    entries = [LadderEntry(p, NUM) for p in factor_integer(alpha.numerator)]
    entries += [LadderEntry(p, DEN) for p in factor_integer(alpha.denominator)]
    # Equal primes never straddle both sides (gcd = 1), so the sign key only
    # makes the order total.
    entries.sort(key=lambda e: (-e.prime, e.sign != NUM))
    partials = [ONE]
    num, den = 1, 1
    for e in entries:
        if e.sign == NUM:
            num *= e.prime
        else:
            den *= e.prime
        partials.append(ReducedRational(num, den))
    return PrimeLadder(alpha, tuple(entries), tuple(partials))


def mahler_measure(x: ReducedRational) -> float:
    """``log max(a, b)`` for ``x = a/b``; exact proxy is ``x.height``."""
    return math.log(x.height)


def is_square_free(alpha: ReducedRational) -> bool:
    primes = [e.prime for e in prime_ladder(alpha).entries]
    return len(primes) == len(set(primes))


def p_adic_valuation(x: ReducedRational, p: int) -> int:
    v = 0
    a, b = x.numerator, x.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def separation_indices(alpha: ReducedRational) -> list[int]:
    """Levels n where every prime still to be placed is strictly below ``p_n``."""
    ladder = prime_ladder(alpha)
    N = ladder.N
    out = [0]
    for n in range(1, N):
        if ladder.prime(n) > ladder.prime(n + 1):
            out.append(n)
    if N > 0:
        out.append(N)
    return out


def is_separation_index_by_valuation(ladder: PrimeLadder, n: int) -> bool:
    """Direct check: for every prime p, ``alpha_n`` or ``alpha/alpha_n`` is a p-adic unit."""
    head = ladder.partials[n]
    tail = ladder.alpha / head
    for p in {e.prime for e in ladder.entries}:
        if p_adic_valuation(head, p) != 0 and p_adic_valuation(tail, p) != 0:
            return False
    return True


def iter_primes_below(bound: int) -> Iterator[int]:
    sieve = bytearray([1]) * bound
    sieve[:2] = b"\x00\x00"
    for i in range(2, math.isqrt(bound - 1) + 1 if bound > 1 else 0):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return (i for i in range(bound) if sieve[i])
