"""Factor bases for the polynomial f(x) = (x + ceil(sqrt(N)))**2 - N.

The factor base keeps 2 plus every odd prime p among the first 2m primes
with (N|p) = 1 (for the others f has no root, so they can never divide a
candidate value).  Each kept odd prime carries the two roots of f mod p.
The small factor base is the prefix of the first n odd primes; its
products form the moduli of the subsum search.
"""

from dataclasses import dataclass

from .numtheory import (
    FoundFactor,
    is_perfect_power,
    is_probable_prime,
    isqrt_ceil,
    legendre,
    small_primes,
    tonelli_shanks,
)

__all__ = [
    "FactorBase",
    "SmallFactorBase",
    "poly_value",
    "table_sizes",
    "build_factor_bases",
]


def poly_value(x: int, n: int, shift: int) -> int:
    """f(x) = (x + shift)**2 - n, with shift = ceil(sqrt(n))."""
    t = x + shift
    return t * t - n


@dataclass(frozen=True, eq=False)
class FactorBase:
    """Ordered factor base: primes[0] == 2, then odd primes with roots."""

    primes: tuple[int, ...]
    roots: dict  # odd prime -> (s1, s2) with f(s) = 0 mod p
    m: int  # requested target size

    @property
    def odd_primes(self) -> tuple[int, ...]:
        return self.primes[1:]

    def large_primes(self, n: int) -> tuple[int, ...]:
        """The odd primes beyond the first n (the collision primes)."""
        return self.primes[1 + n :]

    @property
    def p_max(self) -> int:
        return self.primes[-1]


@dataclass(frozen=True, eq=False)
class SmallFactorBase:
    """The first n odd primes of the parent factor base."""

    primes: tuple[int, ...]
    n: int


# (max_digits, m, n) tiers; the 75-77 digit gap is folded into the next
# higher tier, and anything beyond the table reuses the last row.
_SIZE_TABLE = (
    (18, 60, 12),
    (25, 150, 30),
    (34, 200, 40),
    (36, 300, 60),
    (38, 400, 80),
    (40, 500, 100),
    (42, 600, 120),
    (44, 700, 140),
    (48, 1000, 200),
    (52, 1200, 240),
    (56, 2000, 400),
    (60, 4000, 800),
    (66, 6000, 1200),
    (74, 10000, 2000),
    (80, 30000, 6000),
    (88, 50000, 10000),
    (94, 60000, 12000),
    (100, 100000, 20000),
)


def table_sizes(digit_count: int) -> tuple[int, int]:
    """Default factor-base sizes (m, n) for an input with that many digits."""
    if digit_count < 1:
        raise ValueError("digit count must be positive")
    for max_digits, m, n in _SIZE_TABLE:
        if digit_count <= max_digits:
            return m, n
    return _SIZE_TABLE[-1][1], _SIZE_TABLE[-1][2]


def build_factor_bases(n: int, m: int, small_n: int):
    """Scan the first 2m primes and build (FactorBase, SmallFactorBase).

    Odd primes with (n|p) != 1 are dropped; on average about half survive,
    so the base ends up near the target size m.  If any scanned prime
    divides n outright, FoundFactor is raised immediately -- that prime is
    a much cheaper answer than anything the search could produce.
    """
    if n % 2 == 0:
        raise ValueError("input must be odd")
    if is_probable_prime(n):
        raise ValueError("input is prime")
    if is_perfect_power(n):
        raise ValueError("input is a perfect power")
    shift = isqrt_ceil(n)
    kept = [2]
    roots = {}
    for p in small_primes(2 * m)[1:]:
        a = n % p
        if a == 0:
            raise FoundFactor(p)
        if legendre(a, p) != 1:
            continue
        s = tonelli_shanks(a, p)
        r1 = (s - shift) % p
        r2 = (-s - shift) % p
        if poly_value(r1, n, shift) % p or poly_value(r2, n, shift) % p:
            raise AssertionError(f"bad root pair for p={p}")  # unreachable
        kept.append(p)
        roots[p] = (r1, r2)
    n_eff = min(small_n, len(kept) - 1)
    fb = FactorBase(tuple(kept), roots, m)
    sb = SmallFactorBase(tuple(kept[1 : 1 + n_eff]), n_eff)
    return fb, sb
