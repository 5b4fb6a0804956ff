"""Arbitrary-precision number-theoretic primitives.

Plain Python ints throughout.  All functions are pure and safe to call
concurrently from any number of threads.
"""

import math
import random

__all__ = [
    "FoundFactor",
    "NotInvertibleError",
    "legendre",
    "tonelli_shanks",
    "mod_inverse",
    "isqrt_ceil",
    "is_probable_prime",
    "is_perfect_power",
    "small_primes",
    "primes_below",
]


class NotInvertibleError(ValueError):
    """Raised by mod_inverse when gcd(a, m) != 1.

    The offending gcd is kept on the exception: when the modulus is the
    number being factored, a nontrivial gcd is a free divisor and the
    caller must be able to pick it up instead of treating it as failure.
    """

    def __init__(self, a: int, m: int, g: int):
        super().__init__(f"{a} is not invertible modulo {m} (gcd = {g})")
        self.gcd = g


class FoundFactor(Exception):
    """A nontrivial divisor fell out of a computation early.

    Used as control flow: whoever stumbles on a divisor (factor-base scan,
    cofactor gcd, failed inversion) raises, and the engine turns it into an
    early success.
    """

    def __init__(self, divisor: int):
        super().__init__(f"found nontrivial divisor {divisor}")
        self.divisor = divisor


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for an odd prime p: 0, 1 or -1.

    Euler's criterion; p is trusted to be prime.
    """
    if p <= 2 or p % 2 == 0:
        raise ValueError(f"modulus must be an odd prime, got {p}")
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def tonelli_shanks(n: int, p: int) -> int:
    """Smaller square root s of n modulo the odd prime p (0 <= s < p).

    The second root is p - s.  Raises ValueError when n is a non-residue.
    """
    if p <= 2 or p % 2 == 0:
        raise ValueError(f"modulus must be an odd prime, got {p}")
    n %= p
    if n == 0:
        return 0
    if legendre(n, p) != 1:
        raise ValueError(f"{n} has no square root modulo {p}")
    if p % 4 == 3:
        s = pow(n, (p + 1) // 4, p)
        return min(s, p - s)
    # p = 1 mod 4: full Tonelli-Shanks with p - 1 = q * 2^e, q odd
    q, e = p - 1, 0
    while q % 2 == 0:
        q //= 2
        e += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c = e, pow(z, q, p)
    t, r = pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return min(r, p - r)


def mod_inverse(a: int, m: int) -> int:
    """Inverse of a modulo m (extended Euclid); raises NotInvertibleError
    carrying the gcd when a and m are not coprime."""
    if m <= 1:
        raise ValueError(f"modulus must exceed 1, got {m}")
    a %= m
    r0, r1, s0, s1 = m, a, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        raise NotInvertibleError(a, m, r0)
    return s0 % m


def isqrt_ceil(n: int) -> int:
    """ceil(sqrt(n)), exactly."""
    if n < 0:
        raise ValueError("negative argument")
    r = math.isqrt(n)
    return r if r * r == n else r + 1


# Deterministic Miller-Rabin witness sets (thresholds are exclusive).
_WITNESS_LADDER = (
    (2047, (2,)),
    (1373653, (2, 3)),
    (9080191, (31, 73)),
    (25326001, (2, 3, 5)),
    (3215031751, (2, 3, 5, 7)),
    (4759123141, (2, 7, 61)),
    (1122004669633, (2, 13, 23, 1662803)),
    (2152302898747, (2, 3, 5, 7, 11)),
    (3474749660383, (2, 3, 5, 7, 11, 13)),
    (341550071728321, (2, 3, 5, 7, 11, 13, 17)),
    (3825123056546413051, (2, 3, 5, 7, 11, 13, 17, 19, 23)),
    (318665857834031151167461, (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)),
    (3317044064679887385961981, (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)),
)

_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _miller_rabin(n: int, bases) -> bool:
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin primality check.

    Deterministic below 3.3e24 via known witness sets; above that, 40
    pseudo-random bases seeded from n itself, so the verdict is stable
    across runs.
    """
    if n < 2:
        return False
    for p in _TRIAL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    for threshold, bases in _WITNESS_LADDER:
        if n < threshold:
            return _miller_rabin(n, bases)
    rng = random.Random(n)
    return _miller_rabin(n, [rng.randrange(2, n - 1) for _ in range(40)])


def _iroot(n: int, e: int) -> int:
    """floor(n ** (1/e)) by integer Newton iteration."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + e - 1) // e)
    while True:
        y = ((e - 1) * x + n // x ** (e - 1)) // e
        if y >= x:
            return x
        x = y


def is_perfect_power(n: int):
    """Return (b, e) with b**e == n and e >= 2 maximal, or None."""
    if n < 4:
        return None
    for e in range(n.bit_length(), 1, -1):
        b = _iroot(n, e)
        if b >= 2 and b ** e == n:
            return b, e
    return None


def primes_below(limit: int) -> list[int]:
    """All primes < limit, ascending (Eratosthenes)."""
    if limit <= 2:
        return []
    sieve = bytearray((1,)) * limit
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit - 1) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit, i)))
    return [i for i, keep in enumerate(sieve) if keep]


def small_primes(count: int) -> list[int]:
    """The first `count` primes, ascending."""
    if count < 1:
        raise ValueError("count must be positive")
    if count < 6:
        return primes_below(14)[:count]
    # Rosser: p_n < n*(ln n + ln ln n) for n >= 6
    bound = count * (math.log(count) + math.log(math.log(count)))
    primes = primes_below(int(bound) + 2)
    while len(primes) < count:
        bound *= 1.3
        primes = primes_below(int(bound) + 2)
    return primes[:count]
