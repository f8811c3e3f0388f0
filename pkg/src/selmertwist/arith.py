"""Exact integer arithmetic and quadratic symbols.

Places are written as the string ``INF`` for the real place and as the prime
itself (``2`` or an odd prime) for the finite ones.  Hilbert symbols are
returned additively, as bits ``b`` with ``(a, b)_v = (-1)**b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from sympy import factorint, isprime
from sympy.ntheory import sqrt_mod

INF = "inf"

Place = Union[int, str]
Rational = Union[int, Fraction]


@dataclass(frozen=True)
class Factorization:
    value: int
    sign: int
    prime_powers: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.prime_powers)


@lru_cache(maxsize=1 << 16)
def factorize(m: int) -> Factorization:
    """Factor a nonzero integer into sign and sorted prime powers."""
    if m == 0:
        raise ValueError("cannot factor zero")
    if abs(m) >= 1 << 96:
        raise ValueError("input beyond desk scale (|m| >= 2**96)")
    sign = 1 if m > 0 else -1
    pp = tuple(sorted(factorint(abs(m)).items()))
    return Factorization(m, sign, pp)


def prime_factors(m: int) -> tuple[int, ...]:
    return factorize(m).primes


def odd_prime_factors(m: int) -> tuple[int, ...]:
    return tuple(p for p in factorize(m).primes if p != 2)


def valuation(m: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if m == 0:
        raise ValueError("valuation of zero")
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def is_square(m: int) -> bool:
    return m >= 0 and math.isqrt(m) ** 2 == m


def is_squarefree(m: int) -> bool:
    return m != 0 and all(e == 1 for _, e in factorize(m).prime_powers)


def squarefree_part(m: Rational) -> int:
    """Square-free integer in the same class as ``m`` modulo nonzero squares."""
    if isinstance(m, Fraction) and m.denominator != 1:
        # factoring numerator and denominator apart is much cheaper than their product
        a, b = squarefree_part(m.numerator), squarefree_part(m.denominator)
        g = math.gcd(a, b)
        return (a // g) * (b // g)
    m = _to_int_class(m)
    f = factorize(m)
    out = f.sign
    for p, e in f.prime_powers:
        if e & 1:
            out *= p
    return out


def _to_int_class(x: Rational) -> int:
    # num/den and num*den differ by the square den**2
    if isinstance(x, Fraction):
        if x == 0:
            raise ValueError("zero has no square class")
        return x.numerator * x.denominator
    if x == 0:
        raise ValueError("zero has no square class")
    return int(x)


def jacobi(a: int, b: int) -> int:
    """Jacobi symbol (a/b) for odd b > 0; 0 when gcd(a, b) > 1."""
    if b <= 0 or b % 2 == 0:
        raise ValueError("jacobi symbol needs a positive odd modulus")
    a %= b
    acc = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if b % 8 in (3, 5):
                acc = -acc
        a, b = b, a
        if a % 4 == 3 and b % 4 == 3:
            acc = -acc
        a %= b
    return acc if b == 1 else 0


def legendre_bit(a: int, p: int) -> int:
    """Additive Legendre symbol for a unit ``a`` modulo the odd prime ``p``."""
    s = jacobi(a, p)
    if s == 0:
        raise ValueError(f"{a} is not a unit modulo {p}")
    return 0 if s == 1 else 1


def _split(x: int, p: int) -> tuple[int, int]:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v, x


def hilbert_additive(alpha: Rational, beta: Rational, v: Place) -> int:
    """Additive Hilbert symbol [alpha, beta]_v."""
    a = _to_int_class(alpha)
    b = _to_int_class(beta)
    if v == INF:
        return 1 if (a < 0 and b < 0) else 0
    p = int(v)
    va, ua = _split(a, p)
    vb, ub = _split(b, p)
    if p == 2:
        eps_a = (ua % 4) // 2
        eps_b = (ub % 4) // 2
        om_a = 1 if ua % 8 in (3, 5) else 0
        om_b = 1 if ub % 8 in (3, 5) else 0
        return (eps_a * eps_b + va * om_b + vb * om_a) & 1
    bit = (va * vb * ((p - 1) // 2)) & 1
    if vb & 1:
        bit ^= legendre_bit(ua, p)
    if va & 1:
        bit ^= legendre_bit(ub, p)
    return bit


def hilbert(alpha: Rational, beta: Rational, v: Place) -> int:
    """Multiplicative Hilbert symbol (alpha, beta)_v in {+1, -1}."""
    return -1 if hilbert_additive(alpha, beta, v) else 1


def additive_jacobi(alpha: int, beta: int) -> int:
    """Sum of [alpha, beta]_p over the primes p dividing beta."""
    if beta <= 0:
        raise ValueError("additive jacobi symbol needs beta > 0")
    if math.gcd(alpha, beta) != 1:
        raise ValueError(f"{alpha} and {beta} are not coprime")
    bit = 0
    for p, e in factorize(beta).prime_powers:
        if p == 2:
            raise ValueError("additive jacobi symbol needs odd beta")
        if e & 1:
            bit ^= legendre_bit(alpha, p)
    return bit


def m_star(m: int) -> int:
    """The sign twist of an odd m that is 1 mod 4."""
    if m % 2 == 0:
        raise ValueError("m_star needs an odd integer")
    return m if m % 4 == 1 else -m


def bad_places(m: int) -> list[Place]:
    """INF, 2 and the odd primes of m, in that order."""
    return [INF, 2] + list(odd_prime_factors(m)) if m else [INF, 2]


def square_class(x: Rational, p: int) -> tuple[int, int]:
    """Class of x in Q_p^x / Q_p^x2 as (valuation parity, unit class).

    The unit class is the Legendre bit for odd p and the residue mod 8 for p = 2.
    """
    n = _to_int_class(x)
    v, u = _split(n, p)
    if p == 2:
        return v & 1, u % 8
    return v & 1, legendre_bit(u, p)


def class_representative(x: Rational, p: int) -> int:
    """Small positive-or-signed integer with the same Q_p square class as x."""
    par, unit = square_class(x, p)
    base = p if par else 1
    if p == 2:
        return base * unit
    return base * (1 if unit == 0 else smallest_nonresidue(p))


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    for r in range(2, p):
        if jacobi(r, p) == -1:
            return r
    raise ValueError(f"no nonresidue modulo {p}")


def is_local_square(x: Rational, p: int) -> bool:
    if p == INF:
        return x > 0
    par, unit = square_class(x, p)
    return par == 0 and (unit == 1 if p == 2 else unit == 0)


@lru_cache(maxsize=256)
def sqrt_table(p: int) -> dict[int, tuple[int, ...]]:
    """All square roots modulo a small odd prime, keyed by residue."""
    table: dict[int, list[int]] = {}
    for x in range(p):
        table.setdefault(x * x % p, []).append(x)
    return {k: tuple(v) for k, v in table.items()}


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """Some square root of a modulo the odd prime p, or None."""
    a %= p
    if p < 5000:
        roots = sqrt_table(p).get(a)
        return roots[0] if roots else None
    if a == 0:
        return 0
    if jacobi(a, p) != 1:
        return None

    return int(sqrt_mod(a, p))


def divisors_signed(m: int) -> list[int]:
    """All positive and negative divisors of m, sorted by absolute value."""
    ds = [1]
    for p, e in factorize(m).prime_powers:
        ds = [d * p**k for d in ds for k in range(e + 1)]
    ds.sort()
    return [s * d for d in ds for s in (1, -1)]


def is_prime(p: int) -> bool:
    return bool(isprime(p))
