"""Curves y^2 = x(x - e1)(x + e2) with e1 + e2 + e3 = 0, their twists and companions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .arith import factorize, is_square, is_squarefree, squarefree_part, valuation


class ParityCase(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"
    GENERAL = "general"


@dataclass(frozen=True)
class CurveTriple:
    e1: int
    e2: int
    e3: int

    def __post_init__(self):
        if 0 in (self.e1, self.e2, self.e3):
            raise ValueError("coefficients must be nonzero")
        if self.e1 + self.e2 + self.e3 != 0:
            raise ValueError("e1 + e2 + e3 must vanish")

    def __iter__(self):
        return iter((self.e1, self.e2, self.e3))

    def __str__(self) -> str:
        return f"({self.e1},{self.e2},{self.e3})"

    @property
    def e(self) -> tuple[int, int, int]:
        return self.e1, self.e2, self.e3

    @property
    def product(self) -> int:
        return self.e1 * self.e2 * self.e3

    @property
    def parity_case(self) -> ParityCase:
        v = tuple(valuation(x, 2) for x in self.e)
        if v == (0, 0, 1):
            return ParityCase.ODD
        if v[0] == 1 and v[1] == 1 and v[2] >= 2:
            return ParityCase.EVEN
        return ParityCase.GENERAL

    def twist(self, m: int) -> "CurveTriple":
        return CurveTriple(self.e1 * m, self.e2 * m, self.e3 * m)

    def companion_curve(self, a: int, b: int, c: int) -> "CurveTriple":
        """The curve with coefficients (e1 a^2, e2 b^2, e3 c^2)."""
        return CurveTriple(self.e1 * a * a, self.e2 * b * b, self.e3 * c * c)

    def rotations(self) -> list["CurveTriple"]:
        e1, e2, e3 = self.e
        return [self, CurveTriple(e2, e3, e1), CurveTriple(e3, e1, e2)]


def normalize(e1: int, e2: int, e3: int) -> CurveTriple:
    """Rotate so that the 2-adic valuation of e3 is maximal."""
    if 0 in (e1, e2, e3):
        raise ValueError("coefficients must be nonzero")
    if e1 + e2 + e3 != 0:
        raise ValueError("e1 + e2 + e3 must vanish")
    if math.gcd(math.gcd(e1, e2), e3) > 2:
        raise ValueError("gcd(e1, e2, e3) must be 1 or 2")
    best = None
    for rot in CurveTriple(e1, e2, e3).rotations():
        v = valuation(rot.e3, 2)
        if best is None or v > best[0]:
            best = (v, rot)
    return best[1]


def has_order4_point(c: CurveTriple) -> bool:
    """True iff one of (-e1, e2), (-e2, e3), (-e3, e1) is a pair of squares."""
    e1, e2, e3 = c.e
    return any(is_square(x) and is_square(y) for x, y in ((-e1, e2), (-e2, e3), (-e3, e1)))


@dataclass(frozen=True)
class TwistParam:
    n: int
    primes: tuple[int, ...]

    @classmethod
    def of(cls, n: int) -> "TwistParam":
        if n <= 0 or n % 2 == 0 or not is_squarefree(n):
            raise ValueError(f"{n} is not a positive odd square-free integer")
        return cls(n, factorize(n).primes)

    @property
    def k(self) -> int:
        return len(self.primes)


def as_twist(n) -> TwistParam:
    return n if isinstance(n, TwistParam) else TwistParam.of(int(n))


Lambda = tuple[int, int, int]


def lambda_mul(x: Lambda, y: Lambda) -> Lambda:
    """Component-wise product in square classes."""
    return tuple(squarefree_part(a * b) for a, b in zip(x, y))  # type: ignore[return-value]


def torsion_images(c: CurveTriple, n) -> list[Lambda]:
    """Images of O, (e1 n, 0), (-e2 n, 0), (0, 0) on the n-twist, as square-free triples."""
    n = as_twist(n).n
    e1, e2, e3 = c.e
    raw = [
        (1, 1, 1),
        (-e3 * n, -e1 * e3, e1 * n),
        (-e2 * e3, e3 * n, -e2 * n),
        (e2 * n, -e1 * n, -e1 * e2),
    ]
    return [tuple(squarefree_part(x) for x in t) for t in raw]  # type: ignore[misc]


@dataclass(frozen=True)
class CompanionTriple:
    a: int
    b: int
    c: int

    def __iter__(self):
        return iter((self.a, self.b, self.c))


def sign_normalize(a: int, b: int, c: int) -> CompanionTriple:
    """Flip signs so that every entry is 1 mod 4."""
    def fix(x: int) -> int:
        if x % 2 == 0:
            raise ValueError("companion entries must be odd")
        return x if x % 4 == 1 else -x

    return CompanionTriple(fix(a), fix(b), fix(c))


def is_companion(c: CurveTriple, a: int, b: int, cc: int) -> bool:
    return (
        c.e1 * a * a + c.e2 * b * b + c.e3 * cc * cc == 0
        and a % 2 == 1
        and b % 2 == 1
        and cc % 2 == 1
        and math.gcd(math.gcd(a, b), cc) == 1
    )


def find_companions(c: CurveTriple, bound: int) -> list[CompanionTriple]:
    """Primitive odd solutions of e1 a^2 + e2 b^2 + e3 c^2 = 0 with entries up to ``bound``."""
    e1, e2, e3 = c.e
    found = set()
    for a in range(1, bound + 1, 2):
        for b in range(1, bound + 1, 2):
            num = -(e1 * a * a + e2 * b * b)
            if num % e3:
                continue
            sq = num // e3
            if not is_square(sq):
                continue
            cc = math.isqrt(sq)
            if cc > bound or cc % 2 == 0:
                continue
            if math.gcd(math.gcd(a, b), cc) != 1:
                continue
            found.add(sign_normalize(a, b, cc))
    return sorted(found, key=lambda t: (abs(t.a) + abs(t.b) + abs(t.c), abs(t.a), abs(t.b)))
