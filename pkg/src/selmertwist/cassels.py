"""The Cassels pairing on pure 2-Selmer groups.

For Lambda in the Selmer group each conic H_i has a rational point Q_i; the
pairing sums [L_i(P_v), d_i']_v over the bad places, where L_i is the tangent
line at Q_i and P_v is any local point of D_Lambda.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .arith import (
    INF,
    Place,
    bad_places,
    hilbert_additive,
    is_local_square,
    jacobi,
    odd_prime_factors,
    squarefree_part,
    valuation,
)
from .curves import CompanionTriple, CurveTriple, Lambda, as_twist, sign_normalize, torsion_images
from .descent import HomogeneousSpace, InconclusiveError, default_depth, local_search, solvable_real
from .f2linalg import F2Matrix, rank
from .selmer import SelmerBasis, pure_selmer


class LocalPointError(RuntimeError):
    """No local point with well-determined line values was found."""


class LemmaViolation(AssertionError):
    pass


# -- conics ------------------------------------------------------------------


@dataclass(frozen=True)
class ConicSolution:
    coeffs: tuple[int, int, int]
    point: tuple[int, int, int]

    def __post_init__(self):
        if not any(self.point):
            raise ValueError("trivial point")
        if sum(a * x * x for a, x in zip(self.coeffs, self.point)) != 0:
            raise ValueError(f"{self.point} is not on the conic {self.coeffs}")


def _primitive(v) -> tuple[int, ...]:
    g = reduce(math.gcd, v)
    v = tuple(x // g for x in v)
    # fix the sign so the first nonzero entry is positive
    first = next(x for x in v if x)
    return tuple(-x for x in v) if first < 0 else v


def conic_solvable(A: int, B: int, C: int) -> bool:
    """Legendre's criterion: (-AC, -BC)_v = 1 at every place."""
    alpha, beta = -A * C, -B * C
    return all(hilbert_additive(alpha, beta, v) == 0 for v in bad_places(2 * A * B * C))


def _reduce(A: int, B: int, C: int):
    """Square-free, pairwise coprime coefficients and the variable scalings back."""
    coeffs = [A, B, C]
    scale = [Fraction(1)] * 3
    changed = True
    while changed:
        changed = False
        g = reduce(math.gcd, coeffs)
        if g > 1:
            coeffs = [x // g for x in coeffs]
        for i in range(3):
            sf = squarefree_part(coeffs[i])
            if sf != coeffs[i]:
                s = math.isqrt(coeffs[i] // sf)
                coeffs[i] = sf
                scale[i] /= s  # original x_i = X_i / s
                changed = True
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            g = math.gcd(coeffs[i], coeffs[j])
            if g > 1:
                # g | C_k z^2 forces g | z
                coeffs[i] //= g
                coeffs[j] //= g
                coeffs[k] *= g
                scale[k] *= g
                changed = True
                break
    return tuple(coeffs), scale


def _box_search(a: int, b: int, c: int, limit: int):
    bounds = [math.isqrt(abs(b * c)), math.isqrt(abs(a * c)), math.isqrt(abs(a * b))]
    coeffs = [a, b, c]
    # enumerate the two smallest ranges, solve for the third
    order = sorted(range(3), key=lambda i: bounds[i])
    i, j, k = order
    if (bounds[i] + 1) * (bounds[j] + 1) > limit:
        return None
    for xi in range(bounds[i] + 1):
        for xj in range(bounds[j] + 1):
            if xi == xj == 0:
                continue
            num = -(coeffs[i] * xi * xi + coeffs[j] * xj * xj)
            if num % coeffs[k]:
                continue
            sq = num // coeffs[k]
            if sq < 0:
                continue
            r = math.isqrt(sq)
            if r * r == sq:
                out = [0, 0, 0]
                out[i], out[j], out[k] = xi, xj, r
                return out
    return None


def _sympy_search(a: int, b: int, c: int):
    from sympy.abc import x, y, z
    from sympy.solvers.diophantine.diophantine import diop_ternary_quadratic_normal

    sol = diop_ternary_quadratic_normal(a * x**2 + b * y**2 + c * z**2)
    if sol[0] is None:
        return None
    return [int(s) for s in sol]


def solve_conic(A: int, B: int, C: int, limit: int = 200_000) -> ConicSolution | None:
    """A primitive point on A x^2 + B y^2 + C z^2 = 0, or None if there is none."""
    if 0 in (A, B, C):
        raise ValueError("coefficients must be nonzero")
    if not conic_solvable(A, B, C):
        return None
    (a, b, c), scale = _reduce(A, B, C)
    pt = _box_search(a, b, c, limit) or _sympy_search(a, b, c)
    if pt is None:
        raise RuntimeError(f"solvable conic {(A, B, C)} but no point found")
    frac = [s * p for s, p in zip(scale, pt)]
    den = math.lcm(*(f.denominator for f in frac))
    ints = _primitive([int(f * den) for f in frac])
    return ConicSolution((A, B, C), ints)


def other_conic_point(sol: ConicSolution, direction) -> ConicSolution | None:
    """Second intersection of the conic with the line through sol.point along ``direction``."""
    A = sol.coeffs
    Q = sol.point
    fd = sum(a * d * d for a, d in zip(A, direction))
    bqd = sum(a * q * d for a, q, d in zip(A, Q, direction))
    if fd == 0:
        return None
    new = [fd * q - 2 * bqd * d for q, d in zip(Q, direction)]
    if not any(new):
        return None
    return ConicSolution(sol.coeffs, _primitive(new))


def random_conic_point(sol: ConicSolution, rng: random.Random, height: int = 6) -> ConicSolution:
    for _ in range(100):
        d = [rng.randint(-height, height) for _ in range(3)]
        new = other_conic_point(sol, d)
        if new is not None and new.point != sol.point:
            return new
    return sol


# -- tangent lines -------------------------------------------------------------

# variables of conic i inside (t, u1, u2, u3)
CONIC_VARS = {1: (0, 2, 3), 2: (0, 3, 1), 3: (0, 1, 2)}


@dataclass(frozen=True)
class TangentLine:
    coeffs: tuple[int, int, int]
    variables: tuple[int, int, int] = (0, 1, 2)

    def __call__(self, point):
        return sum(c * point[j] for c, j in zip(self.coeffs, self.variables))

    def on_conic_point(self, pt) -> int:
        return sum(c * x for c, x in zip(self.coeffs, pt))


def tangent_line(sol: ConicSolution, variables=(0, 1, 2)) -> TangentLine:
    grad = [a * s for a, s in zip(sol.coeffs, sol.point)]
    g = reduce(math.gcd, grad)
    return TangentLine(tuple(x // g for x in grad), tuple(variables))


def conic_coeffs(D: HomogeneousSpace, i: int) -> tuple[int, int, int]:
    """H_i restricted to its own three variables, in the order of CONIC_VARS."""
    e = D.twisted
    d = D.lam
    k = i - 1
    return (e[k], d[(k + 1) % 3], -d[(k + 2) % 3])


def descent_conics(D: HomogeneousSpace, rng: random.Random | None = None) -> list[ConicSolution]:
    out = []
    for i in (1, 2, 3):
        sol = solve_conic(*conic_coeffs(D, i))
        if sol is None:
            raise ValueError(f"H{i} of {D.lam} has no rational point")
        if rng is not None:
            sol = random_conic_point(sol, rng)
        out.append(sol)
    return out


def descent_lines(D: HomogeneousSpace, rng: random.Random | None = None,
                  conics: list[ConicSolution] | None = None) -> list[TangentLine]:
    conics = conics or descent_conics(D, rng)
    return [tangent_line(s, CONIC_VARS[i]) for i, s in zip((1, 2, 3), conics)]


def companion_lines(c: CurveTriple, n, comp: CompanionTriple, lam: Lambda,
                    base: list[ConicSolution] | None = None) -> list[TangentLine]:
    """Lines on the companion's D_Lambda built from points (alpha, beta, gamma) of E's conics.

    The companion conic i has the point (alpha_i, s beta_i, s gamma_i) with s = a, b, c.
    """
    D = HomogeneousSpace.make(c, n, lam)
    base = base or descent_conics(D)
    tp = as_twist(n)
    d = lam
    out = []
    for k, (s, sol) in enumerate(zip(comp, base)):
        alpha, beta, gamma = sol.point
        coeffs = (c.e[k] * s * tp.n * alpha, d[(k + 1) % 3] * beta, -d[(k + 2) % 3] * gamma)
        g = reduce(math.gcd, coeffs)
        out.append(TangentLine(tuple(x // g for x in coeffs), CONIC_VARS[k + 1]))
    return out


# -- local points -----------------------------------------------------------------


@dataclass
class LocalPoint:
    place: Place
    precision: int | None
    coords: tuple
    values: tuple = ()

    def symbol(self, i: int, d: int) -> int:
        return hilbert_additive(self.values[i], d, self.place)


def _real_sign(terms) -> int:
    """Sign of sum m * sqrt(q) for integers m and rationals q >= 0, exactly."""
    terms = [(m, Fraction(q)) for m, q in terms if m and q]
    if not terms:
        return 0
    L = math.lcm(*(q.denominator for _, q in terms))
    ints = [(m * (L // q.denominator), q.numerator * q.denominator) for m, q in terms]
    if all(math.isqrt(N) ** 2 == N for _, N in ints):
        s = sum(m * math.isqrt(N) for m, N in ints)
        return (s > 0) - (s < 0)
    for bits in range(16, 1024, 32):
        sc = 1 << (2 * bits)
        lo = hi = 0
        for m, N in ints:
            r = math.isqrt(N * sc)
            exact = r * r == N * sc
            a, b = (m * r, m * r) if exact else (m * r, m * (r + 1))
            lo += min(a, b)
            hi += max(a, b)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
    return 0


def _real_candidates(D: HomogeneousSpace, rng: random.Random | None):
    e1, e2, _ = D.twisted
    roots = sorted({0, e1, -e2})
    xs = []
    for r in roots:
        xs += [Fraction(r), Fraction(r) - 1, Fraction(r) + 1]
    for a, b in zip(roots, roots[1:]):
        xs += [Fraction(a + b, 2), Fraction(2 * a + b, 3), Fraction(a + 2 * b, 3)]
    span = max(1, roots[-1] - roots[0])
    xs += [Fraction(roots[0] - 7 * span), Fraction(roots[-1] + 7 * span)]
    if rng is not None:
        rng.shuffle(xs)
        extra = [Fraction(rng.randint(-50 * span, 50 * span), rng.randint(1, 40)) + roots[0]
                 for _ in range(40)]
        xs = extra + xs
    return xs


def _real_point(D: HomogeneousSpace, lines, rng: random.Random | None) -> LocalPoint:
    if not solvable_real(D):
        raise LocalPointError(f"{D.lam} has no real point")
    e1, e2, _ = D.twisted
    d1, d2, d3 = D.lam
    # radicands of (t, u1, u2, u3); t itself is 0 or 1
    pts = []
    if d1 > 0 and d2 > 0 and d3 > 0:
        pts.append((Fraction(0), Fraction(1, d1), Fraction(1, d2), Fraction(1, d3)))
    for x in _real_candidates(D, rng):
        rad = (Fraction(x + e2, d1), Fraction(x - e1, d2), Fraction(x, d3))
        if all(r >= 0 for r in rad):
            pts.append((Fraction(1),) + rad)
    if rng is not None:
        rng.shuffle(pts)
    for rads in pts:
        signs = [1] * 4 if rng is None else [1] + [rng.choice((1, -1)) for _ in range(3)]
        vals = []
        for L in lines:
            terms = [(c * signs[j], rads[j]) for c, j in zip(L.coeffs, L.variables)]
            vals.append(_real_sign(terms))
        if all(vals):
            coords = tuple((s, r) for s, r in zip(signs, rads))
            return LocalPoint(INF, None, coords, tuple(vals))
    raise LocalPointError(f"no real point of {D.lam} off the tangent lines")


def _vp(x: int, p: int) -> float:
    return float("inf") if x == 0 else valuation(x, p)


def newton_lift(D: HomogeneousSpace, p: int, center, cols, target: int):
    """Refine an approximate point until it is known modulo p**target.

    Returns (coords, precision): the true point agrees with coords modulo
    p**precision in every coordinate.
    """
    f = (D.quadric(1), D.quadric(2))
    x = list(center)
    i, j = cols
    for _ in range(200):
        F = [sum(a * xx * xx for a, xx in zip(q, x)) for q in f]
        J = [[2 * q[i] * x[i], 2 * q[j] * x[j]] for q in f]
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        e = _vp(det, p)
        vF = min(_vp(F[0], p), _vp(F[1], p))
        if vF == float("inf"):
            return x, target
        if vF <= 2 * e:
            raise RuntimeError("lost the Hensel condition while lifting")
        prec = int(vF - e)
        if prec >= target:
            return x, prec
        e = int(e)
        M = p ** (target + 2 * e + 4)
        pe = p**e
        unit_inv = pow(det // pe, -1, M)
        n0 = J[1][1] * F[0] - J[0][1] * F[1]
        n1 = -J[1][0] * F[0] + J[0][0] * F[1]
        x[i] = (x[i] - (n0 // pe) * unit_inv) % M
        x[j] = (x[j] - (n1 // pe) * unit_inv) % M
    raise RuntimeError("Newton lifting did not converge")


def _finite_point(D: HomogeneousSpace, p: int, lines, rng: random.Random | None,
                  precision: int | None, tries: int = 6) -> LocalPoint:
    depth = default_depth(D, p)
    slack = 3 if p == 2 else 1
    target = precision or max(2 * depth, 16)
    for _ in range(5):
        for attempt in range(tries):
            r = rng if rng is not None else (None if attempt == 0 else random.Random(attempt))
            found = local_search(D, p, depth, rng=r)
            if found is None:
                raise LocalPointError(f"{D.lam} has no point over Q_{p}")
            center = found.center
            if attempt:
                # shifting the free coordinates by multiples of p^(2e+1) keeps the
                # Hensel certificate, and moves us off any rational point we hit
                rr = r or random.Random(attempt)
                step = p ** (2 * found.minor_val + 1)
                center = tuple(
                    x if k in found.cols else x + step * rr.randrange(1, 4 * p)
                    for k, x in enumerate(center)
                )
            x, prec = newton_lift(D, p, center, found.cols, target)
            vals = tuple(L(x) for L in lines)
            if all(v != 0 and valuation(v, p) + slack <= prec and valuation(v, p) <= prec // 2
                   for v in vals):
                return LocalPoint(p, prec, tuple(x), vals)
        target *= 2
    raise LocalPointError(f"line values of {D.lam} undetermined at {p}")


def find_local_point(D: HomogeneousSpace, v: Place, lines, precision: int | None = None,
                     rng: random.Random | None = None) -> LocalPoint:
    if v == INF:
        return _real_point(D, lines, rng)
    return _finite_point(D, int(v), lines, rng, precision)


def pairing_places(c: CurveTriple, n) -> list[Place]:
    return [INF, 2] + sorted(set(odd_prime_factors(abs(c.product) * as_twist(n).n)))


# -- the pairing --------------------------------------------------------------------


@dataclass
class PairingContext:
    """Choices attached to one Lambda: conic points, lines and local points."""

    space: HomogeneousSpace
    conics: list[ConicSolution]
    lines: list[TangentLine]
    points: dict

    def local(self, lam2: Lambda, v: Place) -> int:
        P = self.points[v]
        return sum(P.symbol(i, d) for i, d in enumerate(lam2)) & 1

    def ledger(self, lam2: Lambda) -> dict:
        return {v: self.local(lam2, v) for v in self.points}

    def pair(self, lam2: Lambda) -> int:
        return sum(self.ledger(lam2).values()) & 1


def pairing_context(c: CurveTriple, n, lam: Lambda, rng: random.Random | None = None,
                    lines: list[TangentLine] | None = None) -> PairingContext:
    D = HomogeneousSpace.make(c, n, lam)
    conics = descent_conics(D, rng) if lines is None else []
    lines = lines or descent_lines(D, conics=conics)
    points = {v: find_local_point(D, v, lines, rng=rng) for v in pairing_places(c, n)}
    return PairingContext(D, conics, lines, points)


def local_pairing(ctx: PairingContext, lam2: Lambda, v: Place) -> int:
    return ctx.local(lam2, v)


def global_pairing(c: CurveTriple, n, lam: Lambda, lam2: Lambda,
                   rng: random.Random | None = None) -> int:
    return pairing_context(c, n, lam, rng).pair(lam2)


@dataclass
class PairingReport:
    curve: CurveTriple
    n: int
    basis: list[Lambda]
    gram: F2Matrix
    ledger: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def symmetric(self) -> bool:
        return self.gram == self.gram.T

    @property
    def nondegenerate(self) -> bool:
        return rank(self.gram) == self.dimension

    @property
    def verdict(self) -> str:
        s = self.dimension
        if s == 0:
            return "rank 0, Sha[2^inf] trivial"
        if s % 2 == 0 and self.nondegenerate:
            return f"rank 0, Sha[2^inf] = (Z/2)^{s}"
        return "inconclusive"

    @property
    def conclusive(self) -> bool:
        return self.verdict != "inconclusive"


def gram_matrix(c: CurveTriple, n, basis: list[Lambda], rng: random.Random | None = None,
                with_ledger: bool = True) -> PairingReport:
    tp = as_twist(n)
    rows = []
    ledger = {}
    for i, lam in enumerate(basis):
        ctx = pairing_context(c, tp, lam, rng)
        row = []
        for j, lam2 in enumerate(basis):
            led = ctx.ledger(lam2)
            if with_ledger:
                ledger[(i, j)] = led
            row.append(sum(led.values()) & 1)
        rows.append(row)
    gram = F2Matrix.from_lists(rows, len(basis))
    return PairingReport(c, tp.n, list(basis), gram, ledger)


def pairing_matrix(c: CurveTriple, n, method: str = "matrix", rng: random.Random | None = None,
                   unchecked: bool = False, selmer: SelmerBasis | None = None) -> PairingReport:
    sb = selmer or pure_selmer(c, n, method=method, unchecked=unchecked)
    return gram_matrix(c, n, sb.basis, rng)


def torsion_pairings(c: CurveTriple, n, lam: Lambda, rng: random.Random | None = None) -> list[int]:
    ctx = pairing_context(c, n, lam, rng)
    return [ctx.pair(t) for t in torsion_images(c, n)]


# -- explicit identities ----------------------------------------------------------------


class SqrtTwoRational:
    """x + y sqrt(2) with rational x, y."""

    __slots__ = ("x", "y")

    def __init__(self, x=0, y=0):
        self.x = Fraction(x)
        self.y = Fraction(y)

    @classmethod
    def _lift(cls, o):
        return o if isinstance(o, SqrtTwoRational) else cls(o, 0)

    def __add__(self, o):
        o = self._lift(o)
        return SqrtTwoRational(self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return SqrtTwoRational(-self.x, -self.y)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return SqrtTwoRational(self.x * o.x + 2 * self.y * o.y, self.x * o.y + self.y * o.x)

    __rmul__ = __mul__

    def __eq__(self, o):
        o = self._lift(o)
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"({self.x} + {self.y}*sqrt2)"

    def conjugate(self):
        return SqrtTwoRational(self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - 2 * self.y * self.y

    def sign(self) -> int:
        """Sign under the real embedding with sqrt2 > 0."""
        return _real_sign([(1, self.x * self.x) if self.x > 0 else (-1, self.x * self.x),
                           (1, 2 * self.y * self.y) if self.y > 0 else (-1, 2 * self.y * self.y)])

    def reduce_mod(self, p: int, s: int) -> int:
        """Image in Z/p after choosing s with s^2 = 2 mod p (or in Z/p^k likewise)."""
        return (self.x.numerator * pow(self.x.denominator, -1, p)
                + self.y.numerator * pow(self.y.denominator, -1, p) * s) % p


def fund_equality_check(a, b, c, e1, e2, e3, x, y, z) -> bool:
    """Exact check of the identity relating (ax+by+cz)(x+y+z) to the companion quadratic form."""
    if e1 + e2 + e3 != 0 or 0 in (e1, e2, e3):
        raise ValueError("need nonzero e_i summing to zero")
    if e1 * a * a + e2 * b * b + e3 * c * c != 0:
        raise ValueError("(a, b, c) is not a companion triple")
    if 0 in (b + c, c + a, a + b):
        raise ValueError("b + c, c + a, a + b must be nonzero")
    F = Fraction
    lhs = (a * x + b * y + c * z) * (x + y + z) - F((a + b) * (b + c) * (c + a), 2) * (
        F(x, b + c) + F(y, c + a) + F(z, a + b)
    ) ** 2
    rhs = F(e1 * a + e2 * b + e3 * c, 2) * (F(x * x, e1) + F(y * y, e2) + F(z * z, e3))
    return lhs == rhs


def special_residue(a: int, b: int, cc: int, c: CurveTriple, n) -> int:
    """(a+b)(b+c)(c+a)/8 after sign normalisation; checks it is 1 mod 4 and a square in Q_p for p | n."""
    t = sign_normalize(a, b, cc)
    a, b, cc = t.a, t.b, t.c
    if c.e1 * a * a + c.e2 * b * b + c.e3 * cc * cc != 0:
        raise ValueError("not a companion triple")
    prod = (a + b) * (b + cc) * (cc + a)
    if prod % 8:
        raise LemmaViolation(f"{prod} is not divisible by 8")
    r = prod // 8
    if r % 4 != 1:
        raise LemmaViolation(f"residue {r} is not 1 mod 4")
    # r may carry a square factor p^2 with p | n; what matters is r being a square in Q_p
    for p in as_twist(n).primes:
        if not is_local_square(r, p):
            raise LemmaViolation(f"residue {r} is not a square in Q_{p}")
    return r
