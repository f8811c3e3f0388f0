"""Homogeneous spaces of the full 2-descent and their local solvability.

The quadrics of D_Lambda for the n-twist, in the variables (t, u1, u2, u3)::

    H1: e1 n t^2 + d2 u2^2 - d3 u3^2 = 0
    H2: e2 n t^2 + d3 u3^2 - d1 u1^2 = 0
    H3: e3 n t^2 + d1 u1^2 - d2 u2^2 = 0

Closed-form local tests live next to ``hensel_solvable``, a p-adic search that
knows nothing about them and is used both as a fallback and as a cross-check.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .arith import (
    INF,
    Place,
    class_representative,
    factorize,
    jacobi,
    odd_prime_factors,
    squarefree_part,
    valuation,
)
from .curves import CurveTriple, Lambda, ParityCase, as_twist, lambda_mul, torsion_images


class InconclusiveError(RuntimeError):
    """The p-adic search ran out of depth or budget without a verdict."""


@dataclass(frozen=True)
class HomogeneousSpace:
    curve: CurveTriple
    n: int
    lam: Lambda

    def __post_init__(self):
        d1, d2, d3 = self.lam
        if 0 in self.lam:
            raise ValueError("Lambda entries must be nonzero")
        if squarefree_part(d1 * d2 * d3) != 1:
            raise ValueError(f"{self.lam}: product is not a square")

    @classmethod
    def make(cls, curve: CurveTriple, n, lam) -> "HomogeneousSpace":
        return cls(curve, as_twist(n).n, tuple(lam))

    @property
    def twisted(self) -> tuple[int, int, int]:
        return tuple(e * self.n for e in self.curve.e)  # type: ignore[return-value]

    def quadric(self, i: int) -> tuple[int, int, int, int]:
        """Coefficients of H_i (i = 1, 2, 3) on (t, u1, u2, u3)."""
        a1, a2, a3 = self.twisted
        d1, d2, d3 = self.lam
        if i == 1:
            return (a1, 0, d2, -d3)
        if i == 2:
            return (a2, -d1, 0, d3)
        if i == 3:
            return (a3, d1, -d2, 0)
        raise ValueError(i)

    def evaluate(self, point) -> tuple:
        return tuple(sum(c * x * x for c, x in zip(self.quadric(i), point)) for i in (1, 2, 3))

    def contains(self, point) -> bool:
        return any(point) and all(v == 0 for v in self.evaluate(point))


# -- real place --------------------------------------------------------------


def solvable_real(D: HomogeneousSpace) -> bool:
    e1, e2, e3 = D.curve.e
    d1, d2, d3 = D.lam
    if e2 > 0 and e3 < 0 and d1 < 0:
        return False
    if e3 > 0 and e1 < 0 and d2 < 0:
        return False
    if e1 > 0 and e2 < 0 and d3 < 0:
        return False
    return True


# -- odd primes of n -----------------------------------------------------------


def _is_qr(num: int, den: int, p: int) -> bool:
    # num/den is a p-adic unit here, so num*den carries an even power of p
    x = num * den
    while x % p == 0:
        x //= p
    return jacobi(x, p) == 1


def solvable_at_p_dividing_n(D: HomogeneousSpace, p: int) -> bool:
    """Closed-form solvability at an odd prime p | n with p coprime to e1 e2 e3."""
    e1, e2, e3 = D.curve.e
    n = D.n
    d1, d2, d3 = D.lam
    if n % p or D.curve.product % p == 0:
        raise ValueError(f"{p} must divide n and not e1 e2 e3")
    pattern = (d1 % p == 0, d2 % p == 0, d3 % p == 0)
    if pattern == (False, False, False):
        return all(_is_qr(d, 1, p) for d in (d1, d2, d3))
    if pattern == (False, True, True):
        return _is_qr(-e2 * e3 * d1, 1, p) and _is_qr(e3 * n, d2, p) and _is_qr(-e2 * n, d3, p)
    if pattern == (True, False, True):
        return _is_qr(-e3 * n, d1, p) and _is_qr(-e3 * e1 * d2, 1, p) and _is_qr(e1 * n, d3, p)
    if pattern == (True, True, False):
        return _is_qr(e2 * n, d1, p) and _is_qr(-e1 * n, d2, p) and _is_qr(-e1 * e2 * d3, 1, p)
    raise ValueError(f"{p} divides an odd number of entries of {D.lam}")


# -- odd primes of e_i ---------------------------------------------------------


def solvable_at_q_dividing_e(D: HomogeneousSpace, q: int, i: int) -> bool:
    """Closed-form solvability at an odd prime q | e_i with q coprime to n."""
    e = D.curve.e
    d = D.lam
    n = D.n
    k = i - 1
    ei, enext = e[k], e[(k + 1) % 3]
    di, dnext = d[k], d[(k + 1) % 3]
    if ei % q or n % q == 0:
        raise ValueError(f"{q} must divide e{i} and not n")
    if di % q == 0:
        return False
    if dnext % q:
        return _is_qr(di, 1, q)
    if ei % (q * q):
        return _is_qr(enext * n * di, 1, q)
    return _is_qr(enext * n, 1, q) and _is_qr(di, 1, q)


# -- the place 2 ----------------------------------------------------------------


def odd_representative(D: HomogeneousSpace) -> Lambda | None:
    """A torsion translate of Lambda with all entries odd, if there is one."""
    cands = [lambda_mul(D.lam, t) for t in torsion_images(D.curve, D.n)]
    odd = [c for c in cands if all(x % 2 for x in c)]
    if not odd:
        return None
    return min(odd, key=lambda c: (abs(c[0]), abs(c[1]), c))


def two_adic_filter(D: HomogeneousSpace) -> bool:
    """Necessary 2-adic condition: d3 odd (odd case) or d3 = 1 mod 4 (even case)."""
    case = D.curve.parity_case
    if case == ParityCase.ODD:
        return D.lam[2] % 2 == 1
    if case == ParityCase.EVEN:
        rep = odd_representative(D)
        # every class has an odd translate in the even case
        return rep is not None and rep[2] % 4 == 1
    raise ValueError("no closed-form 2-adic filter in the general case")


def two_adic_automatic(D: HomogeneousSpace, solvable_elsewhere: bool) -> bool:
    """2-adic solvability once every other place is known to be solvable."""
    case = D.curve.parity_case
    rep = odd_representative(D)
    if case == ParityCase.ODD:
        if rep is None:
            raise ValueError("needs a Lambda with odd entries")
    elif case == ParityCase.EVEN:
        if rep is None or rep[2] % 4 != 1:
            raise ValueError("needs odd entries with d3 = 1 mod 4")
    else:
        raise ValueError("only the odd and even cases are automatic at 2")
    return solvable_elsewhere


# -- the p-adic oracle ----------------------------------------------------------


def default_depth(D: HomogeneousSpace, p: int) -> int:
    if p == 2:
        return 12
    d1, d2, d3 = D.lam
    return 2 * valuation(4 * D.curve.product * D.n * d1 * d2 * d3, p) + 3


def _v(x: int, p: int) -> float:
    if x == 0:
        return float("inf")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass
class _Found:
    center: tuple[int, ...]
    cols: tuple[int, int]
    minor_val: int


class _Search:
    """Ball refinement over primitive points of two diagonal quadrics in P^3.

    A ball fixes each coordinate modulo p**r (r = None means the coordinate is
    exactly its center).  Balls whose quadric values provably avoid zero are
    pruned; a center satisfying the multivariate Hensel bound certifies a
    Q_p-point.
    """

    def __init__(self, f1, f2, p: int, depth: int, budget: int, rng: random.Random | None):
        self.f = (tuple(f1), tuple(f2))
        self.p = p
        self.depth = depth
        self.budget = budget
        self.rng = rng
        self.vcoef = tuple(tuple(_v(a, p) for a in f) for f in self.f)
        self.inconclusive = False
        self.nodes = 0

    def _g(self, eq: int, j: int, c: int, r: int | None) -> float:
        a = self.f[eq][j]
        if a == 0 or r is None:
            return float("inf")
        if c == 0:
            return self.vcoef[eq][j] + 2 * r
        return self.vcoef[eq][j] + r + min(_v(2 * c, self.p), r)

    def _minor(self, c) -> tuple[float, tuple[int, int]]:
        p = self.p
        j1 = [2 * a * x for a, x in zip(self.f[0], c)]
        j2 = [2 * a * x for a, x in zip(self.f[1], c)]
        best = (float("inf"), (0, 1))
        for i in range(4):
            for j in range(i + 1, 4):
                m = j1[i] * j2[j] - j1[j] * j2[i]
                if m:
                    vm = _v(m, p)
                    if vm < best[0]:
                        best = (vm, (i, j))
        return best

    def _patches(self):
        order = list(range(4))
        if self.rng is not None:
            self.rng.shuffle(order)
        for idx in order:
            c = [0, 0, 0, 0]
            r: list[int | None] = [0, 0, 0, 0]
            c[idx] = 1
            r[idx] = None
            for j in range(idx):
                r[j] = 1
            yield c, r

    def run(self) -> _Found | None:
        for c, r in self._patches():
            found = self._dfs(c, r)
            if found is not None:
                return found
        return None

    def _dfs(self, c0, r0) -> _Found | None:
        p = self.p
        stack = [(c0, r0)]
        while stack:
            c, r = stack.pop()
            self.nodes += 1
            if self.nodes > self.budget:
                self.inconclusive = True
                return None
            vals = []
            ms = []
            pruned = False
            for eq in (0, 1):
                val = sum(a * x * x for a, x in zip(self.f[eq], c))
                m = min(self._g(eq, j, c[j], r[j]) for j in range(4))
                vf = _v(val, p)
                if vf < m:
                    pruned = True
                    break
                vals.append(val)
                ms.append((m, eq))
            if pruned:
                continue
            vf = min(_v(vals[0], p), _v(vals[1], p))
            e, cols = self._minor(c)
            if vf >= 2 * e + 1:
                return _Found(tuple(c), cols, int(e))
            # refine the least determined equation at its coarsest variable
            ms.sort()
            m, eq = ms[0]
            if m == float("inf"):
                # both quadrics exact on the ball: a singular exact point
                continue
            j = min(range(4), key=lambda jj: (self._g(eq, jj, c[jj], r[jj]), jj))
            rj = r[j]
            if rj + 1 > self.depth:
                self.inconclusive = True
                continue
            children = self._children(eq, j, c, r, vals[eq])
            if self.rng is not None:
                self.rng.shuffle(children)
            for cj in children:
                cc = list(c)
                rr = list(r)
                cc[j] = cj
                rr[j] = rj + 1
                stack.append((cc, rr))
        return None

    def _children(self, eq: int, j: int, c, r, val: int) -> list[int]:
        p = self.p
        rj = r[j]
        if rj == 0 and p != 2:
            k = self.vcoef[eq][j]
            others_ok = all(
                self._g(eq, jj, c[jj], r[jj]) >= k + 1 for jj in range(4) if jj != j
            )
            if others_ok:
                # only x_j mod p is unknown in this equation mod p^(k+1)
                pk = p**k
                a = self.f[eq][j] // pk
                rest = val // pk if val % pk == 0 else None
                if rest is None:
                    return []
                target = (-rest * pow(a, -1, p)) % p
                return [x for x in range(p) if x * x % p == target] if p < 64 else _roots(target, p)
        step = p**rj
        return [c[j] + t * step for t in range(p)]


def _roots(target: int, p: int) -> list[int]:
    from .arith import sqrt_mod_prime

    if target == 0:
        return [0]
    s = sqrt_mod_prime(target, p)
    if s is None:
        return []
    return sorted({s, p - s})


DEFAULT_BUDGET = 400_000


def _canonical(D: HomogeneousSpace, p: int):
    d = tuple(class_representative(x, p) for x in D.lam)
    a1, a2, _ = D.twisted
    return a1, a2, d


@lru_cache(maxsize=1 << 16)
def _hensel_cached(a1: int, a2: int, d: tuple[int, int, int], p: int, depth: int, budget: int):
    d1, d2, d3 = d
    s = _Search((a1, 0, d2, -d3), (a2, -d1, 0, d3), p, depth, budget, None)
    found = s.run()
    if found is not None:
        return True
    if s.inconclusive:
        return None
    return False


def hensel_solvable(D: HomogeneousSpace, v: Place, depth: int | None = None,
                    budget: int = DEFAULT_BUDGET) -> bool:
    """Decide D(Q_p) != {} by p-adic search; raises InconclusiveError if undecided."""
    if v == INF:
        raise ValueError("hensel_solvable needs a finite place")
    p = int(v)
    if depth is None:
        depth = default_depth(D, p)
    a1, a2, d = _canonical(D, p)
    verdict = _hensel_cached(a1, a2, d, p, depth, budget)
    if verdict is None:
        raise InconclusiveError(f"no verdict for {D.lam} at {p} within depth {depth}")
    return verdict


def local_search(D: HomogeneousSpace, p: int, depth: int, rng: random.Random | None = None,
                 budget: int = DEFAULT_BUDGET) -> _Found | None:
    """A Hensel-certified approximate Q_p-point on D itself (no class canonicalisation)."""
    f1 = D.quadric(1)
    f2 = D.quadric(2)
    s = _Search(f1, f2, p, depth, budget, rng)
    found = s.run()
    if found is None and s.inconclusive:
        raise InconclusiveError(f"no local point for {D.lam} at {p}")
    return found


# -- all places --------------------------------------------------------------


@dataclass
class PlaceVerdict:
    place: Place
    solvable: bool
    method: str


@dataclass
class LocalReport:
    verdicts: list[PlaceVerdict] = field(default_factory=list)

    @property
    def solvable(self) -> bool:
        return all(v.solvable for v in self.verdicts)

    def failing(self) -> list[Place]:
        return [v.place for v in self.verdicts if not v.solvable]


def relevant_places(D: HomogeneousSpace) -> list[Place]:
    return [INF, 2] + sorted(set(odd_prime_factors(D.curve.product * D.n)))


def local_report(D: HomogeneousSpace, use_lemmas: bool = True, stop_early: bool = True) -> LocalReport:
    """Per-place verdicts; closed forms where a lemma applies, else the oracle."""
    rep = LocalReport()
    e = D.curve.e
    n = D.n
    case = D.curve.parity_case
    bad = 2 * abs(D.curve.product) * n
    for d in D.lam:
        for p in factorize(abs(d)).primes:
            if bad % p:
                rep.verdicts.append(PlaceVerdict(p, False, "good-reduction"))
                return rep
    rep.verdicts.append(PlaceVerdict(INF, solvable_real(D), "real"))
    if stop_early and not rep.solvable:
        return rep
    for p in relevant_places(D)[2:]:
        in_e = [i + 1 for i in range(3) if e[i] % p == 0]
        if use_lemmas and n % p == 0 and not in_e:
            ok, how = solvable_at_p_dividing_n(D, p), "p|n"
        elif (use_lemmas and in_e and n % p and case == ParityCase.EVEN
              and valuation(e[in_e[0] - 1], p) == 1):
            # the closed form is unreliable once q^2 | e_i, see tests
            ok, how = solvable_at_q_dividing_e(D, p, in_e[0]), "q|e"
        else:
            ok, how = hensel_solvable(D, p), "oracle"
        rep.verdicts.append(PlaceVerdict(p, ok, how))
        if stop_early and not ok:
            return rep
    if use_lemmas and case in (ParityCase.ODD, ParityCase.EVEN):
        if not two_adic_filter(D):
            rep.verdicts.append(PlaceVerdict(2, False, "2-filter"))
        else:
            rep.verdicts.append(PlaceVerdict(2, two_adic_automatic(D, rep.solvable), "2-auto"))
    else:
        rep.verdicts.append(PlaceVerdict(2, hensel_solvable(D, 2), "oracle"))
    return rep


def global_solvable_everywhere(D: HomogeneousSpace, use_lemmas: bool = True) -> bool:
    return local_report(D, use_lemmas=use_lemmas).solvable


def normal_form_ok(curve: CurveTriple, n: int, lam: Lambda) -> bool:
    d1, d2, d3 = lam
    if any(n % abs(d) for d in lam):
        return False
    if curve.parity_case == ParityCase.EVEN:
        e1, _, e3 = curve.e
        lead = d2 if (e3 > 0 and e1 < 0) else d1
        return lead > 0 and d3 % 4 == 1
    return d1 > 0 and d2 > 0 and d3 > 0


def normal_form(curve: CurveTriple, n, lam: Lambda) -> Lambda:
    """Torsion translate of Lambda in the case-specific normal form."""
    n = as_twist(n).n
    cands = [lambda_mul(lam, t) for t in torsion_images(curve, n)]
    return min(
        cands,
        key=lambda c: (not normal_form_ok(curve, n, c), abs(c[0]), abs(c[1]), abs(c[2]), c),
    )


def rational_point_class(curve: CurveTriple, n: int, x: Fraction) -> Lambda:
    """Descent image (x + e2 n, x - e1 n, x) of a non-torsion rational point."""
    e1, e2, _ = curve.e
    return (
        squarefree_part(x + e2 * n),
        squarefree_part(x - e1 * n),
        squarefree_part(x),
    )
