"""Pure 2-Selmer groups of twists, by F_2 matrix kernels and by direct enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .arith import (
    hilbert_additive,
    jacobi,
    legendre_bit,
    m_star,
    odd_prime_factors,
    prime_factors,
    squarefree_part,
)
from .curves import (
    CurveTriple,
    Lambda,
    ParityCase,
    TwistParam,
    as_twist,
    has_order4_point,
    lambda_mul,
    torsion_images,
)
from .descent import HomogeneousSpace, global_solvable_everywhere, normal_form
from .f2linalg import F2Matrix, F2Vector, concat_blocks, echelon_basis, kernel_basis

MAX_DIRECT_PRIMES = 16


class HypothesisError(ValueError):
    """A theorem hypothesis failed; ``failures`` lists the failing checks."""

    def __init__(self, failures: list["Check"]):
        self.failures = failures
        super().__init__("; ".join(f"{c.name}: {c.detail}" for c in failures))


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def matrix_A(n) -> F2Matrix:
    tp = as_twist(n)
    ps = tp.primes
    return F2Matrix.from_lists(
        [[hilbert_additive(pj, -tp.n, pi) for pj in ps] for pi in ps], len(ps)
    )


def matrix_D(u: int, n) -> F2Matrix:
    tp = as_twist(n)
    if math.gcd(u, tp.n) != 1:
        raise ValueError(f"{u} shares a factor with {tp.n}")
    return F2Matrix.diag([legendre_bit(u, p) for p in tp.primes])


def theorem_for(c: CurveTriple) -> str:
    """Which matrix description applies: 'general', 'odd', 'even1' or 'even2'."""
    case = c.parity_case
    if case == ParityCase.GENERAL:
        return "general"
    if case == ParityCase.ODD:
        return "odd"
    e1, e2, e3 = c.e
    if e2 > 0 and e3 < 0:
        return "even1"
    if e3 > 0 and e1 < 0:
        return "even2"
    return "even1"


@lru_cache(maxsize=256)
def _selmer_group_elements(c: CurveTriple, n: int) -> tuple[Lambda, ...]:
    """All Lambda (square-free representatives) solvable everywhere."""
    tp = as_twist(n)
    base = [-1] + list(prime_factors(2 * abs(c.product) * tp.n))
    if len(base) - 1 > MAX_DIRECT_PRIMES:
        raise ValueError("too many primes for direct enumeration")
    divs = [math.prod(s) for r in range(len(base) + 1) for s in itertools.combinations(base, r)]
    found = []
    for d1 in divs:
        for d2 in divs:
            lam = (d1, d2, squarefree_part(d1 * d2))
            if global_solvable_everywhere(HomogeneousSpace.make(c, tp, lam)):
                found.append(lam)
    return tuple(found)


def selmer_group(c: CurveTriple, n=1) -> list[Lambda]:
    return list(_selmer_group_elements(c, as_twist(n).n))


def check_minimality(c: CurveTriple) -> bool:
    """True iff Sel_2(E/Q) consists of exactly the four torsion images."""
    elems = set(_selmer_group_elements(c, 1))
    tors = set(torsion_images(c, 1))
    return len(tors) == 4 and elems == tors


def hypothesis_checks(c: CurveTriple, n, theorem: str | None = None) -> list[Check]:
    tp = as_twist(n)
    theorem = theorem or theorem_for(c)
    e1, e2, e3 = c.e
    odd_q = odd_prime_factors(abs(c.product))
    checks = [
        Check("coprime", math.gcd(tp.n, c.product) == 1, f"gcd(n, e1e2e3) = {math.gcd(tp.n, c.product)}"),
    ]
    bad = [(p, q) for p in tp.primes for q in odd_q if q != p and jacobi(p, q) != 1]
    checks.append(Check("residues", not bad, f"non-residue pairs (p, q): {bad}" if bad else ""))
    if theorem in ("general", "even1", "even2"):
        tw = c.twist(tp.n)
        ok = not has_order4_point(c) and not has_order4_point(tw)
        checks.append(Check("no-order-4", ok, "" if ok else "E or E^(n) has a point of order 4"))
    if theorem == "general":
        bad8 = [p for p in tp.primes if p % 8 != 1]
        checks.append(Check("p=1 mod 8", not bad8, f"primes not 1 mod 8: {bad8}" if bad8 else ""))
    if theorem == "even1":
        signs = e2 > 0 and e3 < 0
        all14 = all(p % 4 == 1 for p in tp.primes)
        checks.append(Check("signs", signs or all14, "" if signs or all14 else "need e2>0, e3<0 or all p = 1 mod 4"))
        qs = odd_prime_factors(abs(e2 * e3))
        bad = [(p, q) for p in tp.primes for q in qs if jacobi(m_star(p), q) != 1]
        checks.append(Check("p* residues", not bad, f"(p*/q) = -1 for {bad}" if bad else ""))
    if theorem == "even2":
        checks.append(Check("signs", e3 > 0 and e1 < 0, "" if e3 > 0 and e1 < 0 else "need e3>0, e1<0"))
        qs = odd_prime_factors(abs(e1 * e3))
        bad = [(p, q) for p in tp.primes for q in qs if jacobi(m_star(p), q) != 1]
        checks.append(Check("p* residues", not bad, f"(p*/q) = -1 for {bad}" if bad else ""))
    mini = check_minimality(c)
    checks.append(Check("minimal", mini, "" if mini else "Sel_2(E/Q) is larger than E(Q)[2]"))
    return checks


@dataclass
class SelmerMatrix:
    curve: CurveTriple
    n: TwistParam
    theorem: str
    matrix: F2Matrix
    checks: list[Check] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.n.k

    def decode(self, v: F2Vector) -> Lambda:
        top, bottom = v.split(self.k)
        ps = self.n.primes
        first = math.prod(p for p, b in zip(ps, top) if b)
        if self.theorem in ("general", "odd"):
            d1, d2 = first, math.prod(p for p, b in zip(ps, bottom) if b)
            return (d1, d2, squarefree_part(d1 * d2))
        d3 = math.prod(m_star(p) for p, b in zip(ps, bottom) if b)
        if self.theorem == "even1":
            return (first, squarefree_part(first * d3), d3)
        return (squarefree_part(first * d3), first, d3)

    def encode(self, lam: Lambda) -> F2Vector:
        d1, d2, d3 = lam
        if self.theorem in ("general", "odd"):
            a, b = d1, d2
        elif self.theorem == "even1":
            a, b = d1, d3
        else:
            a, b = d2, d3
        bits = [int(a % p == 0) for p in self.n.primes] + [int(b % p == 0) for p in self.n.primes]
        return F2Vector.from_list(bits)


def selmer_matrix(c: CurveTriple, n, unchecked: bool = False) -> SelmerMatrix:
    tp = as_twist(n)
    theorem = theorem_for(c)
    checks = hypothesis_checks(c, tp, theorem)
    failed = [ch for ch in checks if not ch.ok]
    if failed and not unchecked:
        raise HypothesisError(failed)
    e1, e2, e3 = c.e
    A = matrix_A(tp)
    D = lambda u: matrix_D(u, tp)  # noqa: E731
    if theorem == "general":
        Z = F2Matrix.zeros(tp.k, tp.k)
        M = concat_blocks([[A, Z], [Z, A]])
    elif theorem == "odd":
        M = concat_blocks([[A + D(-e3), D(-e2 * e3)], [D(-e1 * e3), A + D(e3)]])
    elif theorem == "even1":
        M = concat_blocks([[A + D(e2), D(-e2 * e3)], [D(-e1 * e2), A.T + D(e2)]])
    else:
        M = concat_blocks([[A + D(-e1), D(-e1 * e3)], [D(-e1 * e2), A.T + D(-e1)]])
    return SelmerMatrix(c, tp, theorem, M, checks)


@dataclass
class SelmerBasis:
    curve: CurveTriple
    n: int
    case: ParityCase
    method: str
    basis: list[Lambda]
    kernel_vectors: list[F2Vector] = field(default_factory=list)
    elements: frozenset = frozenset()

    @property
    def dimension(self) -> int:
        return len(self.basis)


def _span_lambdas(basis: list[Lambda]) -> list[Lambda]:
    out = [(1, 1, 1)]
    for b in basis:
        out += [lambda_mul(x, b) for x in out]
    return out


def _pure_direct(c: CurveTriple, tp: TwistParam) -> SelmerBasis:
    elems = _selmer_group_elements(c, tp.n)
    tors = torsion_images(c, tp)
    base = [-1] + list(prime_factors(2 * abs(c.product) * tp.n))

    def pack(lam: Lambda) -> int:
        bits = 0
        for j, d in enumerate(lam[:2]):
            for i, s in enumerate(base):
                hit = d < 0 if s == -1 else d % s == 0
                if hit:
                    bits |= 1 << (j * len(base) + i)
        return bits

    tors_bits = echelon_basis(pack(t) for t in tors)
    cosets = {normal_form(c, tp, lam) for lam in elems}
    ordered = sorted(cosets, key=lambda l: (abs(l[0]) * abs(l[1]), abs(l[0]), l))
    chosen: list[Lambda] = []
    current = list(tors_bits)
    for lam in ordered:
        b = pack(lam)
        if len(echelon_basis(current + [b])) > len(current):
            chosen.append(lam)
            current.append(b)
    return SelmerBasis(c, tp.n, c.parity_case, "direct", chosen, [], frozenset(cosets))


def _pure_matrix(c: CurveTriple, tp: TwistParam, unchecked: bool) -> SelmerBasis:
    sm = selmer_matrix(c, tp, unchecked=unchecked)
    kern = kernel_basis(sm.matrix)
    basis = [sm.decode(v) for v in kern]
    elements = frozenset(normal_form(c, tp, lam) for lam in _span_lambdas(basis))
    return SelmerBasis(c, tp.n, c.parity_case, "matrix", basis, kern, elements)


def pure_selmer(c: CurveTriple, n, method: str = "matrix", unchecked: bool = False) -> SelmerBasis:
    tp = as_twist(n)
    if method == "matrix":
        return _pure_matrix(c, tp, unchecked)
    if method == "direct":
        if math.gcd(tp.n, 2 * c.product) != 1:
            raise ValueError("direct method needs n coprime to 2 e1 e2 e3")
        return _pure_direct(c, tp)
    raise ValueError(f"unknown method {method!r}")


def selmer_rank(c: CurveTriple, n, method: str = "direct") -> int:
    """dim Sel_2 of the twist, assuming no rational 4-torsion."""
    return pure_selmer(c, n, method).dimension + 2
