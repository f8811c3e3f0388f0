"""Genus theory of Q(sqrt(-n)) and the congruent-curve criteria built on it."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from functools import lru_cache

from .arith import (
    bad_places,
    factorize,
    hilbert_additive,
    is_squarefree,
    jacobi,
    legendre_bit,
    m_star,
    sqrt_mod_prime,
)
from .curves import CurveTriple, as_twist, sign_normalize
from .f2linalg import F2Matrix, rank
from .selmer import check_minimality, matrix_A

Form = tuple[int, int, int]


# -- binary quadratic forms ---------------------------------------------------------


def reduce_form(f: Form) -> Form:
    a, b, c = f
    while True:
        if c < a:
            a, b, c = c, -b, a
            continue
        if b > a or b <= -a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            continue
        break
    if b < 0 and (a == c or -b == a):
        b = -b
    return a, b, c


def reduced_forms(disc: int) -> list[Form]:
    """All primitive reduced positive definite forms of a negative discriminant."""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"bad discriminant {disc}")
    out = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b - disc) % 2:
                continue
            num = b * b - disc
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and a == c:
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return sorted(out)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x a + y b = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def compose(f: Form, g: Form) -> Form:
    """Gauss composition of primitive forms of the same discriminant, reduced."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    disc = b1 * b1 - 4 * a1 * c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a1 % a2 == 0:
        y1, d = 0, a2
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - disc) // (4 * a3)
    return reduce_form((a3, b3, c3))


def identity_form(disc: int) -> Form:
    return reduce_form((1, disc % 2, (disc % 2 - disc) // 4))


def form_power(f: Form, k: int, disc: int) -> Form:
    out = identity_form(disc)
    base = f
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out


@dataclass(frozen=True)
class FormClassGroup:
    discriminant: int
    forms: tuple[Form, ...]

    @property
    def order(self) -> int:
        return len(self.forms)

    @property
    def identity(self) -> Form:
        return identity_form(self.discriminant)

    def mul(self, f: Form, g: Form) -> Form:
        return compose(f, g)

    def power(self, f: Form, k: int) -> Form:
        return form_power(f, k, self.discriminant)

    def element_order(self, f: Form) -> int:
        e = self.identity
        g = f
        k = 1
        while g != e:
            g = compose(g, f)
            k += 1
        return k

    def torsion_size(self, m: int) -> int:
        e = self.identity
        return sum(1 for f in self.forms if self.power(f, m) == e)


@dataclass(frozen=True)
class TwoSylowRanks:
    h2: int
    h4: int
    h8: int


class ClassGroupCache:
    """Length-prefixed binary records: disc (q), count (I), then count forms (3q), big-endian."""

    def __init__(self, path: str | os.PathLike):
        self.path = os.fspath(path)
        self._data: dict[int, tuple[Form, ...]] = {}
        if os.path.exists(self.path):
            self._load()

    def _load(self):
        with open(self.path, "rb") as fh:
            raw = fh.read()
        pos = 0
        while pos < len(raw):
            disc, count = struct.unpack_from(">qI", raw, pos)
            pos += 12
            forms = []
            for _ in range(count):
                forms.append(struct.unpack_from(">qqq", raw, pos))
                pos += 24
            self._data[disc] = tuple(forms)

    def get(self, disc: int):
        return self._data.get(disc)

    def put(self, disc: int, forms) -> None:
        if disc in self._data:
            return
        self._data[disc] = tuple(forms)
        with open(self.path, "ab") as fh:
            fh.write(struct.pack(">qI", disc, len(forms)))
            for f in forms:
                fh.write(struct.pack(">qqq", *f))


def class_group(n, cache: ClassGroupCache | None = None) -> FormClassGroup:
    """Form class group of discriminant -4n (the field Q(sqrt(-n)) for n = 1 mod 4)."""
    n = int(n)
    if n <= 0 or not is_squarefree(n):
        raise ValueError(f"{n} is not a positive square-free integer")
    disc = -4 * n
    forms = cache.get(disc) if cache is not None else None
    if forms is None:
        forms = _cached_forms(disc)
        if cache is not None:
            cache.put(disc, forms)
    return FormClassGroup(disc, tuple(forms))


@lru_cache(maxsize=4096)
def _cached_forms(disc: int) -> tuple[Form, ...]:
    return tuple(reduced_forms(disc))


def two_ranks(G: FormClassGroup) -> TwoSylowRanks:
    sizes = [G.torsion_size(2**s) for s in range(4)]
    logs = [s.bit_length() - 1 for s in sizes]
    return TwoSylowRanks(logs[1] - logs[0], logs[2] - logs[1], logs[3] - logs[2])


def redei_matrix(n) -> F2Matrix:
    tp = as_twist(n)
    A = matrix_A(tp)
    col = F2Matrix([legendre_bit(2, p) for p in tp.primes], 1)
    return A.hstack(col)


def redei_h2_h4(n) -> tuple[int, int]:
    tp = as_twist(n)
    if tp.n % 4 != 1:
        raise ValueError("needs n = 1 mod 4")
    return tp.k, tp.k - rank(redei_matrix(tp))


# -- the distinguished divisor d ----------------------------------------------------


def _trivial_everywhere(a: int, b: int) -> bool:
    return all(hilbert_additive(a, b, v) == 0 for v in bad_places(2 * a * b))


def _positive_divisors(n: int) -> list[int]:
    ds = [1]
    for p, _ in factorize(n).prime_powers:
        ds += [d * p for d in ds]
    return sorted(ds)


@dataclass
class DivisorChoice:
    n: int
    variant: str
    candidates: dict = field(default_factory=dict)

    def unique(self, reading: str | None = None):
        """The candidate under ``reading`` (or the only reading) if it is unique up to d <-> n/d."""
        reading = reading or next(iter(self.candidates))
        cands = self.candidates[reading]
        classes = {min(d, self.n // d) if d > 0 else d for d in cands}
        if self.variant == "odd-thm":
            parities = {((d - 1) // 4) % 2 for d in cands}
            return min(cands) if cands and len(parities) == 1 else None
        return cands[0] if len(cands) == 1 and len(classes) == 1 else None

    @property
    def ambiguous(self) -> bool:
        vals = {tuple(v) for v in self.candidates.values()}
        return len(vals) > 1


def find_d(n, variant: str = "even-thm") -> DivisorChoice:
    """Candidates for the distinguished divisor d of n.

    even-thm: signed d | n, d != 1, d = 1 mod 4, (d, n)_v trivial everywhere.
    odd-thm: positive d | n with (d, -n)_v trivial everywhere or (2d, -n)_v trivial
    everywhere.  The exclusion "d != 1, n" is read two ways: "strict" applies it
    to both clauses, "scoped" only to the first one.
    """
    tp = as_twist(n)
    n = tp.n
    if variant == "even-thm":
        cands = [m_star(d) for d in _positive_divisors(n) if d != 1]
        cands = [d for d in cands if _trivial_everywhere(d, n)]
        return DivisorChoice(n, variant, {"signed": sorted(cands, key=abs)})
    if variant != "odd-thm":
        raise ValueError(variant)
    divs = _positive_divisors(n)
    first = [d for d in divs if _trivial_everywhere(d, -n)]
    second = [d for d in divs if _trivial_everywhere(2 * d, -n)]
    strict = sorted({d for d in first + second if d not in (1, n)})
    scoped = sorted({d for d in first if d not in (1, n)} | set(second))
    return DivisorChoice(n, variant, {"strict": strict, "scoped": scoped})


# -- the (2 + sqrt 2 / m) symbol ---------------------------------------------------


def _check_special(m: int) -> None:
    if m % 8 != 1 or not is_squarefree(m):
        raise ValueError(f"{m} must be square-free and 1 mod 8")
    if abs(m) > 1 and any(p % 8 not in (1, 7) for p in factorize(abs(m)).primes):
        raise ValueError(f"{m} has a prime factor not = +-1 mod 8")


def symbol_per_prime(m: int, root_choice: int = 0) -> int:
    """Product over p | m of ((2 + s_p)/p) with s_p^2 = 2 mod p; root_choice picks s or -s."""
    _check_special(m)
    out = 1
    for p in factorize(abs(m)).primes if abs(m) > 1 else ():
        s = sqrt_mod_prime(2, p)
        if root_choice:
            s = p - s
        out *= jacobi(2 + s, p)
    return out


def norm_representation(m: int, bound: int | None = None) -> tuple[int, int] | None:
    """(u, w) with m = u^2 - 2 w^2, gcd(u, w) = 1, u > 0, w even."""
    bound = bound if bound is not None else max(8, 2 * abs(m))
    for w in range(0, bound + 1, 2):
        sq = m + 2 * w * w
        if sq < 0:
            continue
        u = math.isqrt(sq)
        if u * u == sq and u > 0 and math.gcd(u, w) == 1:
            return u, w
    return None


def symbol_via_lambda(m: int, bound: int | None = None) -> int:
    _check_special(m)
    rep = norm_representation(m, bound)
    if rep is None:
        raise ValueError(f"no representation of {m} by u^2 - 2w^2 within the bound")
    u, w = rep
    lam = u + 2 * w
    return jacobi(2, abs(lam))


def symbol_2_plus_sqrt2(m: int, route: str = "per-prime") -> int:
    if route == "per-prime":
        return symbol_per_prime(m)
    if route == "lambda":
        try:
            return symbol_via_lambda(m)
        except ValueError:
            return symbol_per_prime(m)
    raise ValueError(route)


# -- congruent-curve criteria ------------------------------------------------------


@dataclass
class CriterionResult:
    n: int
    value: bool
    h4: int
    h8: int | None
    d: int | None
    choice: DivisorChoice
    statement: str
    checks: list = field(default_factory=list)


class CriterionHypothesisError(ValueError):
    pass


def _companion_checks(n, comp) -> list[tuple[str, bool]]:
    tp = as_twist(n)
    a, b, c = comp
    abc = abs(a * b * c)
    qs = [q for q in factorize(abc).primes] if abc > 1 else []
    return [
        ("n = 1 mod 8", tp.n % 8 == 1),
        ("coprime to abc", math.gcd(tp.n, abc) == 1),
        ("residues mod abc", all(jacobi(p, q) == 1 for p in tp.primes for q in qs if q != 2)),
    ]


def congruent_criterion_odd(n, comp=(1, 1, 1), reading: str = "scoped",
                            cache: ClassGroupCache | None = None) -> CriterionResult:
    """h4(n) = 1 and h8(n) = (d - 1)/4 mod 2, for the companion curve (a^2, b^2, -2c^2)."""
    tp = as_twist(n)
    a, b, c = comp
    curve = CurveTriple(a * a, b * b, -2 * c * c)
    checks = _companion_checks(tp, comp)
    checks.append(("p = 1 mod 4", all(p % 4 == 1 for p in tp.primes)))
    checks.append(("minimal", check_minimality(curve)))
    failed = [name for name, ok in checks if not ok]
    if failed:
        raise CriterionHypothesisError(f"n={tp.n}: {failed}")
    ranks = two_ranks(class_group(tp.n, cache))
    choice = find_d(tp, "odd-thm")
    d = choice.unique(reading)
    value = ranks.h4 == 1 and d is not None and ranks.h8 % 2 == ((d - 1) // 4) % 2
    return CriterionResult(tp.n, value, ranks.h4, ranks.h8, d, choice,
                           f"rank 0 and Sha[2^inf] = (Z/2)^2 for {curve} twisted by {tp.n}", checks)


def congruent_criterion_even(n, comp=(1, 1, 1)) -> CriterionResult:
    """h4(n) = 1 and d = 9 mod 16, for the companion curve (2a^2, 2b^2, -4c^2)."""
    tp = as_twist(n)
    a, b, c = comp
    curve = CurveTriple(2 * a * a, 2 * b * b, -4 * c * c)
    checks = _companion_checks(tp, comp)
    checks.append(("p = +-1 mod 8", all(p % 8 in (1, 7) for p in tp.primes)))
    no3 = [all(p % 4 == 1 for p in factorize(abs(x)).primes) if abs(x) > 1 else True
           for x in (tp.n, a, b)]
    checks.append(("n, a or b free of 3 mod 4 primes", any(no3)))
    checks.append(("minimal", check_minimality(curve)))
    failed = [name for name, ok in checks if not ok]
    if failed:
        raise CriterionHypothesisError(f"n={tp.n}: {failed}")
    h2, h4 = redei_h2_h4(tp)
    choice = find_d(tp, "even-thm")
    d = choice.unique() if h4 == 1 else None
    value = h4 == 1 and d is not None and d % 16 == 9
    return CriterionResult(tp.n, value, h4, None, d, choice,
                           f"rank 0 and Sha[2^inf] = (Z/2)^2 for {curve} twisted by {tp.n}", checks)


def qualifies_even(n: int, comp=(1, 1, 1)) -> bool:
    try:
        congruent_criterion_even(n, comp)
    except (CriterionHypothesisError, ValueError):
        return False
    return True
