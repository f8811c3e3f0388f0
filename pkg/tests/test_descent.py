import itertools
import math

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from selmertwist.arith import INF, is_local_square, prime_factors, squarefree_part, valuation
from selmertwist.curves import CurveTriple, ParityCase, as_twist, torsion_images
from selmertwist.descent import (
    HomogeneousSpace,
    InconclusiveError,
    global_solvable_everywhere,
    hensel_solvable,
    local_report,
    normal_form,
    rational_point_class,
    solvable_at_p_dividing_n,
    solvable_at_q_dividing_e,
    solvable_real,
    two_adic_automatic,
    two_adic_filter,
)

CONG = CurveTriple(1, 1, -2)
EVEN = CurveTriple(2, 2, -4)


def space(c, n, lam):
    return HomogeneousSpace.make(c, as_twist(n), lam)


def test_identity_class_has_the_obvious_point():
    D = space(CONG, 1, (1, 1, 1))
    assert D.contains((0, 1, 1, 1))


def test_solvable_real_examples():
    # e2 > 0 > e3 forces d1 > 0 for the congruent curve
    assert solvable_real(space(CONG, 1, (1, 1, 1)))
    assert solvable_real(space(CONG, 1, (1, -1, -1)))
    assert not solvable_real(space(CONG, 1, (-1, -1, 1)))
    assert not solvable_real(space(CurveTriple(-3, 1, 2), 1, (-1, -1, 1)))
    assert not solvable_real(space(CurveTriple(5, -1, -4), 1, (1, -2, -2)))


def test_solvable_at_p_dividing_n_examples():
    D = space(CONG, 5, (5, 5, 1))
    assert solvable_at_p_dividing_n(D, 5) and hensel_solvable(D, 5)
    D = space(CONG, 3, (3, 3, 1))
    assert not solvable_at_p_dividing_n(D, 3) and not hensel_solvable(D, 3)
    assert solvable_at_p_dividing_n(space(CONG, 5, (1, 1, 1)), 5)


def test_solvable_at_p_dividing_n_rejects():
    with pytest.raises(ValueError):
        solvable_at_p_dividing_n(space(CONG, 5, (1, 1, 1)), 3)


def test_q_dividing_e_examples():
    c = CurveTriple(6, 3, -9)
    # q = 3 divides d1 for Lambda = (3, 1, 3)
    assert not solvable_at_q_dividing_e(space(c, 1, (3, 1, 3)), 3, 1)
    c = CurveTriple(18, 2, -20)
    assert solvable_at_q_dividing_e(space(c, 1, (1, 1, 1)), 3, 1)


def test_q_squared_counterexample():
    """With q^2 | e_i the closed form misses genuine points."""
    c = CurveTriple(18, 2, -20)
    D = space(c, 1, (-1, 1, -1))
    # (t, u1, u2, u3) = (1, sqrt(-2), 3 sqrt(-2), 0), checked on squares
    squares = (1, -2, -18, 0)
    for i in (1, 2, 3):
        assert sum(a * s for a, s in zip(D.quadric(i), squares)) == 0
    assert is_local_square(-2, 3)
    assert not solvable_at_q_dividing_e(D, 3, 1)
    assert hensel_solvable(D, 3)
    # the closed form is not consulted when q^2 | e_i
    assert [v.method for v in local_report(D, stop_early=False).verdicts if v.place == 3] == ["oracle"]


def test_two_adic_filter_examples():
    assert not two_adic_filter(space(CONG, 1, (1, 2, 2)))
    assert not two_adic_filter(space(EVEN, 15, (-1, -3, 3)))
    assert two_adic_filter(space(EVEN, 5, (-1, -5, 5)))


def test_two_adic_automatic_examples():
    assert two_adic_automatic(space(CONG, 1, (1, 1, 1)), True)
    assert not two_adic_automatic(space(CONG, 1, (1, 1, 1)), False)
    assert two_adic_automatic(space(EVEN, 5, (-1, -5, 5)), True)


def test_hensel_examples():
    assert hensel_solvable(space(CONG, 1, (1, 1, 1)), 2)
    assert not hensel_solvable(space(CONG, 3, (3, 3, 1)), 3)
    assert not hensel_solvable(space(CONG, 5, (5, 10, 2)), 2)
    with pytest.raises(ValueError):
        hensel_solvable(space(CONG, 1, (1, 1, 1)), INF)


def test_hensel_inconclusive_at_tiny_depth():
    D = space(CONG, 5, (5, 5, 1))
    for p in (2, 5):
        with pytest.raises(InconclusiveError):
            hensel_solvable(D, p, depth=2)
        assert hensel_solvable(D, p, depth=3)


def test_global_solvable_examples():
    for n in (1, 3, 5, 41):
        for t in torsion_images(CONG, n):
            assert global_solvable_everywhere(space(CONG, n, t))
    assert not global_solvable_everywhere(space(CONG, 3, (3, 3, 1)))


def test_rational_point_class():
    # 5 is congruent: (-4, 6) lies on y^2 = x^3 - 25x
    lam = rational_point_class(CONG, 5, -4)
    assert lam == (1, -1, -1)
    assert global_solvable_everywhere(space(CONG, 5, lam))


def test_normal_form_is_a_torsion_translate():
    lam = (-1, 5, -5)
    nf = normal_form(CONG, 5, lam)
    ratio = tuple(squarefree_part(a * b) for a, b in zip(lam, nf))
    assert ratio in torsion_images(CONG, 5)


# -- lemma verdicts against the oracle on random instances ------------------------


@st.composite
def twisted_spaces(draw, case=None):
    a = draw(st.integers(-8, 8))
    b = draw(st.integers(-8, 8))
    if case == ParityCase.ODD:
        e1 = 2 * a + 1
        e2 = 4 * b + (2 - e1) % 4
    elif case == ParityCase.EVEN:
        e1, e2 = 2 * (2 * a + 1), 2 * (2 * b + 1)
    else:
        e1, e2 = 4 * a + 1, 2 * b + 1
    assume(e1 + e2 != 0 and e2 != 0)
    c = CurveTriple(e1, e2, -e1 - e2)
    assert case is None or c.parity_case == case
    n = draw(st.sampled_from([3, 5, 7, 11, 13, 15, 17, 21, 33, 35, 41, 65]))
    base = [-1, 2] + list(prime_factors(abs(c.product) * n))
    d1 = math.prod(draw(st.lists(st.sampled_from(base), max_size=3, unique=True)))
    d2 = math.prod(draw(st.lists(st.sampled_from(base), max_size=3, unique=True)))
    return HomogeneousSpace.make(c, as_twist(n), (d1, d2, squarefree_part(d1 * d2)))


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(twisted_spaces())
def test_p_dividing_n_matches_oracle(D):
    for p in as_twist(D.n).primes:
        if D.curve.product % p:
            assert solvable_at_p_dividing_n(D, p) == hensel_solvable(D, p)


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(twisted_spaces(ParityCase.EVEN))
def test_q_exactly_dividing_e_matches_oracle(D):
    e = D.curve.e
    for i in (1, 2, 3):
        for q in prime_factors(abs(e[i - 1])):
            if q == 2 or D.n % q == 0 or valuation(e[i - 1], q) != 1:
                continue
            # the closed form assumes q divides exactly one e_i
            if sum(x % q == 0 for x in e) != 1:
                continue
            assert solvable_at_q_dividing_e(D, q, i) == hensel_solvable(D, q)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.one_of(twisted_spaces(ParityCase.ODD), twisted_spaces(ParityCase.EVEN)))
def test_two_adic_filter_is_necessary(D):
    if D.curve.parity_case in (ParityCase.ODD, ParityCase.EVEN) and not two_adic_filter(D):
        assert not hensel_solvable(D, 2)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(twisted_spaces())
def test_lemma_route_equals_oracle_route(D):
    assert global_solvable_everywhere(D, use_lemmas=True) == global_solvable_everywhere(D, use_lemmas=False)


def test_good_reduction_primes_fail():
    # a prime outside 2 e1 e2 e3 n in Lambda kills local solvability
    D = space(CONG, 5, (7, 7, 1))
    rep = local_report(D)
    assert not rep.solvable and rep.verdicts[-1].method == "good-reduction"


def test_even_selmer_enumeration_matches_oracle_everywhere():
    n = 17
    base = [-1, 2, 17]
    divs = [math.prod(s) for r in range(4) for s in itertools.combinations(base, r)]
    for d1, d2 in itertools.product(divs, divs):
        D = space(EVEN, n, (d1, d2, squarefree_part(d1 * d2)))
        assert global_solvable_everywhere(D) == global_solvable_everywhere(D, use_lemmas=False)
