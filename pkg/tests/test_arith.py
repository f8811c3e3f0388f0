from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import jacobi_symbol, primerange

from selmertwist.arith import (
    INF,
    additive_jacobi,
    bad_places,
    class_representative,
    divisors_signed,
    factorize,
    hilbert,
    hilbert_additive,
    is_local_square,
    is_squarefree,
    jacobi,
    legendre_bit,
    m_star,
    sqrt_mod_prime,
    square_class,
    squarefree_part,
    valuation,
)

from oracles import serre_hilbert, serre_hilbert_q, trial_factor

nonzero = st.integers(-10**6, 10**6).filter(bool)
odd_pos = st.integers(1, 10**5).map(lambda x: 2 * x + 1)
SMALL_PRIMES = list(primerange(3, 200))


def test_factorize_examples():
    f = factorize(1)
    assert (f.sign, f.prime_powers) == (1, ())
    f = factorize(-12)
    assert (f.sign, f.prime_powers) == (-1, ((2, 2), (3, 1)))
    assert factorize(30031).prime_powers == ((59, 1), (509, 1))


def test_factorize_rejects_zero():
    with pytest.raises(ValueError):
        factorize(0)


@given(nonzero)
def test_factorize_matches_trial_division(m):
    f = factorize(m)
    assert list(f.prime_powers) == trial_factor(m)
    prod = f.sign
    for p, e in f.prime_powers:
        prod *= p**e
    assert prod == m


def test_squarefree_part_examples():
    assert squarefree_part(18) == 2
    assert squarefree_part(-50) == -2
    assert squarefree_part(1) == 1
    assert squarefree_part(Fraction(3, 4)) == 3
    assert squarefree_part(Fraction(-1, 2)) == -2


@given(nonzero, nonzero)
def test_squarefree_part_is_a_square_class(m, k):
    s = squarefree_part(m)
    assert is_squarefree(abs(s))
    assert squarefree_part(m * k * k) == s
    q = Fraction(m, s)
    assert q > 0 and squarefree_part(q.numerator * q.denominator) == 1


def test_jacobi_examples():
    assert jacobi(1, 15) == 1
    assert jacobi(2, 7) == 1
    assert jacobi(3, 5) == -1
    assert jacobi(5, 15) == 0


@given(st.integers(-10**6, 10**6), odd_pos)
def test_jacobi_matches_sympy(a, b):
    assert jacobi(a, b) == jacobi_symbol(a, b)


@given(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4), odd_pos)
def test_jacobi_multiplicative_in_top(a, c, b):
    assert jacobi(a * c, b) == jacobi(a, b) * jacobi(c, b)


@given(st.integers(-10**4, 10**4), odd_pos, odd_pos)
def test_jacobi_multiplicative_in_bottom(a, b, c):
    assert jacobi(a, b * c) == jacobi(a, b) * jacobi(a, c)


def test_legendre_bit():
    assert legendre_bit(2, 7) == 0
    assert legendre_bit(3, 7) == 1


def test_hilbert_examples():
    assert hilbert_additive(-1, -1, INF) == 1
    assert hilbert_additive(-1, -1, 2) == 1
    assert hilbert_additive(2, 7, 7) == 0
    assert hilbert(-1, -1, INF) == -1


@given(nonzero, nonzero)
def test_hilbert_matches_textbook_formula(a, b):
    for v in bad_places(2 * a * b):
        assert hilbert(a, b, v) == serre_hilbert(a, b, v)


@given(nonzero, nonzero, st.integers(1, 10**3), st.integers(1, 10**3))
def test_hilbert_rationals(a, b, da, db):
    x, y = Fraction(a, da), Fraction(b, db)
    for v in bad_places(2 * a * b * da * db):
        assert hilbert(x, y, v) == serre_hilbert_q(x, y, v)


@given(nonzero, nonzero)
def test_hilbert_product_formula(a, b):
    assert sum(hilbert_additive(a, b, v) for v in bad_places(2 * a * b)) % 2 == 0


@given(nonzero, nonzero, nonzero)
@settings(max_examples=50)
def test_hilbert_bilinear_and_symmetric(a, b, c):
    for v in bad_places(2 * a * b * c):
        assert hilbert_additive(a, b, v) == hilbert_additive(b, a, v)
        assert hilbert_additive(a * c, b, v) == hilbert_additive(a, b, v) ^ hilbert_additive(c, b, v)
        assert hilbert_additive(a, -a, v) == 0


def test_additive_jacobi_examples():
    assert additive_jacobi(5, 1) == 0
    assert additive_jacobi(2, 7) == 0
    assert additive_jacobi(3, 35) == 0
    assert additive_jacobi(3, 5) == 1
    with pytest.raises(ValueError):
        additive_jacobi(3, 15)


@given(st.integers(-10**4, 10**4), odd_pos)
def test_additive_jacobi_is_jacobi(a, b):
    if jacobi(a, b) != 0:
        assert (-1) ** additive_jacobi(a, b) == jacobi(a, b)


def test_m_star():
    assert m_star(5) == 5
    assert m_star(7) == -7
    assert m_star(-3) == -3
    with pytest.raises(ValueError):
        m_star(4)


@given(st.integers(-10**5, 10**5).map(lambda x: 2 * x + 1))
def test_m_star_is_1_mod_4(m):
    assert m_star(m) % 4 == 1 and abs(m_star(m)) == abs(m)


def test_bad_places():
    assert bad_places(1) == [INF, 2]
    assert bad_places(-90) == [INF, 2, 3, 5]


@given(nonzero, st.sampled_from([2] + SMALL_PRIMES))
def test_class_representative_same_class(x, p):
    r = class_representative(x, p)
    assert square_class(r, p) == square_class(x, p)
    assert is_local_square(Fraction(x, r), p)


@given(st.sampled_from(SMALL_PRIMES), st.integers(0, 10**6))
def test_sqrt_mod_prime(p, a):
    r = sqrt_mod_prime(a, p)
    if jacobi(a, p) == -1:
        assert r is None
    else:
        assert (r * r - a) % p == 0


def test_sqrt_mod_large_prime():
    p = 1000003
    r = sqrt_mod_prime(4, p)
    assert r * r % p == 4


def test_divisors_signed():
    assert divisors_signed(6) == [1, -1, 2, -2, 3, -3, 6, -6]


def test_valuation():
    assert valuation(48, 2) == 4
    assert valuation(-45, 3) == 2
    assert valuation(7, 5) == 0
