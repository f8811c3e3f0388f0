import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selmertwist.arith import is_squarefree, prime_factors
from selmertwist.genus import (
    ClassGroupCache,
    CriterionHypothesisError,
    FormClassGroup,
    class_group,
    compose,
    congruent_criterion_even,
    congruent_criterion_odd,
    find_d,
    norm_representation,
    reduce_form,
    reduced_forms,
    redei_h2_h4,
    symbol_2_plus_sqrt2,
    symbol_per_prime,
    symbol_via_lambda,
    two_ranks,
)


def brute_reduced_forms(disc):
    """Reduced forms by exhaustive search over a and b."""
    out = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(a, b, c) == 1:
                out.append((a, b, c))
        a += 1
    return sorted(out)


def test_class_group_examples():
    assert class_group(1).order == 1
    G = class_group(17)
    assert set(G.forms) == {(1, 0, 17), (2, 2, 9), (3, -2, 6), (3, 2, 6)}
    assert G.element_order((3, 2, 6)) == 4
    K = class_group(21)
    assert K.order == 4 and all(K.element_order(f) <= 2 for f in K.forms)


def test_two_ranks_examples():
    r = two_ranks(class_group(1))
    assert (r.h2, r.h4, r.h8) == (0, 0, 0)
    r = two_ranks(class_group(17))
    assert (r.h2, r.h4, r.h8) == (1, 1, 0)
    r = two_ranks(class_group(41))
    assert (r.h2, r.h4, r.h8) == (1, 1, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3000).filter(is_squarefree))
def test_reduced_forms_match_enumeration(n):
    assert sorted(reduced_forms(-4 * n)) == brute_reduced_forms(-4 * n)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 1500).filter(is_squarefree), st.data())
def test_composition_is_a_group_law(n, data):
    G = class_group(n)
    f, g, h = (data.draw(st.sampled_from(G.forms)) for _ in range(3))
    assert compose(f, g) == compose(g, f)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(f, G.identity) == f
    inv = reduce_form((f[0], -f[1], f[2]))
    assert compose(f, inv) == G.identity
    assert compose(f, g) in G.forms


def test_redei_examples():
    assert redei_h2_h4(17) == (1, 1)
    assert redei_h2_h4(13) == (1, 0)
    assert redei_h2_h4(21) == (2, 0)
    with pytest.raises(ValueError):
        redei_h2_h4(15)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 1000).map(lambda x: 4 * x + 1).filter(is_squarefree))
def test_redei_matches_class_group(n):
    r = two_ranks(class_group(n))
    assert redei_h2_h4(n) == (r.h2, r.h4)


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "groups.bin"
    cache = ClassGroupCache(path)
    G = class_group(1105, cache)
    class_group(1105, cache)
    again = ClassGroupCache(path)
    assert again.get(-4 * 1105) == G.forms
    assert class_group(1105, again) == G
    # one record: 12 header bytes plus 24 per form
    assert path.stat().st_size == 12 + 24 * G.order


def test_find_d_even():
    assert find_d(17, "even-thm").unique() == 17
    assert find_d(41, "even-thm").unique() == 41
    choice = find_d(161, "even-thm")
    assert choice.unique() == -7
    assert all(d % 4 == 1 for d in choice.candidates["signed"])


def test_find_d_odd_readings():
    c = find_d(17, "odd-thm")
    assert c.candidates == {"strict": [], "scoped": [1, 17]}
    assert c.ambiguous
    assert c.unique("strict") is None
    assert c.unique("scoped") == 1


def test_symbol_examples():
    for route in ("per-prime", "lambda"):
        assert symbol_2_plus_sqrt2(17, route) == 1
        assert symbol_2_plus_sqrt2(41, route) == -1
        assert symbol_2_plus_sqrt2(1, route) == 1
    assert norm_representation(17) == (5, 2)
    with pytest.raises(ValueError):
        symbol_per_prime(13)
    with pytest.raises(ValueError):
        symbol_per_prime(17 * 5 * 13)


SPECIAL = [m for m in range(1, 5000, 8) if is_squarefree(m)
           and all(p % 8 in (1, 7) for p in prime_factors(m))]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SPECIAL))
def test_symbol_root_choice_and_routes(m):
    s = symbol_per_prime(m)
    assert s == symbol_per_prime(m, root_choice=1)
    assert s == symbol_via_lambda(m)
    assert (s == 1) == (m % 16 == 1)


def test_congruent_criterion_odd_examples():
    r = congruent_criterion_odd(17)
    assert r.value and r.h4 == 1 and r.h8 == 0
    r = congruent_criterion_odd(41)
    assert not r.value and r.h8 == 1
    assert not congruent_criterion_odd(5 * 13).value
    assert congruent_criterion_odd(5 * 37).value
    with pytest.raises(CriterionHypothesisError):
        congruent_criterion_odd(7 * 23)


def test_congruent_criterion_odd_strict_reading_has_no_divisor_for_primes():
    r = congruent_criterion_odd(17, reading="strict")
    assert r.d is None and not r.value


def test_congruent_criterion_even_examples():
    r = congruent_criterion_even(41)
    assert r.value and r.d == 41 and r.d % 16 == 9
    r = congruent_criterion_even(17)
    assert not r.value and r.d == 17
    with pytest.raises(CriterionHypothesisError):
        congruent_criterion_even(5 * 13)


def test_form_class_group_is_frozen():
    G = class_group(17)
    assert isinstance(G, FormClassGroup)
    with pytest.raises(AttributeError):
        G.discriminant = 0
