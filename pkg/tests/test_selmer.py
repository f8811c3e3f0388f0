import math

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from selmertwist.arith import is_squarefree
from selmertwist.curves import CurveTriple
from selmertwist.f2linalg import F2Matrix
from selmertwist.selmer import (
    HypothesisError,
    check_minimality,
    hypothesis_checks,
    matrix_A,
    matrix_D,
    pure_selmer,
    selmer_group,
    selmer_matrix,
    selmer_rank,
    theorem_for,
)

CONG = CurveTriple(1, 1, -2)
COMPANION = CurveTriple(49, 1, -50)
EVEN1 = CurveTriple(2, 2, -4)
EVEN2 = CurveTriple(-2, -2, 4)


def test_matrix_A_examples():
    assert matrix_A(17).to_lists() == [[0]]
    assert matrix_A(15).to_lists() == [[1, 1], [1, 1]]


@given(st.integers(1, 3000).map(lambda x: 2 * x + 1).filter(is_squarefree))
def test_matrix_A_rows_sum_to_zero(n):
    A = matrix_A(n)
    assert all(sum(row) % 2 == 0 for row in A.to_lists())


def test_matrix_D_examples():
    assert matrix_D(1, 15) == F2Matrix.zeros(2, 2)
    assert matrix_D(2, 5).to_lists() == [[1]]
    assert matrix_D(2, 17).to_lists() == [[0]]
    with pytest.raises(ValueError):
        matrix_D(3, 15)


def test_theorem_dispatch():
    assert theorem_for(CONG) == "odd"
    assert theorem_for(EVEN1) == "even1"
    assert theorem_for(EVEN2) == "even2"
    assert theorem_for(CurveTriple(-1, 4, -3)) == "general"


def test_selmer_matrix_examples():
    assert selmer_matrix(CONG, 3).matrix.to_lists() == [[1, 1], [1, 0]]
    assert selmer_matrix(CONG, 5).matrix.to_lists() == [[1, 1], [1, 1]]
    assert selmer_matrix(CONG, 41).matrix.to_lists() == [[0, 0], [0, 0]]


def test_pure_selmer_examples():
    assert pure_selmer(CONG, 3).dimension == 0
    assert pure_selmer(CONG, 5).dimension == 1
    sel = pure_selmer(CONG, 41)
    assert sel.dimension == 2
    assert set(sel.basis) == {(41, 1, 41), (1, 41, 41)}
    assert selmer_rank(CONG, 41) == 4


def test_minimality():
    assert check_minimality(CONG)
    assert check_minimality(COMPANION)
    assert check_minimality(EVEN1)
    assert not check_minimality(CurveTriple(-1, 4, -3))


def test_order4_curve_rejected():
    with pytest.raises(HypothesisError) as exc:
        selmer_matrix(CurveTriple(-1, 4, -3), 5)
    names = {c.name for c in exc.value.failures}
    assert "no-order-4" in names


def test_unchecked_escape_hatch():
    sm = selmer_matrix(CurveTriple(-1, 4, -3), 5, unchecked=True)
    assert sm.matrix.shape == (2, 2)
    assert any(not c.ok for c in sm.checks)


def test_selmer_group_contains_torsion():
    group = set(selmer_group(CONG, 5))
    assert {(1, 1, 1), (10, 2, 5), (2, -10, -5), (5, -5, -1)} <= group
    assert len(group) == 8


def test_direct_needs_coprime_n():
    with pytest.raises(ValueError):
        pure_selmer(CurveTriple(3, 5, -8), 15, "direct")


def test_encode_decode_roundtrip():
    for c, n in ((CONG, 41 * 17), (EVEN1, 17 * 41), (EVEN2, 17 * 73)):
        sm = selmer_matrix(c, n, unchecked=True)
        for v in pure_selmer(c, n, unchecked=True).kernel_vectors:
            assert sm.encode(sm.decode(v)) == v


def _qualifying(c, limit):
    out = []
    for n in range(3, limit, 2):
        if not is_squarefree(n) or math.gcd(n, c.product) != 1:
            continue
        if all(ch.ok for ch in hypothesis_checks(c, n)):
            out.append(n)
    return out


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.data())
def test_matrix_equals_direct_on_samples(data):
    c = data.draw(st.sampled_from([CONG, EVEN1, EVEN2]))
    n = data.draw(st.sampled_from(_qualifying(c, 400)))
    m = pure_selmer(c, n, "matrix")
    d = pure_selmer(c, n, "direct")
    assert m.dimension == d.dimension
    assert m.elements == d.elements


def test_even_p_star_residues():
    c = CurveTriple(6, 10, -16)
    # 7* = -7 = 3 mod 5 is not a square, while 11* = -11 = 4 mod 5 is
    checks = {ch.name: ch.ok for ch in hypothesis_checks(c, 7)}
    assert not checks["p* residues"]
    checks = {ch.name: ch.ok for ch in hypothesis_checks(c, 11)}
    assert checks["p* residues"]
