from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphlab.errors import ContextMismatch, InvalidCoweight, NonUnimodular, SphlabError
from sphlab.padic import (
    INF,
    GroupElement,
    PrimeContext,
    as_fraction,
    cartan_decompose,
    cartan_label,
    check_coweight,
    dominant_coweights,
    dual_coweight,
    is_upper_triangular,
    iwasawa_decompose,
    iwasawa_valuation,
    mat_det,
    mat_inv,
    mat_mul,
    identity,
    to_matrix,
    valuation,
)
from strategies import group_elements, integral_unimodular

C22 = PrimeContext(2, 2)
C23 = PrimeContext(2, 3)
C33 = PrimeContext(3, 3)


def test_prime_context_validation():
    with pytest.raises(SphlabError):
        PrimeContext(4, 2)
    with pytest.raises(SphlabError):
        PrimeContext(2, 1)


@pytest.mark.parametrize(
    "x, p, v",
    [(12, 2, 2), (Fraction(3, 8), 2, -3), (Fraction(5, 9), 3, -2), (7, 3, 0), (0, 5, INF)],
)
def test_valuation(x, p, v):
    assert valuation(x, p) == v


def test_floats_rejected():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    assert as_fraction("3/4") == Fraction(3, 4)


def test_group_element_needs_det_one():
    with pytest.raises(NonUnimodular):
        GroupElement(C22, [[2, 0], [0, 1]])
    g = GroupElement(C22, [[2, 0], [0, "1/2"]])
    assert (g @ g.inverse()).entries == identity(2)


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        GroupElement.identity(C22) @ GroupElement.identity(PrimeContext(3, 2))


def test_json_round_trip():
    g = GroupElement(C23, [[2, 1, 0], [0, "1/2", "3/4"], [0, 0, 1]])
    assert GroupElement.from_json(C23, g.to_json()) == g
    assert g.to_json()[0][0] == "2/1"


def test_coweight_checks():
    assert check_coweight((1, 0, -1), 3) == (1, 0, -1)
    with pytest.raises(InvalidCoweight):
        check_coweight((0, 1, -1), 3)
    with pytest.raises(InvalidCoweight):
        check_coweight((1, 1, -1), 3)
    assert dual_coweight((2, -1, -1)) == (1, 1, -2)


def test_dominant_grid():
    assert dominant_coweights(2, 2) == [(0, 0), (1, -1)]
    assert dominant_coweights(3, 2) == [(0, 0, 0), (1, 0, -1)]
    assert set(dominant_coweights(3, 3)) == {(0, 0, 0), (1, 0, -1), (2, -1, -1), (1, 1, -2)}


def test_cartan_of_weyl_element_is_trivial():
    w = GroupElement(C22, [[0, 1], [-1, 0]])
    assert cartan_label(w) == (0, 0)


def test_cartan_small_example():
    g = GroupElement(C22, [[2, 1], [0, "1/2"]])
    form = cartan_decompose(g)
    assert form.m == (1, -1)
    assert form.reconstruct() == g
    assert form.u1.is_integral() and form.u2.is_integral()


def test_iwasawa_small_example():
    g = GroupElement(C22, [[0, 1], [-1, 0]])
    form = iwasawa_decompose(g)
    assert form.hval == (0, 0)
    assert form.reconstruct() == g


def test_triangular_inverse_matches_general():
    a = to_matrix([[2, 3, 5], [0, Fraction(1, 3), 7], [0, 0, Fraction(3, 2)]])
    inv = mat_inv(a)
    assert mat_mul(a, inv) == identity(3)
    b = to_matrix([[2, 3, 5], [1, Fraction(1, 3), 7], [0, 0, Fraction(3, 2)]])
    assert not is_upper_triangular(b)
    assert mat_mul(b, mat_inv(b)) == identity(3)


@given(group_elements(C23))
def test_cartan_reconstructs(g):
    form = cartan_decompose(g)
    assert form.reconstruct() == g
    assert form.u1.is_integral() and form.u2.is_integral()
    assert mat_det(form.u1.entries) == 1 and mat_det(form.u2.entries) == 1
    assert list(form.m) == sorted(form.m, reverse=True) and sum(form.m) == 0


@given(group_elements(C33), integral_unimodular(C33), integral_unimodular(C33))
def test_cartan_label_is_bi_invariant(g, u, v):
    assert cartan_label(u @ g @ v) == cartan_label(g)


@given(group_elements(C22))
def test_cartan_label_of_inverse_is_dual(g):
    assert cartan_label(g.inverse()) == dual_coweight(cartan_label(g))


@given(group_elements(C23))
def test_iwasawa_reconstructs(g):
    form = iwasawa_decompose(g)
    assert form.reconstruct() == g
    assert form.u.is_integral()
    nm = form.nmat.entries
    assert is_upper_triangular(nm) and all(nm[k][k] == 1 for k in range(3))
    assert sum(form.hval) == 0
    assert all(valuation(x, 2) == 0 for x in form.hunit)


@given(group_elements(C33), integral_unimodular(C33))
def test_iwasawa_left_u_invariant(g, u):
    assert iwasawa_valuation(u @ g) == iwasawa_valuation(g)


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_pi_multiplicative(a, b):
    x = GroupElement.pi(C23, (a, 0, -a))
    y = GroupElement.pi(C23, (b, -b, 0))
    assert (x @ y) == GroupElement.pi(C23, (a + b, -b, -a))
