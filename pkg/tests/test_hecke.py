from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphlab.errors import ContextMismatch
from sphlab.hecke import (
    HeckeElement,
    convolve,
    involve,
    l1_norm,
    mass,
    modular_function,
    structure_constants,
)
from sphlab.padic import GroupElement, PrimeContext
from sphlab.cosets import count_for

C22 = PrimeContext(2, 2)
C23 = PrimeContext(2, 3)


@pytest.mark.parametrize(
    "p, n, m, expected",
    [
        (2, 2, (1, -1), {(2, -2): 1, (1, -1): 1, (0, 0): 6}),
        (3, 2, (1, -1), {(2, -2): 1, (1, -1): 2, (0, 0): 12}),
        (2, 3, (1, 0, -1), {(2, 0, -2): 1, (2, -1, -1): 3, (1, 1, -2): 3, (1, 0, -1): 9, (0, 0, 0): 42}),
    ],
)
def test_known_structure_constants(p, n, m, expected):
    assert structure_constants(m, m, PrimeContext(p, n)) == expected


def test_unit_is_identity():
    f = HeckeElement(C23, {(1, 0, -1): Fraction(1, 3), (0, 0, 0): 2})
    one = HeckeElement.unit(C23)
    assert one * f == f and f * one == f


def test_commutative_on_mixed_pair():
    a = structure_constants((2, -1, -1), (1, 0, -1), C23)
    b = structure_constants((1, 0, -1), (2, -1, -1), C23)
    assert a == b


def test_mass_identity():
    sc = structure_constants((2, -1, -1), (1, 1, -2), C23)
    assert mass(sc, C23) == count_for((2, -1, -1), C23) * count_for((1, 1, -2), C23)


def test_modular_function_is_one():
    g = GroupElement.pi(C23, (2, -1, -1))
    assert modular_function(g) == 1


def test_involution():
    f = HeckeElement(C23, {(2, -1, -1): 1j, (0, 0, 0): 3})
    star = involve(f)
    assert star[(1, 1, -2)] == -1j and star[(0, 0, 0)] == 3
    assert involve(star) == f


def test_involution_antimultiplicative():
    f = HeckeElement(C22, {(1, -1): 2 + 1j, (0, 0): 1})
    g = HeckeElement(C22, {(1, -1): 1, (2, -2): -1j})
    lhs = involve(f * g)
    rhs = involve(g) * involve(f)
    assert lhs.almost_equal(rhs, 1e-12)


def test_l1_norm_exact():
    f = HeckeElement(C22, {(1, -1): Fraction(-1, 2), (0, 0): 1})
    assert l1_norm(f) == 4


def test_l1_submultiplicative():
    f = HeckeElement(C22, {(1, -1): 1, (0, 0): -2})
    assert l1_norm(f * f) <= l1_norm(f) ** 2


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        HeckeElement.unit(C22) + HeckeElement.unit(PrimeContext(3, 2))


def test_json_round_trip():
    f = HeckeElement(C23, {(1, 0, -1): 3, (0, 0, 0): 0.5 + 2j})
    g = HeckeElement.from_json(C23, f.to_json())
    assert g.almost_equal(f)


def test_zero_coefficients_dropped():
    f = HeckeElement(C22, {(1, -1): 0, (0, 0): 1})
    assert f.support == [(0, 0)]


coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4)
basis2 = st.sampled_from([(0, 0), (1, -1), (2, -2)])


def elements2():
    return st.dictionaries(basis2, coeff, max_size=2).map(lambda d: HeckeElement(C22, d))


@settings(max_examples=25)
@given(elements2(), elements2())
def test_commutative(f, g):
    assert f * g == g * f


@settings(max_examples=15)
@given(elements2(), elements2(), elements2())
def test_distributive(f, g, h):
    assert f * (g + h) == f * g + f * h


@settings(max_examples=10)
@given(elements2(), elements2())
def test_l1_norm_is_a_norm(f, g):
    assert l1_norm(f + g) <= l1_norm(f) + l1_norm(g)
    assert l1_norm(f * g) <= l1_norm(f) * l1_norm(g)
