import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from subrk.polynomial import Polynomial, VectorField, coordinate_field, random_polynomial

coeff = st.integers(-5, 5)


@st.composite
def polys(draw, nvars=3, max_deg=3):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, max_deg)] * nvars), coeff, max_size=6))
    return Polynomial(nvars, terms)


points = st.tuples(*[st.fractions(-3, 3, max_denominator=7)] * 3)


def test_zero_coefficients_dropped():
    p = Polynomial(2, {(1, 0): 0, (0, 1): 2})
    assert dict(p.terms) == {(0, 1): Fraction(2)}


def test_bad_monomials_rejected():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1})
    with pytest.raises(ValueError):
        Polynomial(2, {(-1, 0): 1})


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p - p == Polynomial.zero(3)


@given(polys(), polys(), points)
def test_evaluation_is_a_homomorphism(p, q, pt):
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)


@given(polys(), polys(), st.integers(0, 2))
def test_leibniz_rule(p, q, i):
    assert (p * q).diff(i) == p.diff(i) * q + p * q.diff(i)


@given(polys())
def test_derivatives_commute(p):
    assert p.diff(0).diff(2) == p.diff(2).diff(0)


def test_degree_and_constant_term():
    x, y, z = Polynomial.variables(3)
    p = x * x * y + z * 3 + 7
    assert p.degree() == 3
    assert p.constant_term() == 7


def test_compose_substitution():
    x, y = Polynomial.variables(2)
    p = x * x + y
    q = p.compose([x + y, x - y])
    assert q == (x + y) * (x + y) + x - y


def test_vector_field_bracket_of_heisenberg_frame():
    x, y, z = Polynomial.variables(3)
    one, zero = Polynomial.constant(3), Polynomial.zero(3)
    X = VectorField([one, zero, y * Fraction(-1, 2)])
    Y = VectorField([zero, one, x * Fraction(1, 2)])
    assert X.bracket(Y) == coordinate_field(3, 2)


def test_random_polynomial_is_seeded():
    a = random_polynomial(3, 4, random.Random(5))
    b = random_polynomial(3, 4, random.Random(5))
    assert a == b and a.degree() <= 4
