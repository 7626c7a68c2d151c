import math

import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor
from nclp.errors import DimensionMismatch, ExponentMismatch, NotPositive
from nclp.lp_space import (
    LpElement,
    StateDensity,
    clarkson_equal,
    conjugate_exponent,
    density_identify,
    dual_pairing,
    functional_density,
    lp_norm,
    orthogonal,
    positive_decompose,
    schatten_norm,
)
from nclp.sampling import random_element, random_projection_pair, random_psd


@pytest.mark.parametrize("p, q", [(1.0, math.inf), (2.0, 2.0), (3.0, 1.5), (math.inf, 1.0)])
def test_conjugate_exponent(p, q):
    assert conjugate_exponent(p) == q


def test_weighted_schatten_norm():
    algebra = AlgebraDescriptor.of(1, 1, weights=(2.0, 3.0))
    x = algebra.element([np.array([[1.0]]), np.array([[-2.0]])])
    assert schatten_norm(x, 2) == pytest.approx(math.sqrt(2 * 1 + 3 * 4))
    assert schatten_norm(x, 1) == pytest.approx(2 + 6)
    assert schatten_norm(x, math.inf) == pytest.approx(2.0)


def test_lp_norm_of_projection_is_trace_root(mixed):
    q = mixed.element([np.diag([1.0, 0.0]), np.eye(1)])
    # τ(q) = 1 + 0.5
    for p in (1.0, 1.5, 3.0):
        assert lp_norm(LpElement(q, p)) == pytest.approx(1.5 ** (1 / p))


def test_lp_element_validation(m2, rng):
    x = random_element(m2, rng)
    with pytest.raises(ExponentMismatch):
        LpElement(x, 0.5)
    with pytest.raises(ExponentMismatch):
        LpElement(x, 3) + LpElement(x, 4)
    with pytest.raises(DimensionMismatch):
        LpElement(x, 3) + LpElement(random_element(AlgebraDescriptor.of(3), rng), 3)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, 4.0])
def test_clarkson_equality_exactly_for_orthogonal_pairs(mixed, rng, p):
    for _ in range(20):
        q, rest = random_projection_pair(mixed, rng)
        xi = LpElement(q @ random_element(mixed, rng) @ q, p)
        eta = LpElement(rest @ random_element(mixed, rng) @ rest, p)
        assert orthogonal(xi, eta).orthogonal
        assert clarkson_equal(xi, eta).relative_gap < 1e-9

    x = LpElement(mixed.element([np.array([[1, 0], [0, 0]]), np.zeros((1, 1))]), p)
    y = LpElement(mixed.element([np.array([[0.5, 0.5], [0.5, 0.5]]), np.zeros((1, 1))]), p)
    assert not orthogonal(x, y).orthogonal
    assert clarkson_equal(x, y).relative_gap > 1e-4


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_round_off_partner_is_orthogonal(m2, rng, p):
    xi = LpElement(m2.element([np.array([[1.0, 0.3], [0.2, 0.5]])]), p)
    eta = LpElement(m2.element([1e-17 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))]), p)
    check = orthogonal(xi, eta)
    assert check.orthogonal and check.residual < 1e-12
    assert clarkson_equal(xi, eta).equal


def test_complements_are_exact(mixed, rng):
    for _ in range(20):
        q, rest = random_projection_pair(mixed, rng)
        assert (q + rest).distance(mixed.identity()) < 1e-12
        assert (q @ rest).op_norm() < 1e-12


def test_parallelogram_law_at_two(mixed, rng):
    xi, eta = (LpElement(random_element(mixed, rng), 2) for _ in range(2))
    assert clarkson_equal(xi, eta).equal


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_holder_inequality(mixed, rng, p):
    q = conjugate_exponent(p)
    for _ in range(20):
        xi = LpElement(random_element(mixed, rng), p)
        other = random_element(mixed, rng)
        eta = other if math.isinf(q) else LpElement(other, q)
        assert abs(dual_pairing(xi, eta)) <= schatten_norm(xi.element, p) * schatten_norm(other, q) + 1e-12


def test_dual_pairing_needs_conjugate_exponents(m2, rng):
    x = random_element(m2, rng)
    with pytest.raises(ExponentMismatch):
        dual_pairing(LpElement(x, 3), LpElement(x, 3))
    with pytest.raises(ExponentMismatch):
        dual_pairing(LpElement(x, 3), x)


def test_positive_decomposition(mixed, rng):
    xi = LpElement(random_element(mixed, rng), 3)
    h1, h2, h3, h4 = positive_decompose(xi)
    rebuilt = (h1.element - h2.element) + (h3.element - h4.element) * 1j
    assert rebuilt.distance(xi.element) < 1e-12
    for h in (h1, h2, h3, h4):
        assert h.element.is_positive()
    assert orthogonal(h1, h2).orthogonal
    assert orthogonal(h3, h4).orthogonal


def test_state_density(mixed, rng):
    phi = StateDensity.trace_state(mixed)
    assert phi.mass() == pytest.approx(1.0)
    assert phi.is_faithful()
    with pytest.raises(NotPositive):
        StateDensity(mixed, mixed.element([np.diag([1.0, -1.0]), np.eye(1)]))

    h = random_psd(mixed, rng)
    identified = density_identify(h, 3)
    assert identified.to_lp(3).element.distance(h) < 1e-10


def test_functional_density(mixed, rng):
    a = random_element(mixed, rng)
    D = functional_density(mixed, lambda y: (a @ y).trace())
    assert D.distance(a) < 1e-12
    y = random_element(mixed, rng)
    assert (D @ y).trace() == pytest.approx((a @ y).trace())
