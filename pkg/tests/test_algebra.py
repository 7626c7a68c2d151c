import numpy as np
import pytest
from numpy.testing import assert_allclose

from nclp.algebra import (
    AlgebraDescriptor,
    SuperOperator,
    bicommutant,
    center,
    commutant,
    functional_calculus,
    generated_algebra,
    minimal_central_projections,
    polar,
    support,
    supports,
)
from nclp.errors import DimensionMismatch, NotPositive
from nclp.sampling import random_element, random_psd, random_unitary


@pytest.mark.parametrize(
    "dims, weights",
    [
        ((), ()),
        ((2, 0), (1.0, 1.0)),
        ((2,), (0.0,)),
        ((2, 2), (1.0,)),
    ]
)
def test_descriptor_rejects_bad_shapes(dims, weights):
    with pytest.raises(DimensionMismatch):
        AlgebraDescriptor(dims, weights)


def test_weighted_trace(mixed):
    x = mixed.element([np.array([[1, 2], [3, 4]]), np.array([[5]])])
    assert x.trace() == pytest.approx(5 + 0.5 * 5)
    assert mixed.dimension == 5


def test_coordinates_are_isometric(mixed, rng):
    a, b = random_element(mixed, rng), random_element(mixed, rng)
    assert mixed.inner(a, b) == pytest.approx((a.adjoint() @ b).trace())
    assert mixed.from_vector(a.to_vector()).distance(a) < 1e-14


def test_basis_is_orthonormal(mixed):
    gram = np.array([[mixed.inner(a, b) for b in mixed.basis] for a in mixed.basis])
    assert_allclose(gram, np.eye(mixed.dimension), atol=1e-14)
    hermitian = mixed.hermitian_basis
    assert len(hermitian) == mixed.dimension
    assert all(h.hermitian_residual() < 1e-15 for h in hermitian)


def test_element_shape_checked(m2):
    with pytest.raises(DimensionMismatch):
        m2.element([np.eye(3)])


def test_functional_calculus_powers(m2, rng):
    h = random_psd(m2, rng)
    root = functional_calculus(h, 0.5)
    assert (root @ root).distance(h) < 1e-12
    assert functional_calculus(functional_calculus(h, 3.0), 1 / 3).distance(h) < 1e-10


def test_functional_calculus_keeps_support_of_rank_one_elements(m2, rng):
    for _ in range(50):
        u = random_unitary(m2, rng)
        x = u @ m2.element([np.diag([1.0, 0.0])]) @ u.adjoint()
        for alpha in (1 / 3, 0.5, 3.0):
            fx = functional_calculus(x, alpha)
            assert support(fx).distance(support(x)) < 1e-9
            assert fx.distance(x) < 1e-9


def test_functional_calculus_rejects_non_positive(m2):
    with pytest.raises(NotPositive) as info:
        functional_calculus(m2.element([np.diag([1.0, -0.5])]), 2.0)
    assert info.value.margin == pytest.approx(-0.5)


def test_polar_and_supports(mixed, rng):
    x = random_element(mixed, rng)
    x = x @ mixed.element([np.diag([1.0, 0.0]), np.eye(1)])
    w, modulus = polar(x)
    assert (w @ modulus).distance(x) < 1e-12
    assert (w.adjoint() @ w).distance(support(modulus)) < 1e-10
    left, right = supports(x)
    assert (left @ x).distance(x) < 1e-12
    assert (x @ right).distance(x) < 1e-12
    assert right.trace().real == pytest.approx(1.0 + 0.5)


def test_commutant_of_diagonal_unit(m2):
    A = commutant([m2.matrix_unit(0, 0, 0)])
    assert A.dimension == 2
    assert A.contains(m2.element([np.diag([2.0, -1.0])]))
    assert not A.contains(m2.matrix_unit(0, 0, 1))


def test_full_algebra_has_trivial_commutant(mixed):
    A = commutant(mixed.basis)
    assert A.dimension == mixed.num_blocks
    assert bicommutant(mixed.basis).dimension == mixed.dimension


def test_generated_algebra_is_non_unital(m2):
    e = m2.matrix_unit(0, 0, 0)
    A = generated_algebra([e])
    assert A.dimension == 1
    assert A.unit.distance(e) < 1e-12
    assert A.closure_residual() < 1e-12


def test_minimal_central_projections_sum_to_unit(mixed):
    A = generated_algebra(mixed.basis)
    assert center(A).dimension == 2
    projections = minimal_central_projections(A)
    assert len(projections) == 2
    total = projections[0] + projections[1]
    assert total.distance(mixed.identity()) < 1e-10
    assert (projections[0] @ projections[1]).op_norm() < 1e-10


def test_superoperator_adjoint_and_compose(mixed, rng):
    K = SuperOperator(mixed, mixed, rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    a, b = random_element(mixed, rng), random_element(mixed, rng)
    assert mixed.inner(K(a), b) == pytest.approx(mixed.inner(a, K.adjoint()(b)))
    twice = K.compose(K)
    assert twice(a).distance(K(K(a))) < 1e-12
    with pytest.raises(DimensionMismatch):
        K(random_element(AlgebraDescriptor.of(2), rng))
