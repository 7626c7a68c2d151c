import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor, commutant
from nclp.errors import NotFaithful
from nclp.jordan import JordanMono, Mode, Slot, image_bicommutant, jordan_inverse
from nclp.lp_space import StateDensity, functional_density
from nclp.modular import (
    ModularContext,
    chain_rule_residual,
    check_anticocycle,
    check_ce_cocycle,
    check_centralizer,
    check_cocycle_absolute_value,
    check_hs_conditions,
    cocycle_residual,
    connes_cocycle,
    cosine_family,
    cosine_law_residual,
    group_law_residual,
    kms_symmetry_residual,
    modular_auto,
    phi_identity_residual,
    phi_transform,
    phi_transform_quadrature,
    restricted_state,
    self_polar_form,
    self_polar_integral,
)
from nclp.projections import Symmetrizer, build_positive_projection, trace_ce
from nclp.sampling import random_element, random_state, random_unitary

ALGEBRAS = [AlgebraDescriptor.of(2), AlgebraDescriptor.of(3), AlgebraDescriptor.of(2, 1, weights=(1.0, 0.5))]


@pytest.fixture(params=ALGEBRAS, ids=["M2", "M3", "M2+C"])
def algebra(request):
    return request.param


def test_trace_state_has_trivial_modular_group(algebra, rng):
    ctx = ModularContext(algebra, StateDensity.trace_state(algebra))
    x = random_element(algebra, rng)
    assert modular_auto(ctx, 1.3, x).distance(x) < 1e-12
    assert phi_transform(ctx, x).distance(x) < 1e-12


def test_algebraic_identities(algebra, rng):
    phi = random_state(algebra, rng)
    ctx = ModularContext(algebra, phi)
    x, a, b = (random_element(algebra, rng) for _ in range(3))
    assert group_law_residual(ctx, 0.4, -1.1, x) < 1e-10
    assert cosine_law_residual(ctx, 0.4, -1.1, x) < 1e-10
    assert kms_symmetry_residual(ctx, 0.9, a, b) < 1e-10
    assert phi_identity_residual(ctx, x) < 1e-10
    rho = (modular_auto(ctx, 0.5, x) + modular_auto(ctx, -0.5, x)) * 0.5
    assert cosine_family(ctx, 0.5, x).distance(rho) < 1e-12


def test_closed_forms_match_quadrature(algebra, rng):
    ctx = ModularContext(algebra, random_state(algebra, rng))
    x, a, b = (random_element(algebra, rng) for _ in range(3))
    assert phi_transform(ctx, x).distance(phi_transform_quadrature(ctx, x)) < 1e-6
    assert abs(self_polar_form(ctx, a, b) - self_polar_integral(ctx, a, b)) < 1e-6


def test_cocycle_relations(algebra, rng):
    phi, psi, omega = (random_state(algebra, rng) for _ in range(3))
    assert cocycle_residual(phi, psi, 0.7, -0.3) < 1e-10
    assert chain_rule_residual(phi, psi, omega, 1.2) < 1e-10
    u = connes_cocycle(phi, psi, 0.8)
    assert u.unitary_residual() < 1e-10


def test_cocycle_needs_faithful_states(m2):
    faithful = StateDensity.trace_state(m2)
    pure = StateDensity(m2, m2.element([np.diag([1.0, 0.0])]))
    with pytest.raises(NotFaithful):
        connes_cocycle(pure, faithful, 0.5)
    with pytest.raises(NotFaithful):
        ModularContext(m2, pure)
    assert ModularContext(m2, pure, support_only=True).phi is pure


def test_anticocycle(algebra, rng):
    phi, psi = random_state(algebra, rng), random_state(algebra, rng)
    alpha = JordanMono.transpose(algebra).with_conjugator(random_unitary(algebra, rng))
    report = check_anticocycle(alpha, phi, psi, 0.7)
    assert report.passed(1e-9)


def test_centralizer(algebra, rng):
    phi = random_state(algebra, rng)
    assert check_centralizer(phi, commutant([phi.d], algebra)) < 1e-10
    assert check_centralizer(phi, commutant([algebra.identity()], algebra)) > 1e-6


def test_hs_conditions_on_doubling_trace_state():
    J = JordanMono.doubling()
    psi = StateDensity.trace_state(J.target)
    report = check_hs_conditions(J, psi)
    assert report.passed(1e-8)
    F = trace_ce(J.target, image_bicommutant(J))
    expected = build_positive_projection(J, F, Symmetrizer.uniform(J, 0.5))
    assert report.projection.map.distance(expected.map) < 1e-8


def test_hs_conditions_fail_for_generic_state(rng):
    J = JordanMono.doubling()
    report = check_hs_conditions(J, random_state(J.target, rng))
    assert report.projection is None
    assert report.condition_state is None
    assert max(report.condition_selfpolar, report.condition_cosine) > 1e-3
    assert not report.passed()


def test_hs_conditions_for_pushed_state(rng):
    J = JordanMono(
        AlgebraDescriptor.of(2),
        AlgebraDescriptor.of(2, 2, weights=(1.0, 2.0)),
        (Slot(0, 0, 0, Mode.MULT), Slot(0, 1, 0, Mode.ANTI)),
    )
    F = trace_ce(J.target, image_bicommutant(J))
    P = build_positive_projection(J, F, Symmetrizer.uniform(J, 0.3))
    theta = random_state(J.source, rng)
    density = functional_density(J.target, lambda y: theta.evaluate(jordan_inverse(J, P(y))))
    psi = StateDensity(J.target, density.hermitian_part())
    assert restricted_state(J, psi).d.distance(theta.d) < 1e-10
    report = check_hs_conditions(J, psi)
    assert report.passed(1e-8)
    assert report.projection.map.distance(P.map) < 1e-8


def test_cocycle_absolute_value_and_expectations(rng):
    J = JordanMono(
        AlgebraDescriptor.of(2, 1),
        AlgebraDescriptor.of(3),
        (Slot(0, 0, 0, Mode.MULT), Slot(1, 0, 2, Mode.MULT)),
    )
    F = trace_ce(J.target, image_bicommutant(J))
    P = build_positive_projection(J, F, Symmetrizer.uniform(J, 1.0))
    phi, psi = random_state(J.source, rng), random_state(J.source, rng)
    assert check_cocycle_absolute_value(J, P, phi, psi) < 1e-8
    assert check_ce_cocycle(F, J, phi, psi, 0.6) < 1e-9
