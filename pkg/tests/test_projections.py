import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor, commutant
from nclp.errors import (
    InvalidSymmetrizer,
    NotFaithful,
    NotIncreasing,
    NotInvariant,
    OutsideBicommutant,
    SingularLambda,
)
from nclp.isometry import random_projection_data
from nclp.jordan import JordanMono, Mode, Slot, image_bicommutant
from nclp.lp_space import StateDensity
from nclp.projections import (
    Symmetrizer,
    build_positive_projection,
    check_conditional_expectation,
    check_positive_projection,
    check_stormer,
    factor_projection,
    paving_demo,
    state_ce,
    symmetrize,
    trace_ce,
)
from nclp.sampling import random_algebra, random_element, random_jordan, random_state, random_unitary_matrix


@pytest.fixture
def diagonal(m2):
    return commutant([m2.element([np.diag([1.0, 2.0])])])


def projection_cases(count=5, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        J = random_jordan(random_algebra(rng, max_blocks=2, max_dim=2), rng, max_copies=2)
        yield (J,) + random_projection_data(J, rng)


def test_trace_ce_keeps_the_diagonal(m2, diagonal, rng):
    E = trace_ce(m2, diagonal)
    x = random_element(m2, rng)
    expected = m2.element([np.diag(np.diag(x.blocks[0]))])
    assert E(x).distance(expected) < 1e-12
    assert check_conditional_expectation(E, samples=20, rng=rng).passed()


def test_state_ce_preserves_its_state(m2, diagonal, rng):
    phi = StateDensity(m2, m2.element([np.diag([0.7, 0.3])]))
    E = state_ce(m2, diagonal, phi)
    report = check_conditional_expectation(E, samples=20, rng=rng)
    assert report.passed()
    assert report.state < 1e-12


def test_state_ce_needs_invariant_range(m2, diagonal):
    phi = StateDensity(m2, m2.element([np.array([[0.6, 0.2], [0.2, 0.4]])]))
    with pytest.raises(NotInvariant) as info:
        state_ce(m2, diagonal, phi)
    assert info.value.residual > 1e-3


def test_state_ce_needs_faithful_state(m2, diagonal):
    phi = StateDensity(m2, m2.element([np.diag([1.0, 0.0])]))
    with pytest.raises(NotFaithful):
        state_ce(m2, diagonal, phi)


def test_symmetrizer_validation():
    J = JordanMono.doubling()
    with pytest.raises(InvalidSymmetrizer):
        Symmetrizer.uniform(J, 1.5)
    with pytest.raises(InvalidSymmetrizer):
        Symmetrizer(J, J.source.element([np.diag([0.2, 0.4])]))
    with pytest.raises(SingularLambda) as info:
        Symmetrizer.uniform(J, 0.0)
    assert info.value.margin == 0.0
    # one-sided blocks carry no choice
    assert Symmetrizer.uniform(JordanMono.identity(AlgebraDescriptor.of(2)), 0.3).values == (1.0,)


def test_symmetrize_outside_bicommutant():
    J = JordanMono.doubling()
    S = Symmetrizer.uniform(J, 0.5)
    with pytest.raises(OutsideBicommutant):
        symmetrize(S, J.target.matrix_unit(0, 0, 3))
    x = J.source.element([np.array([[1.0, 2.0], [0.5, -1.0]])])
    assert symmetrize(S, J(x)).distance(J(x)) < 1e-12


def test_positive_projections_and_stormer_identities(rng):
    for J, F, S, P in projection_cases():
        assert check_positive_projection(P, samples=20, rng=rng).passed(1e-8)
        assert check_stormer(P, samples=5, rng=rng).passed(1e-8)


def test_random_expectations_preserve_their_state_on_padded_targets(rng):
    # one padding row: J(1) != 1
    J = JordanMono(AlgebraDescriptor.of(2), AlgebraDescriptor.of(3), (Slot(0, 0, 0, Mode.MULT),))
    for _ in range(5):
        F, _, _ = random_projection_data(J, rng)
        assert F.preserved_state.evaluate(F(J.target.identity())) == pytest.approx(F.preserved_state.mass())
        assert check_conditional_expectation(F, samples=20, rng=rng).passed(1e-8)
    for J, F, S, P in projection_cases():
        assert check_conditional_expectation(F, samples=20, rng=rng).state < 1e-8


def test_factorization_round_trip():
    for J, F, S, P in projection_cases():
        fac = factor_projection(P)
        assert fac.conditional_expectation.map.distance(F.map) < 1e-8
        assert max(abs(a - b) for a, b in zip(fac.symmetrizer.values, S.values)) < 1e-9
        assert fac.reconstruction_residual < 1e-9


def test_build_rejects_foreign_expectation(m2, diagonal):
    J = JordanMono.identity(m2)
    with pytest.raises(OutsideBicommutant):
        build_positive_projection(J, trace_ce(m2, diagonal), Symmetrizer.uniform(J, 1.0))
    full = trace_ce(m2, image_bicommutant(J))
    P = build_positive_projection(J, full, Symmetrizer.uniform(J, 1.0))
    assert np.abs(P.map.matrix - np.eye(4)).max() < 1e-12


def test_paving_along_a_chain():
    rng = np.random.default_rng(3)
    algebra = AlgebraDescriptor.of(4)
    u = random_unitary_matrix(rng, 4)
    chain = [algebra.element([u[:, :k] @ u[:, :k].conj().T]) for k in range(1, 5)]
    report = paving_demo(algebra, chain, random_state(algebra, rng), random_element(algebra, rng))
    assert report.terminal < 1e-12
    assert report.mass_monotone
    assert report.mass_defects[-1] == pytest.approx(0.0, abs=1e-12)

    weights = np.array([0.1, 0.2, 0.3, 0.4])
    aligned = StateDensity(algebra, algebra.element([(u * weights) @ u.conj().T]))
    assert paving_demo(algebra, chain, aligned).distance_monotone


def test_paving_rejects_bad_chains(m2):
    theta = StateDensity.trace_state(m2)
    e = m2.matrix_unit(0, 0, 0)
    with pytest.raises(NotIncreasing):
        paving_demo(m2, [m2.identity(), e], theta)
    with pytest.raises(NotIncreasing):
        paving_demo(m2, [e], theta)
    with pytest.raises(NotIncreasing):
        paving_demo(m2, [], theta)
