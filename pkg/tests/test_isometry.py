import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor
from nclp.errors import DecompositionFailure, ExponentMismatch, InvalidTriple, NotIsometry
from nclp.isometry import (
    LinearMap,
    YeadonTriple,
    check_duality,
    check_orthogonality_preservation,
    companion_projection,
    construct_typical,
    construct_yeadon,
    decompose_isometry,
    decompose_l1,
    embed_via_ce,
    embed_via_reference,
    isometry_from_antiiso,
    normalize_typical,
    random_typical_triple,
    symmetric_embedding,
    typical_to_yeadon,
    uniqueness_residuals,
    uniqueness_roundtrip,
    verify_isometry,
    yeadon_to_typical,
)
from nclp.jordan import JordanMono, Mode, Slot, image_bicommutant
from nclp.lp_space import LpElement, StateDensity, schatten_norm
from nclp.projections import trace_ce
from nclp.sampling import (
    random_algebra,
    random_element,
    random_jordan,
    random_state,
    random_unitary,
    random_unitary_matrix,
)


def typical_cases(p, count=4, seed=5):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        J = random_jordan(random_algebra(rng, max_blocks=2, max_dim=2), rng, max_copies=2)
        yield random_typical_triple(J, rng, p), rng


@pytest.fixture
def diagonal_inclusion():
    """C ⊕ C → M₂ onto the diagonal."""
    return JordanMono(
        AlgebraDescriptor.of(1, 1),
        AlgebraDescriptor.of(2),
        (Slot(0, 0, 0, Mode.MULT), Slot(1, 0, 1, Mode.MULT)),
    )


def test_identity_triple_gives_identity_map(mixed):
    J = JordanMono.identity(mixed)
    T = construct_yeadon(YeadonTriple(mixed.identity(), mixed.identity(), J, 3.0))
    assert np.abs(T.matrix - np.eye(mixed.dimension)).max() < 1e-12
    assert verify_isometry(T, trials=20).passed()


def test_invalid_yeadon_triple(m2):
    J = JordanMono.identity(m2)
    with pytest.raises(InvalidTriple) as info:
        construct_yeadon(YeadonTriple(m2.identity() * 2, m2.identity(), J, 3.0))
    assert info.value.invariant == "partial_isometry"


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_typical_triples_build_isometries(p):
    for t, _ in typical_cases(p):
        T = construct_typical(t)
        report = verify_isometry(T, trials=30, seed=1)
        assert report.max_rel_deviation < 1e-9
        assert check_orthogonality_preservation(T, trials=10) < 1e-8


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_typical_and_yeadon_constructions_agree(p):
    for t, rng in typical_cases(p):
        typical = construct_typical(t)
        yeadon = construct_yeadon(typical_to_yeadon(t))
        assert typical.distance(yeadon) < 1e-9
        embedding = symmetric_embedding(t.J, t.P, random_state(t.J.source, rng), p)
        symmetric = LinearMap.from_function(t.J.source, t.J.target, lambda x: t.w @ embedding(x), p=p)
        assert typical.distance(symmetric) < 1e-9


def test_verify_workers_do_not_change_the_result():
    t, _ = next(typical_cases(3.0))
    T = construct_typical(t)
    assert verify_isometry(T, trials=16, seed=4, workers=1) == verify_isometry(T, trials=16, seed=4, workers=4)


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_yeadon_round_trip(p):
    for t, _ in typical_cases(p):
        y = typical_to_yeadon(t)
        found = decompose_isometry(construct_yeadon(y))
        assert found.w.distance(y.w) < 1e-8
        assert found.B.distance(y.B) < 1e-8
        assert found.J.superoperator.distance(y.J.superoperator) < 1e-8


def test_decomposing_the_identity(mixed):
    T = LinearMap(mixed, mixed, np.eye(mixed.dimension), p=3.0)
    y = decompose_isometry(T)
    assert y.w.distance(mixed.identity()) < 1e-12
    assert y.B.distance(mixed.identity()) < 1e-12
    assert np.abs(y.J.superoperator.matrix - np.eye(mixed.dimension)).max() < 1e-9


def test_decompose_rejects_non_isometries(m2):
    T = LinearMap(m2, m2, 2 * np.eye(4), p=3.0)
    with pytest.raises(NotIsometry) as info:
        decompose_isometry(T)
    assert info.value.deviation == pytest.approx(1.0)
    with pytest.raises(ExponentMismatch):
        decompose_isometry(LinearMap(m2, m2, np.eye(4), p=3.0), p=1.0)


def test_hilbert_space_rotations_are_not_typical(m2):
    # every unitary of L²(M₂) is an isometry, but mixing matrix units is not Jordan
    rng = np.random.default_rng(2)
    for _ in range(10):
        T = LinearMap(m2, m2, random_unitary_matrix(rng, m2.dimension), p=2.0)
        assert verify_isometry(T, trials=20).passed(1e-9)
        with pytest.raises(DecompositionFailure):
            decompose_isometry(T)


def test_l1_paths_agree():
    for t, _ in typical_cases(1.0):
        T = construct_typical(t)
        direct = decompose_l1(T)
        via_yeadon = yeadon_to_typical(decompose_isometry(T))
        assert direct.w.distance(via_yeadon.w) < 1e-8
        assert direct.J.superoperator.distance(via_yeadon.J.superoperator) < 1e-8
        assert direct.P.map.distance(via_yeadon.P.map) < 1e-8


def test_l1_decomposition_needs_p_one(m2):
    with pytest.raises(ExponentMismatch):
        decompose_l1(LinearMap(m2, m2, np.eye(4), p=3.0))


def test_uniqueness_and_normalization():
    t, _ = next(typical_cases(3.0, seed=9))
    T = construct_typical(t)
    assert uniqueness_residuals(T).passed(1e-8)
    assert construct_typical(normalize_typical(t)).distance(T) < 1e-9
    assert uniqueness_roundtrip(T, 3.0, tol=1e-8)
    with pytest.raises(ExponentMismatch):
        uniqueness_roundtrip(T, 1.0)


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_antiautomorphism_isometry(m2, rng, p):
    alpha = JordanMono.transpose(m2).with_conjugator(random_unitary(m2, rng))
    T = isometry_from_antiiso(alpha, p)
    assert verify_isometry(T, trials=20).passed()
    other = isometry_from_antiiso(alpha, p, random_state(m2, rng))
    assert T.distance(other) < 1e-9


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_conditional_expectation_embeddings(m2, rng, diagonal_inclusion, p):
    E = trace_ce(m2, image_bicommutant(diagonal_inclusion))
    T = embed_via_ce(E, diagonal_inclusion, p)
    assert verify_isometry(T, trials=20).passed()
    phi = random_state(diagonal_inclusion.source, rng)
    assert embed_via_reference(E, diagonal_inclusion, p, phi).distance(T) < 1e-9
    assert check_duality(E, diagonal_inclusion, p) < 1e-9
    with pytest.raises(ExponentMismatch):
        check_duality(E, diagonal_inclusion, 1.0)


def test_embedding_needs_multiplicative_inclusion(m2):
    J = JordanMono.transpose(m2)
    E = trace_ce(m2, image_bicommutant(J))
    with pytest.raises(InvalidTriple):
        embed_via_ce(E, J, 3.0)


def test_companion_projection_inverts_symmetric_embedding():
    t, rng = next(typical_cases(3.0, seed=13))
    phi = random_state(t.J.source, rng)
    embedding = symmetric_embedding(t.J, t.P, phi, 3.0)
    companion = companion_projection(t.J, t.P, phi, 3.0)
    x = random_element(t.J.source, rng)
    assert companion(embedding(x)).distance(x) < 1e-9
    xi = LpElement(embedding(x), 3.0)
    assert xi.norm() == pytest.approx(schatten_norm(x, 3.0), rel=1e-9)
