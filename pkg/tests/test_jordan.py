import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor, SuperOperator
from nclp.errors import DecompositionFailure, DimensionMismatch, NotAntiauto
from nclp.jordan import (
    JordanMono,
    Mode,
    Slot,
    jordan_inverse,
    jordan_residuals,
    match_jordan,
    merge_parts,
    require_antiautomorphism,
    split_parts,
    structure_decompose,
    verify_jordan_mono,
)
from nclp.sampling import random_algebra, random_element, random_jordan, random_unitary


def random_cases(count=6, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        source = random_algebra(rng, max_blocks=2, max_dim=2)
        out.append(random_jordan(source, rng, max_copies=2))
    return out


@pytest.mark.parametrize(
    "J",
    [
        JordanMono.identity(AlgebraDescriptor.of(2, 1)),
        JordanMono.transpose(AlgebraDescriptor.of(3)),
        JordanMono.doubling(),
    ]
)
def test_standard_examples_are_jordan(J):
    report = verify_jordan_mono(J)
    assert report.passed()
    assert J.unit().is_projection()


def test_doubling_places_transpose():
    J = JordanMono.doubling()
    x = J.source.element([np.array([[1, 2], [3, 4]])])
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2] = [[1, 2], [3, 4]]
    expected[2:, 2:] = [[1, 3], [2, 4]]
    assert np.abs(J(x).blocks[0] - expected).max() < 1e-15


def test_random_maps_are_jordan_and_invertible_on_image():
    rng = np.random.default_rng(1)
    for J in random_cases():
        assert verify_jordan_mono(J).passed()
        x = random_element(J.source, rng)
        assert jordan_inverse(J, J(x)).distance(x) < 1e-12


def test_split_and_merge_parts():
    rng = np.random.default_rng(2)
    for J in random_cases():
        x = random_element(J.source, rng)
        x_pi, x_anti = split_parts(J, J(x))
        assert merge_parts(J, x_pi, x_anti).distance(J(x)) < 1e-12
        assert (J.mult_support + J.anti_support).distance(J.unit()) < 1e-12


def test_slot_supports_match_classification():
    for J in random_cases():
        z_mult, z_anti = structure_decompose(J)
        assert z_mult.distance(J.mult_support) < 1e-8
        assert z_anti.distance(J.anti_support) < 1e-8


def test_match_jordan_recovers_map():
    for J in random_cases():
        matched = match_jordan(J.superoperator)
        assert matched.superoperator.distance(J.superoperator) < 1e-8


def test_match_jordan_rejects_non_jordan_map():
    algebra = AlgebraDescriptor.of(2)
    doubled = SuperOperator(algebra, algebra, 2 * np.eye(algebra.dimension))
    with pytest.raises(DecompositionFailure) as info:
        match_jordan(doubled)
    assert info.value.residuals["jordan_product_residual"] > 0.1


def test_jordan_residuals_of_raw_maps():
    algebra = AlgebraDescriptor.of(2)
    transpose = jordan_residuals(JordanMono.transpose(algebra).superoperator)
    assert transpose.jordan_product_residual < 1e-12
    assert transpose.injectivity_ok and transpose.unit_is_projection

    zero = jordan_residuals(SuperOperator(algebra, algebra, np.zeros((4, 4))))
    assert not zero.injectivity_ok
    assert zero.star_residual == 0.0


def test_slots_are_validated():
    source, target = AlgebraDescriptor.of(2), AlgebraDescriptor.of(3)
    with pytest.raises(DimensionMismatch):
        JordanMono(source, target, (Slot(0, 0, 0, Mode.MULT), Slot(0, 0, 1, Mode.ANTI)))
    with pytest.raises(DimensionMismatch):
        JordanMono(source, target, (Slot(0, 0, 2, Mode.MULT),))
    with pytest.raises(DimensionMismatch):
        JordanMono(AlgebraDescriptor.of(2, 1), target, (Slot(0, 0, 0, Mode.MULT),))


def test_antiautomorphism_check(rng):
    algebra = AlgebraDescriptor.of(2)
    require_antiautomorphism(JordanMono.transpose(algebra).with_conjugator(random_unitary(algebra, rng)))
    with pytest.raises(NotAntiauto):
        require_antiautomorphism(JordanMono.identity(algebra))
    with pytest.raises(NotAntiauto):
        require_antiautomorphism(JordanMono.doubling())
