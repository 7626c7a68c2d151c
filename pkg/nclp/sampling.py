"""Random elements, states, unitaries and Jordan maps for the verification campaigns."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraDescriptor, AlgebraElement
from .jordan import JordanMono, Mode, Slot
from .lp_space import StateDensity


def random_matrix(rng: np.random.Generator, n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    return (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))) / np.sqrt(2)


def random_unitary_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_element(algebra: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
    return algebra.element(random_matrix(rng, n) for n in algebra.block_dims)


def random_hermitian(algebra: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
    return random_element(algebra, rng).hermitian_part()


def random_psd(algebra: AlgebraDescriptor, rng: np.random.Generator, rank: int | None = None) -> AlgebraElement:
    blocks = []
    for n in algebra.block_dims:
        g = random_matrix(rng, n, n if rank is None else min(rank, n))
        blocks.append(g @ g.conj().T / n)
    return algebra.element(blocks)


def random_positive_definite(algebra: AlgebraDescriptor, rng: np.random.Generator,
                             floor: float = 0.1) -> AlgebraElement:
    """Positive element with spectrum in [floor, 1 + floor]."""
    blocks = []
    for n in algebra.block_dims:
        u = random_unitary_matrix(rng, n)
        blocks.append((u * (floor + rng.random(n))) @ u.conj().T)
    return algebra.element(blocks)


def random_unitary(algebra: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
    return algebra.element(random_unitary_matrix(rng, n) for n in algebra.block_dims)


def random_projection_pair(algebra: AlgebraDescriptor,
                           rng: np.random.Generator) -> tuple[AlgebraElement, AlgebraElement]:
    """A random projection q and its complement 1 - q, both spectral projections of one unitary."""
    blocks, complements = [], []
    for n in algebra.block_dims:
        u = random_unitary_matrix(rng, n)
        mask = rng.random(n) < 0.5
        blocks.append((u * mask) @ u.conj().T)
        complements.append((u * ~mask) @ u.conj().T)
    return algebra.element(blocks), algebra.element(complements)


def random_projection(algebra: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
    return random_projection_pair(algebra, rng)[0]


def random_partial_isometry(algebra: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
    q = random_projection(algebra, rng)
    return random_unitary(algebra, rng) @ q


def random_state(algebra: AlgebraDescriptor, rng: np.random.Generator, floor: float = 0.1) -> StateDensity:
    """Faithful normalized state."""
    d = random_positive_definite(algebra, rng, floor)
    return StateDensity(algebra, d / d.trace().real)


def random_central(algebra: AlgebraDescriptor, rng: np.random.Generator,
                   low: float = 0.0, high: float = 1.0) -> AlgebraElement:
    return algebra.element(
        np.eye(n) * rng.uniform(low, high) for n in algebra.block_dims
    )


def random_algebra(rng: np.random.Generator, max_blocks: int = 2, max_dim: int = 2) -> AlgebraDescriptor:
    k = int(rng.integers(1, max_blocks + 1))
    dims = tuple(int(rng.integers(1, max_dim + 1)) for _ in range(k))
    weights = tuple(float(w) for w in rng.uniform(0.5, 2.0, size=k))
    return AlgebraDescriptor(dims, weights)


def random_jordan(source: AlgebraDescriptor, rng: np.random.Generator, max_copies: int = 2,
                  padding: bool = True, conjugate: bool = True) -> JordanMono:
    """A Jordan *-monomorphism out of source with random slot modes, multiplicities and targets."""
    copies = []
    for i, n in enumerate(source.block_dims):
        k = int(rng.integers(1, max_copies + 1))
        for _ in range(k):
            copies.append((i, n, Mode.MULT if rng.random() < 0.5 else Mode.ANTI))
    rng.shuffle(copies)
    num_targets = int(rng.integers(1, min(2, len(copies)) + 1))
    assignment = [int(rng.integers(num_targets)) for _ in copies]
    # every target block gets at least one slot
    for t in range(num_targets):
        if t not in assignment:
            assignment[t] = t

    fill = [0] * num_targets
    slots = []
    for (i, n, mode), t in zip(copies, assignment):
        slots.append(Slot(i, t, fill[t], mode))
        fill[t] += n
    dims = tuple(f + (int(rng.integers(0, 2)) if padding else 0) for f in fill)
    weights = tuple(float(w) for w in rng.uniform(0.5, 2.0, size=num_targets))
    target = AlgebraDescriptor(dims, weights)
    J = JordanMono(source, target, tuple(slots))
    if conjugate:
        J = J.with_conjugator(random_unitary(target, rng))
    return J
