"""
Continuous finite measures (c.f.m.) on positive L^p cones.

On M₂ every positive h is αq + βq⊥ for a rank-one projection q with Bloch vector n, and a
sphere function f with f(n) + f(−n) = c defines ρ(h) = αf(n) + βf(−n). When f = c/2 + u
with u odd and not linear, ρ is a c.f.m. that no L^q density represents.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
import scipy.linalg as la

from .algebra import AlgebraDescriptor, AlgebraElement
from .errors import InvalidCFM, NoWitnessFound, NotPositive, WrongAlgebra
from .lp_space import LpElement, conjugate_exponent, schatten_norm
from .sampling import random_psd, random_unitary_matrix
from .shared import resolve_tol, trial_rng

logger = logging.getLogger(__name__)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
M2 = AlgebraDescriptor.of(2)
_MONOMIAL = re.compile(r"^([xyz])(?:\^(\d+))?$")


def bloch_projection(n, algebra: AlgebraDescriptor = M2) -> AlgebraElement:
    """q = ½(1 + n·σ)."""
    n = np.asarray(n, dtype=float)
    q = 0.5 * (np.eye(2) + sum(c * s for c, s in zip(n, PAULI)))
    return algebra.element([q])


def bloch_vector(q: AlgebraElement) -> np.ndarray:
    b = q.blocks[0]
    return np.array([2 * b[0, 1].real, -2 * b[0, 1].imag, (b[0, 0] - b[1, 1]).real])


def sphere_grid(n_theta: int = 16, n_phi: int = 32) -> np.ndarray:
    """Deterministic latitude/longitude grid of unit vectors, shape (n_theta·n_phi, 3)."""
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi = np.arange(n_phi) * 2 * np.pi / n_phi
    t, f = np.meshgrid(theta, phi, indexing="ij")
    return np.stack([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)], axis=-1).reshape(-1, 3)


class CFM(Protocol):
    algebra: AlgebraDescriptor
    p: float

    def evaluate(self, h: AlgebraElement) -> float: ...


def _as_element(h) -> AlgebraElement:
    return h.element if isinstance(h, LpElement) else h


def _spectral_pair(h: AlgebraElement, tol: float) -> tuple[float, float, np.ndarray]:
    """(α, β, n) with h = αq + βq⊥, α ≥ β ≥ 0 and n the Bloch vector of q."""
    if h.algebra.block_dims != (2,):
        raise WrongAlgebra(f"Bloch c.f.m.s live on M2, not on blocks {h.algebra.block_dims}")
    scale = max(1.0, h.op_norm())
    if not h.is_positive(tol):
        raise NotPositive("c.f.m.s are evaluated on positive elements", margin=h.positivity_margin())
    w, v = la.eigh(h.hermitian_part().blocks[0])
    beta, alpha = max(float(w[0]), 0.0), max(float(w[1]), 0.0)
    top = v[:, 1]
    q = np.outer(top, top.conj())
    n = np.array([2 * q[0, 1].real, -2 * q[0, 1].imag, (q[0, 0] - q[1, 1]).real])
    if alpha - beta <= tol * scale:
        n = np.array([0.0, 0.0, 1.0])
    return alpha, beta, n


class SphereBased:
    """ρ(αq + βq⊥) = αf(n_q) + βf(−n_q) for the sphere function f of a subclass."""

    algebra: AlgebraDescriptor = M2

    def sphere_function(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, h, tol: float | None = None) -> float:
        alpha, beta, n = _spectral_pair(_as_element(h), resolve_tol(tol))
        return float(alpha * self.sphere_function(n) + beta * self.sphere_function(-n))


@dataclass(frozen=True, eq=False)
class SphereCFM(SphereBased):
    """A c.f.m. from an arbitrary vectorized sphere function; f(n) + f(−n) must be constant."""

    f: Callable[[np.ndarray], np.ndarray]
    p: float = 1.0

    def sphere_function(self, n: np.ndarray) -> np.ndarray:
        return self.f(np.asarray(n, dtype=float))


def parse_monomial(key: str) -> tuple[int, int, int]:
    powers = {"x": 0, "y": 0, "z": 0}
    for token in key.replace(" ", "").split("*"):
        match = _MONOMIAL.match(token)
        if not match:
            raise InvalidCFM(f"cannot parse monomial {key!r}")
        powers[match.group(1)] += int(match.group(2) or 1)
    return powers["x"], powers["y"], powers["z"]


@dataclass(frozen=True, eq=False)
class BlochCFM(SphereBased):
    """f = c/2 + u with u an odd polynomial bounded by c/2 on the sphere."""

    c: float = 2.0
    odd_poly: dict = field(default_factory=dict)
    p: float = 1.0

    def __post_init__(self):
        if not self.c >= 0:
            raise InvalidCFM(f"c must be nonnegative, got {self.c}")
        terms = []
        for key, coefficient in self.odd_poly.items():
            powers = parse_monomial(key)
            if sum(powers) % 2 == 0:
                raise InvalidCFM(f"monomial {key!r} has even degree; u must be odd")
            terms.append((powers, float(coefficient)))
        object.__setattr__(self, "_terms", tuple(terms))
        peak = float(np.abs(self.u(sphere_grid(90, 180))).max()) if terms else 0.0
        if peak > self.c / 2 + 1e-12:
            raise InvalidCFM(f"max |u| = {peak:.6g} exceeds c/2 = {self.c / 2:.6g}, so f can go negative")

    def u(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        total = np.zeros(n.shape[:-1])
        for (a, b, c), coefficient in self._terms:
            total = total + coefficient * n[..., 0] ** a * n[..., 1] ** b * n[..., 2] ** c
        return total

    def sphere_function(self, n: np.ndarray) -> np.ndarray:
        return self.c / 2 + self.u(n)

    def evaluate(self, h, tol: float | None = None) -> float:
        alpha, beta, n = _spectral_pair(_as_element(h), resolve_tol(tol))
        return float((alpha + beta) * self.c / 2 + (alpha - beta) * self.u(n))

    def to_json(self) -> dict:
        return {"c": self.c, "odd_poly": dict(self.odd_poly), "p": self.p}


def cfm_eval(rho: SphereBased, h, tol: float | None = None) -> float:
    return rho.evaluate(h, tol)


@dataclass(frozen=True, eq=False)
class FunctionalCFM:
    """ρ(ξ) = Re τ(ξη) for a positive η in L^q."""

    eta: AlgebraElement
    p: float = 1.0

    @property
    def algebra(self) -> AlgebraDescriptor:
        return self.eta.algebra

    def evaluate(self, h, tol: float | None = None) -> float:
        return float((_as_element(h) @ self.eta).trace().real)


def cfm_from_functional(eta, p: float | None = None) -> FunctionalCFM:
    """The c.f.m. of an L^q element; p defaults to the exponent conjugate to η's."""
    if isinstance(eta, LpElement):
        p = conjugate_exponent(eta.p) if p is None else p
        eta = eta.element
    if not eta.is_positive():
        raise NotPositive("a c.f.m. needs a positive density", margin=eta.positivity_margin())
    return FunctionalCFM(eta, 1.0 if p is None else p)


@dataclass(frozen=True)
class CFMAxiomsReport:
    homogeneity: float
    orthogonal_additivity: float
    boundedness: float
    continuity: float
    nonnegativity: float = 0.0
    degenerate_slope: float = 0.0

    def passed(self, tol: float | None = None) -> bool:
        tol = resolve_tol(tol)
        return (
            max(self.homogeneity, self.orthogonal_additivity, self.continuity, self.nonnegativity) <= tol
            and np.isfinite(self.boundedness)
        )

    def as_dict(self) -> dict:
        return {
            "homogeneity": self.homogeneity,
            "orthogonal_additivity": self.orthogonal_additivity,
            "boundedness": self.boundedness,
            "continuity": self.continuity,
            "nonnegativity": self.nonnegativity,
            "degenerate_slope": self.degenerate_slope,
        }


def _random_projection_pair(algebra: AlgebraDescriptor, rng: np.random.Generator):
    blocks, complements = [], []
    for n in algebra.block_dims:
        u = random_unitary_matrix(rng, n)
        k = int(rng.integers(0, n + 1))
        blocks.append(u[:, :k] @ u[:, :k].conj().T)
        complements.append(u[:, k:] @ u[:, k:].conj().T)
    return algebra.element(blocks), algebra.element(complements)


def cfm_check_axioms(rho: CFM, trials: int = 200, seed: int = 0, epsilon: float = 1e-12) -> CFMAxiomsReport:
    """
    Sampled residuals of homogeneity, orthogonal additivity, boundedness and continuity.
    Continuity is measured at step epsilon, both along random positive directions and along
    paths (1 + t)q + (1 − t)q⊥ that degenerate to the unit while q rotates.
    """
    algebra, p = rho.algebra, rho.p
    homogeneity = additivity = continuity = negativity = 0.0
    norm = slope = 0.0
    one_value = rho.evaluate(algebra.identity())
    for k in range(trials):
        rng = trial_rng(seed, "cfm_axioms", k)
        h = random_psd(algebra, rng)
        value = rho.evaluate(h)
        s = rng.uniform(0.0, 5.0)
        homogeneity = max(homogeneity, abs(rho.evaluate(h * s) - s * value))

        q, rest = _random_projection_pair(algebra, rng)
        a, b = q @ random_psd(algebra, rng) @ q, rest @ random_psd(algebra, rng) @ rest
        additivity = max(additivity, abs(rho.evaluate(a + b) - rho.evaluate(a) - rho.evaluate(b)))
        # equal weights on both sides of q
        weight = rng.uniform(0.1, 2.0)
        additivity = max(
            additivity,
            abs(rho.evaluate((q + rest) * weight) - rho.evaluate(q * weight) - rho.evaluate(rest * weight)),
        )

        size = schatten_norm(h, p)
        if size > 0:
            norm = max(norm, value / size)
        negativity = max(negativity, -value)

        direction = random_psd(algebra, rng)
        direction = direction / schatten_norm(direction, p)
        continuity = max(continuity, abs(rho.evaluate(h + direction * epsilon) - value))

        path = q * (1 + epsilon) + rest * (1 - epsilon)
        continuity = max(continuity, abs(rho.evaluate(path) - one_value))
        for t in (1e-2, 1e-3, 1e-4):
            slope = max(slope, abs(rho.evaluate(q * (1 + t) + rest * (1 - t)) - one_value) / t)
    report = CFMAxiomsReport(homogeneity, additivity, norm, continuity, negativity, slope)
    logger.info(f"c.f.m. axioms: {report.as_dict()}")
    return report


@dataclass(frozen=True, eq=False)
class Witness:
    h1: AlgebraElement
    h2: AlgebraElement
    gap: float
    derived_gap: float | None = None
    grid_index: tuple[int, int] | None = None


def pair_gap(rho: CFM, h1: AlgebraElement, h2: AlgebraElement) -> float:
    return abs(rho.evaluate(h1 + h2) - rho.evaluate(h1) - rho.evaluate(h2))


def _sphere_gap_table(rho: SphereBased, points: np.ndarray) -> np.ndarray:
    f = rho.sphere_function
    single = f(points)
    total = points[:, None, :] + points[None, :, :]
    length = np.linalg.norm(total, axis=-1)
    safe = np.where(length[..., None] > 1e-12, total / np.maximum(length, 1e-300)[..., None], np.array([0.0, 0.0, 1.0]))
    s = length / 2
    joint = (1 + s) * f(safe) + (1 - s) * f(-safe)
    return np.abs(single[:, None] + single[None, :] - joint)


def nonlinearity_witness(rho: CFM, p: float | None = None, tol: float | None = None,
                         n_theta: int = 16, n_phi: int = 32) -> Witness:
    """
    The projection pair with the largest additivity gap over a sphere grid; ties go to the
    first grid index. The closed-form pair (proj(+x), proj(+z)) is evaluated as well.
    """
    tol = resolve_tol(tol)
    if rho.algebra.block_dims != (2,):
        raise WrongAlgebra("the witness search runs over Bloch projections of M2")
    if isinstance(rho, SphereBased):
        points = sphere_grid(n_theta, n_phi)
        table = _sphere_gap_table(rho, points)
    else:
        points = sphere_grid(n_theta // 2, n_phi // 2)
        projections = [bloch_projection(n, rho.algebra) for n in points]
        table = np.array([[pair_gap(rho, a, b) for b in projections] for a in projections])
    i, j = np.unravel_index(int(np.argmax(table)), table.shape)
    gap = float(table[i, j])
    derived = pair_gap(rho, bloch_projection([1, 0, 0], rho.algebra), bloch_projection([0, 0, 1], rho.algebra))
    if gap <= tol:
        raise NoWitnessFound(f"largest additivity gap {gap:.3e} is within tolerance; ρ looks linear", gap=gap)
    logger.info(f"Nonlinearity witness: grid gap {gap:.6f}, closed-form gap {derived:.6f}")
    return Witness(
        bloch_projection(points[i], rho.algebra), bloch_projection(points[j], rho.algebra),
        gap, derived, (int(i), int(j)),
    )


def standard_grid(algebra: AlgebraDescriptor) -> list[AlgebraElement]:
    """Rank-one projections and their pairwise sums."""
    if algebra.block_dims == (2,):
        projections = [bloch_projection(n, algebra) for n in sphere_grid(6, 12)]
    else:
        projections = []
        for i, n in enumerate(algebra.block_dims):
            eye = np.eye(n)
            vectors = [eye[a] for a in range(n)]
            for a in range(n):
                for b in range(a + 1, n):
                    vectors.extend((eye[a] + eye[b], eye[a] + 1j * eye[b]))
            for v in vectors:
                blocks = [np.zeros((m, m), dtype=complex) for m in algebra.block_dims]
                blocks[i] = np.outer(v, v.conj()) / np.vdot(v, v).real
                projections.append(algebra.element(blocks))
    grid = list(projections)
    for k, a in enumerate(projections):
        grid.extend(a + b for b in projections[k + 1:])
    return grid


@dataclass(frozen=True, eq=False)
class LinearFit:
    eta: AlgebraElement
    residual: float


def fit_linear(rho: CFM, p: float | None = None, grid: list[AlgebraElement] | None = None) -> LinearFit:
    """
    Least-squares L^q density η̂ with ρ(h) ≈ τ(hη̂) on a grid of positives. A vanishing
    residual means ρ extends linearly.
    """
    algebra = rho.algebra
    grid = standard_grid(algebra) if grid is None else grid
    hermitian = algebra.hermitian_basis
    A = np.array([[(h @ e).trace().real for e in hermitian] for h in grid])
    b = np.array([rho.evaluate(h) for h in grid])
    coefficients, *_ = la.lstsq(A, b)
    residual = float(np.abs(A @ coefficients - b).max()) if len(grid) else 0.0
    eta = algebra.zeros()
    for c, e in zip(coefficients, hermitian):
        eta = eta + e * c
    logger.info(f"Linear fit residual {residual:.3e} over {len(grid)} grid points")
    return LinearFit(eta, residual)
