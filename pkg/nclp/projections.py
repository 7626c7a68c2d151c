"""
Conditional expectations onto *-subalgebras and positive projections onto Jordan images.

A positive projection P onto J(M₁) factors as P = S_λ ∘ F: a conditional expectation F onto
J(M₁)′′ followed by the symmetrizer S_λ(π(x) ⊕ π′(y)) = J(λx + (1 − λ)y).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    SubalgebraBasis,
    SuperOperator,
    commutant,
    support_power,
)
from .errors import (
    InvalidSymmetrizer,
    NotFaithful,
    NotIncreasing,
    NotInvariant,
    NotSubalgebra,
    OutsideBicommutant,
    ReconstructionMismatch,
    SingularLambda,
)
from .jordan import JordanMono, image_bicommutant, jordan_inverse, merge_parts, split_parts
from .lp_space import StateDensity, schatten_norm
from .sampling import random_element, random_psd, random_unitary
from .shared import resolve_tol

logger = logging.getLogger(__name__)

# Modular invariance is sampled at these times.
INVARIANCE_TIMES = (0.3, 1.0, np.pi)
LAMBDA_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    parent: AlgebraDescriptor
    range: SubalgebraBasis
    map: SuperOperator
    preserved_state: StateDensity | None = None

    def __call__(self, y: AlgebraElement) -> AlgebraElement:
        return self.map(y)


@dataclass(frozen=True, eq=False)
class PositiveProjection:
    parent: AlgebraDescriptor
    jordan: JordanMono
    map: SuperOperator

    def __call__(self, y: AlgebraElement) -> AlgebraElement:
        return self.map(y)

    def support(self) -> AlgebraElement:
        """s(P) = P(1)."""
        return self.map(self.parent.identity())


@dataclass(frozen=True, eq=False)
class Symmetrizer:
    """Central λ ∈ Z(M₁) with 0 ≤ λ ≤ 1, stored as one value per source block."""

    jordan: JordanMono
    lam: AlgebraElement
    values: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        J = self.jordan
        if self.lam.algebra != J.source:
            raise InvalidSymmetrizer("λ must be an element of the source algebra")
        values = []
        for i, b in enumerate(self.lam.blocks):
            n = b.shape[0]
            v = np.trace(b) / n
            if np.abs(b - v * np.eye(n)).max() > 1e-9 or abs(v.imag) > 1e-9:
                raise InvalidSymmetrizer(f"λ is not a real scalar on block {i}, so it is not central")
            v = float(v.real)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise InvalidSymmetrizer(f"λ = {v} on block {i} lies outside [0, 1]")
            # one-sided blocks carry no choice
            if not J.has_pi_prime(i):
                v = 1.0
            elif not J.has_pi(i):
                v = 0.0
            elif min(v, 1 - v) < LAMBDA_MARGIN:
                logger.warning(f"λ = {v} is singular on two-sided block {i}")
                raise SingularLambda(
                    f"λ or 1 - λ is singular on block {i}, where both parts of J live",
                    margin=min(v, 1 - v),
                )
            values.append(v)
        object.__setattr__(self, "values", tuple(values))
        object.__setattr__(
            self, "lam", J.source.element(np.eye(n) * v for n, v in zip(J.source.block_dims, values))
        )

    @classmethod
    def uniform(cls, jordan: JordanMono, value: float) -> "Symmetrizer":
        return cls(jordan, jordan.source.scalar(value))

    @classmethod
    def from_values(cls, jordan: JordanMono, values) -> "Symmetrizer":
        return cls(jordan, jordan.source.element(np.eye(n) * v for n, v in zip(jordan.source.block_dims, values)))

    def margins(self) -> tuple[float, float]:
        """Smallest λ and 1 − λ over blocks where both π and π′ live."""
        two_sided = [v for i, v in enumerate(self.values) if self.jordan.has_pi(i) and self.jordan.has_pi_prime(i)]
        if not two_sided:
            return 1.0, 1.0
        return min(two_sided), min(1 - v for v in two_sided)

    def complement(self) -> AlgebraElement:
        return self.jordan.source.identity() - self.lam


def _symmetrize(S: Symmetrizer, y: AlgebraElement) -> AlgebraElement:
    x_pi, x_anti = split_parts(S.jordan, y)
    return S.jordan(S.lam @ x_pi + S.complement() @ x_anti)


def symmetrize(S: Symmetrizer, y: AlgebraElement, tol: float | None = None) -> AlgebraElement:
    """S_λ(π(x) ⊕ π′(y)) = J(λx + (1 − λ)y)."""
    tol = resolve_tol(tol)
    x_pi, x_anti = split_parts(S.jordan, y)
    residual = y.distance(merge_parts(S.jordan, x_pi, x_anti))
    if residual > tol * max(1.0, y.op_norm()):
        raise OutsideBicommutant(f"element is not in J(M1)'' (residual {residual:.3e})", residual=residual)
    return S.jordan(S.lam @ x_pi + S.complement() @ x_anti)


def _require_subalgebra(range_: SubalgebraBasis, tol: float):
    residual = range_.closure_residual()
    if residual > tol * max(1.0, max((b.op_norm() for b in range_.basis), default=1.0) ** 2):
        raise NotSubalgebra(f"span is not closed under products and adjoints (residual {residual:.3e})", residual=residual)


def trace_ce(parent: AlgebraDescriptor, range_: SubalgebraBasis, tol: float | None = None) -> ConditionalExpectation:
    """The τ-preserving conditional expectation: orthogonal projection onto the range."""
    tol = resolve_tol(tol)
    _require_subalgebra(range_, tol)
    B = range_.matrix
    return ConditionalExpectation(parent, range_, SuperOperator(parent, parent, B @ B.conj().T))


def invariance_residual(phi: StateDensity, range_: SubalgebraBasis, tol: float | None = None) -> float:
    """How far σ^φ_t moves the range out of itself, sampled over a few t."""
    worst = 0.0
    for t in INVARIANCE_TIMES:
        u, u_inv = support_power(phi.d, 1j * t, tol), support_power(phi.d, -1j * t, tol)
        for b in range_.basis:
            moved = u @ b @ u_inv
            worst = max(worst, range_.residual(moved))
    return worst


def state_ce(parent: AlgebraDescriptor, range_: SubalgebraBasis, phi: StateDensity,
             tol: float | None = None) -> ConditionalExpectation:
    """
    The φ-preserving conditional expectation onto a σ^φ-invariant range.

    Solves φ(n E(y)) = φ(n y) for n in the range; the Gram matrix G_lk = φ(b_l* b_k) is
    invertible exactly when φ is faithful on the range.
    """
    tol = resolve_tol(tol)
    _require_subalgebra(range_, tol)
    residual = invariance_residual(phi, range_, tol)
    if residual > 1e3 * tol:
        logger.warning(f"Range is not invariant under the modular group (residual {residual:.3e})")
        raise NotInvariant(
            f"range is not invariant under the modular group of the state (residual {residual:.3e})",
            residual=residual,
        )
    B = range_.matrix
    weighted = np.column_stack([(b @ phi.d).to_vector() for b in range_.basis]) if range_.basis else B
    gram = weighted.conj().T @ B
    eig = la.eigvalsh((gram + gram.conj().T) / 2) if gram.size else np.array([1.0])
    if eig.min() <= tol * max(1.0, eig.max()):
        raise NotFaithful(f"state is not faithful on the range (margin {eig.min():.3e})", margin=float(eig.min()))
    matrix = B @ la.solve(gram, weighted.conj().T)
    return ConditionalExpectation(parent, range_, SuperOperator(parent, parent, matrix), phi)


def build_positive_projection(J: JordanMono, F: ConditionalExpectation, S: Symmetrizer,
                              tol: float | None = None) -> PositiveProjection:
    """P = S_λ ∘ F."""
    tol = resolve_tol(tol)
    if S.jordan is not J:
        S = Symmetrizer.from_values(J, S.values)
    target = image_bicommutant(J, tol)
    if not F.range.same_span(target, 1e3 * tol):
        raise OutsideBicommutant("F does not range onto J(M1)''")
    matrix = SuperOperator.from_function(J.target, J.target, lambda y: _symmetrize(S, F(y))).matrix
    return PositiveProjection(J.target, J, SuperOperator(J.target, J.target, matrix))


@dataclass(frozen=True, eq=False)
class Factorization:
    conditional_expectation: ConditionalExpectation
    symmetrizer: Symmetrizer
    reconstruction_residual: float
    off_diagonal_residual: float

    @property
    def lam(self) -> AlgebraElement:
        return self.symmetrizer.lam


def _block_inverse(J: JordanMono, values) -> AlgebraElement:
    inv = [1.0 / v if v > 0 else 0.0 for v in values]
    return J.source.element(np.eye(n) * v for n, v in zip(J.source.block_dims, inv))


def factor_projection(P: PositiveProjection, tol: float | None = None) -> Factorization:
    """Recover (F, λ) with P = S_λ ∘ F."""
    tol = resolve_tol(tol)
    J = P.jordan
    z_m, z_a = J.mult_support, J.anti_support
    raw = jordan_inverse(J, P(z_m))
    values = []
    for i, b in enumerate(raw.blocks):
        v = float(np.trace(b).real / b.shape[0])
        values.append(min(max(v, 0.0), 1.0))
    S = Symmetrizer.from_values(J, values)
    logger.info(f"Recovered λ = {[round(v, 6) for v in S.values]}")

    lam_inv = _block_inverse(J, S.values)
    co_inv = _block_inverse(J, [1 - v for v in S.values])

    def conditional(y: AlgebraElement) -> AlgebraElement:
        upper = z_m @ J(lam_inv @ jordan_inverse(J, P(z_m @ y @ z_m)))
        lower = z_a @ J(co_inv @ jordan_inverse(J, P(z_a @ y @ z_a)))
        return upper + lower

    range_ = image_bicommutant(J, tol)
    F = ConditionalExpectation(J.target, range_, SuperOperator.from_function(J.target, J.target, conditional))
    rebuilt = build_positive_projection(J, F, S, tol)
    residual = rebuilt.map.distance(P.map)
    if residual > tol * max(1.0, float(np.abs(P.map.matrix).max())):
        logger.warning(f"S_λ ∘ F misses P by {residual:.3e}")
        raise ReconstructionMismatch(f"S_λ ∘ F does not reproduce P (residual {residual:.3e})", residual=residual)

    off_diagonal = 0.0
    for y in J.target.basis:
        split = P(z_m @ y @ z_m) + P(z_a @ y @ z_a)
        off_diagonal = max(off_diagonal, P(y).distance(split))
    return Factorization(F, S, residual, off_diagonal)


# Invariant reports


@dataclass(frozen=True)
class ExpectationReport:
    idempotence: float
    unit: float
    bimodule: float
    positivity: float
    state: float = 0.0

    def passed(self, tol: float | None = None) -> bool:
        tol = resolve_tol(tol)
        return max(self.idempotence, self.unit, self.bimodule, self.positivity, self.state) <= tol


def _positivity_defect(fn, algebra: AlgebraDescriptor, rng: np.random.Generator, samples: int) -> float:
    worst = 0.0
    for _ in range(samples):
        image = fn(random_psd(algebra, rng))
        worst = max(worst, image.hermitian_residual(), -image.positivity_margin())
    return worst


def check_conditional_expectation(E: ConditionalExpectation, samples: int = 100,
                                  rng: np.random.Generator | None = None) -> ExpectationReport:
    rng = np.random.default_rng(0) if rng is None else rng
    algebra = E.parent
    M = E.map.matrix
    idempotence = float(np.abs(M @ M - M).max())
    unit = E(algebra.identity()).distance(E.range.unit)
    bimodule = 0.0
    for _ in range(3):
        n1, n2 = E.range.project(random_element(algebra, rng)), E.range.project(random_element(algebra, rng))
        m = random_element(algebra, rng)
        bimodule = max(bimodule, E(n1 @ m @ n2).distance(n1 @ E(m) @ n2))
    positivity = _positivity_defect(E, algebra, rng, samples)
    state = 0.0
    if E.preserved_state is not None:
        phi = E.preserved_state
        for e in algebra.basis:
            state = max(state, abs(phi.evaluate(E(e)) - phi.evaluate(e)))
    return ExpectationReport(idempotence, unit, bimodule, positivity, state)


@dataclass(frozen=True)
class ProjectionReport:
    idempotence: float
    fixes_image: float
    support: float
    positivity: float

    def passed(self, tol: float | None = None) -> bool:
        return max(self.idempotence, self.fixes_image, self.support, self.positivity) <= resolve_tol(tol)


def check_positive_projection(P: PositiveProjection, samples: int = 100,
                              rng: np.random.Generator | None = None) -> ProjectionReport:
    rng = np.random.default_rng(0) if rng is None else rng
    J = P.jordan
    M = P.map.matrix
    idempotence = float(np.abs(M @ M - M).max())
    fixes = max(P(J(e)).distance(J(e)) for e in J.source.basis)
    support = P.support().distance(J.unit())
    positivity = _positivity_defect(P, P.parent, rng, samples)
    return ProjectionReport(idempotence, fixes, support, positivity)


@dataclass(frozen=True)
class StormerReport:
    norm: float
    jordan_bimodule: float
    compression: float
    relative_commutant: float

    def passed(self, tol: float | None = None) -> bool:
        return max(self.norm, self.jordan_bimodule, self.compression, self.relative_commutant) <= resolve_tol(tol)

    def as_dict(self) -> dict:
        return {
            "norm": self.norm,
            "jordan_bimodule": self.jordan_bimodule,
            "compression": self.compression,
            "relative_commutant": self.relative_commutant,
        }


def check_stormer(P: PositiveProjection, samples: int = 20, rng: np.random.Generator | None = None,
                  tol: float | None = None) -> StormerReport:
    """
    Residuals of the identities every positive projection onto J(M₁) satisfies:
    ‖P‖ = 1, P(J(x)∙y) = J(x)∙P(y), P(J(x)yJ(x)) = J(x)P(y)J(x), and
    P(J(M₁)′ ∩ M₂) ⊂ J(Z(M₁)).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    J, algebra = P.jordan, P.parent

    sup = P(algebra.identity()).op_norm()
    for _ in range(samples):
        sup = max(sup, P(random_unitary(algebra, rng)).op_norm())
        y = random_element(algebra, rng)
        sup = max(sup, P(y / y.op_norm()).op_norm())
    norm = abs(sup - 1.0)

    ys = [random_element(algebra, rng) for _ in range(3)]
    bimod = compression = 0.0
    for e in J.source.basis:
        je = J(e)
        for y in ys:
            bimod = max(bimod, P(je.jordan(y)).distance(je.jordan(P(y))))
            compression = max(compression, P(je @ y @ je).distance(je @ P(y) @ je))

    central_images = [J(u) for u in J.source.central_units]
    Z = np.column_stack([c.to_vector() / c.hs_norm() for c in central_images])
    relative = commutant([J(e) for e in J.source.basis], algebra, tol)
    center_residual = 0.0
    for z in relative.basis:
        v = P(z).to_vector()
        center_residual = max(center_residual, float(np.linalg.norm(v - Z @ (Z.conj().T @ v))))
    return StormerReport(norm, bimod, compression, center_residual)


@dataclass(frozen=True)
class PavingReport:
    distances: tuple[float, ...]
    mass_defects: tuple[float, ...]
    element_distances: tuple[float, ...]
    distance_monotone: bool
    mass_monotone: bool
    terminal: float

    def as_dict(self) -> dict:
        return {
            "distances": list(self.distances),
            "mass_defects": list(self.mass_defects),
            "element_distances": list(self.element_distances),
            "distance_monotone": self.distance_monotone,
            "mass_monotone": self.mass_monotone,
            "terminal": self.terminal,
        }


def paving_demo(parent: AlgebraDescriptor, chain: list[AlgebraElement], theta: StateDensity,
                x: AlgebraElement | None = None, tol: float | None = None) -> PavingReport:
    """
    Track θ∘E_α → θ in L¹ and E_α(x) → x along an increasing chain of projections q_α
    with E_α(x) = q_α x q_α. The mass defect θ(1 − q_α) is nonincreasing for every chain.
    """
    tol = resolve_tol(tol)
    if not chain:
        raise NotIncreasing("the chain is empty")
    for k, q in enumerate(chain):
        if q.algebra != parent or not q.is_projection(tol):
            raise NotIncreasing(f"chain element {k} is not a projection of the algebra")
    for k in range(len(chain) - 1):
        if (chain[k + 1] @ chain[k]).distance(chain[k]) > tol:
            raise NotIncreasing(f"chain element {k + 1} does not dominate element {k}")
    if chain[-1].distance(parent.identity()) > tol:
        raise NotIncreasing("the chain does not end at the identity")

    x = parent.identity() if x is None else x
    d = theta.d
    distances, defects, element_distances = [], [], []
    for q in chain:
        distances.append(schatten_norm(q @ d @ q - d, 1))
        defects.append(theta.evaluate(parent.identity() - q).real)
        element_distances.append((q @ x @ q).distance(x))
    slack = 1e-12

    def monotone(values):
        return all(b <= a + slack for a, b in zip(values, values[1:]))

    report = PavingReport(
        tuple(distances), tuple(defects), tuple(element_distances),
        monotone(distances), monotone(defects), max(distances[-1], element_distances[-1]),
    )
    logger.debug(f"Paving distances {report.distances}")
    return report
