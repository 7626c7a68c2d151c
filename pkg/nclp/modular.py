"""
Modular theory of a state φ = τ(d ·) on a finite-dimensional algebra.

Everything is computed in the eigenbasis of d: σ_t multiplies entry (j, k) by
(λ_j/λ_k)^{it}, the cosine family by cos(t log(λ_j/λ_k)) and the Φ-transform by
2√(λ_jλ_k)/(λ_j + λ_k). The integral forms are kept as quadrature cross-checks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la
from scipy.integrate import quad_vec

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    SubalgebraBasis,
    SuperOperator,
    functional_calculus,
    rank_threshold,
    support_power,
)
from .errors import DimensionMismatch, NotFaithful, SingularSystem
from .jordan import JordanMono, jordan_inverse, require_antiautomorphism
from .lp_space import StateDensity, functional_density
from .projections import INVARIANCE_TIMES, ConditionalExpectation, PositiveProjection
from .shared import resolve_tol

logger = logging.getLogger(__name__)

# sech(πt) < 1e-27 beyond this cutoff
QUADRATURE_CUTOFF = 20.0


def _require_faithful(phi: StateDensity, tol: float | None, what: str = "state"):
    if not phi.is_faithful(tol):
        margin = phi.faithfulness_margin()
        raise NotFaithful(f"{what} is not faithful (smallest eigenvalue {margin:.3e})", margin=margin)


@dataclass(frozen=True, eq=False)
class ModularContext:
    algebra: AlgebraDescriptor
    phi: StateDensity
    support_only: bool = False
    tol: float | None = None

    def __post_init__(self):
        if self.phi.algebra != self.algebra:
            raise DimensionMismatch("state lives in a different algebra")
        if not self.support_only:
            _require_faithful(self.phi, self.tol)

    @cached_property
    def _spectrum(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Per block: eigenvalues, eigenvectors, and the mask of the support."""
        all_w = np.concatenate([la.eigvalsh(b) for b in self.phi.d.blocks])
        thr = rank_threshold(all_w, self.tol)
        out = []
        for b in self.phi.d.blocks:
            w, v = la.eigh((b + b.conj().T) / 2)
            out.append((w, v, w > thr))
        return out

    @cached_property
    def _log_ratios(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for w, _, keep in self._spectrum:
            logs = np.where(keep, np.log(np.where(keep, w, 1.0)), 0.0)
            out.append((logs[:, None] - logs[None, :], np.outer(keep, keep)))
        return out

    def transform(self, x: AlgebraElement, factor) -> AlgebraElement:
        """Multiply x entrywise in the eigenbasis; factor maps (log ratio, w_j, w_k) to weights."""
        if x.algebra != self.algebra:
            raise DimensionMismatch("element lives in a different algebra")
        blocks = []
        for b, (w, v, keep), (omega, mask) in zip(x.blocks, self._spectrum, self._log_ratios):
            inner = v.conj().T @ b @ v
            weights = np.where(mask, factor(omega, w[:, None], w[None, :]), 0.0)
            blocks.append(v @ (inner * weights) @ v.conj().T)
        return AlgebraElement(self.algebra, tuple(blocks))


def modular_auto(ctx: ModularContext, t: float, x: AlgebraElement) -> AlgebraElement:
    """σ^φ_t(x) = d^{it} x d^{−it}."""
    return ctx.transform(x, lambda omega, wj, wk: np.exp(1j * t * omega))


def cosine_family(ctx: ModularContext, t: float, x: AlgebraElement) -> AlgebraElement:
    """ρ^φ_t = ½(σ_t + σ_{−t})."""
    return ctx.transform(x, lambda omega, wj, wk: np.cos(t * omega))


def phi_transform(ctx: ModularContext, x: AlgebraElement) -> AlgebraElement:
    """∫ σ_t(x) sech(πt) dt in closed form."""
    return ctx.transform(x, lambda omega, wj, wk: 1.0 / np.cosh(omega / 2))


def phi_transform_quadrature(ctx: ModularContext, x: AlgebraElement, epsabs: float = 1e-10) -> AlgebraElement:
    n = ctx.algebra.dimension

    def integrand(t):
        v = modular_auto(ctx, t, x).to_vector() / np.cosh(np.pi * t)
        return np.concatenate([v.real, v.imag])

    value, err = quad_vec(integrand, -QUADRATURE_CUTOFF, QUADRATURE_CUTOFF, epsabs=epsabs, epsrel=1e-10)
    logger.debug(f"Φ-transform quadrature error estimate {err:.2e}")
    return ctx.algebra.from_vector(value[:n] + 1j * value[n:])


def self_polar_form(ctx: ModularContext, a: AlgebraElement, b: AlgebraElement) -> complex:
    """s_φ(a, b) = τ(d^{1/2} a d^{1/2} b*), linear in a and conjugate-linear in b."""
    root = functional_calculus(ctx.phi.d, 0.5, ctx.tol)
    return (root @ a @ root @ b.adjoint()).trace()


def self_polar_integral(ctx: ModularContext, a: AlgebraElement, b: AlgebraElement) -> complex:
    """∫ φ(ρ_t(a) ∙ b*) sech(πt) dt."""
    b_star = b.adjoint()

    def integrand(t):
        value = ctx.phi.evaluate(cosine_family(ctx, t, a).jordan(b_star)) / np.cosh(np.pi * t)
        return np.array([value.real, value.imag])

    value, _ = quad_vec(integrand, -QUADRATURE_CUTOFF, QUADRATURE_CUTOFF, epsabs=1e-11, epsrel=1e-10)
    return complex(value[0], value[1])


def group_law_residual(ctx: ModularContext, s: float, t: float, x: AlgebraElement) -> float:
    return modular_auto(ctx, s, modular_auto(ctx, t, x)).distance(modular_auto(ctx, s + t, x))


def cosine_law_residual(ctx: ModularContext, s: float, t: float, x: AlgebraElement) -> float:
    """‖ρ_s(ρ_t(x)) − ½(ρ_{s+t}(x) + ρ_{s−t}(x))‖."""
    lhs = cosine_family(ctx, s, cosine_family(ctx, t, x))
    rhs = (cosine_family(ctx, s + t, x) + cosine_family(ctx, s - t, x)) * 0.5
    return lhs.distance(rhs)


def kms_symmetry_residual(ctx: ModularContext, t: float, a: AlgebraElement, b: AlgebraElement) -> float:
    """|φ(ρ_t(a) ∙ b) − φ(a ∙ ρ_t(b))|."""
    phi = ctx.phi
    return abs(phi.evaluate(cosine_family(ctx, t, a).jordan(b)) - phi.evaluate(a.jordan(cosine_family(ctx, t, b))))


def phi_identity_residual(ctx: ModularContext, x: AlgebraElement) -> float:
    """‖d^{1/2} x d^{1/2} − ½(Φ(x)d + dΦ(x))‖."""
    d = ctx.phi.d
    root = functional_calculus(d, 0.5, ctx.tol)
    transformed = phi_transform(ctx, x)
    return (root @ x @ root).distance((transformed @ d + d @ transformed) * 0.5)


def connes_cocycle(phi: StateDensity, psi: StateDensity, t: float, tol: float | None = None) -> AlgebraElement:
    """(Dφ:Dψ)_t = d_φ^{it} d_ψ^{−it}."""
    if phi.algebra != psi.algebra:
        raise DimensionMismatch("states live in different algebras")
    _require_faithful(phi, tol, "φ")
    _require_faithful(psi, tol, "ψ")
    return support_power(phi.d, 1j * t, tol) @ support_power(psi.d, -1j * t, tol)


def cocycle_residual(phi: StateDensity, psi: StateDensity, s: float, t: float, tol: float | None = None) -> float:
    """‖(Dφ:Dψ)_{s+t} − (Dφ:Dψ)_s σ^ψ_s((Dφ:Dψ)_t)‖."""
    ctx = ModularContext(psi.algebra, psi, tol=tol)
    lhs = connes_cocycle(phi, psi, s + t, tol)
    rhs = connes_cocycle(phi, psi, s, tol) @ modular_auto(ctx, s, connes_cocycle(phi, psi, t, tol))
    return lhs.distance(rhs)


def chain_rule_residual(phi: StateDensity, psi: StateDensity, omega: StateDensity, t: float,
                        tol: float | None = None) -> float:
    """‖(Dφ:Dψ)_t (Dψ:Dω)_t − (Dφ:Dω)_t‖."""
    lhs = connes_cocycle(phi, psi, t, tol) @ connes_cocycle(psi, omega, t, tol)
    return lhs.distance(connes_cocycle(phi, omega, t, tol))


@dataclass(frozen=True)
class AnticocycleReport:
    cocycle: float
    modular: float

    def passed(self, tol: float | None = None) -> bool:
        return max(self.cocycle, self.modular) <= resolve_tol(tol)


def check_anticocycle(alpha: JordanMono, phi: StateDensity, psi: StateDensity, t: float,
                      tol: float | None = None) -> AnticocycleReport:
    """
    (D(ψ∘α⁻¹):D(φ∘α⁻¹))_t = α((Dφ:Dψ)_{−t}) and σ_t^{φ∘α⁻¹} = α∘σ^φ_{−t}∘α⁻¹.
    """
    tol = resolve_tol(tol)
    require_antiautomorphism(alpha, tol)
    algebra = alpha.source

    def inverse(y):
        return jordan_inverse(alpha, y)

    phi_a = StateDensity(algebra, functional_density(algebra, lambda y: phi.evaluate(inverse(y))).hermitian_part())
    psi_a = StateDensity(algebra, functional_density(algebra, lambda y: psi.evaluate(inverse(y))).hermitian_part())

    lhs = connes_cocycle(psi_a, phi_a, t, tol)
    rhs = alpha(connes_cocycle(phi, psi, -t, tol))
    cocycle = lhs.distance(rhs)

    ctx_a, ctx = ModularContext(algebra, phi_a, tol=tol), ModularContext(algebra, phi, tol=tol)
    modular = 0.0
    for y in algebra.basis:
        modular = max(modular, modular_auto(ctx_a, t, y).distance(alpha(modular_auto(ctx, -t, inverse(y)))))
    return AnticocycleReport(cocycle, modular)


@dataclass(frozen=True, eq=False)
class HSReport:
    """Self-polar (2) and cosine-family (3) agreement, and ψ = θ∘J⁻¹∘P (1) when P exists."""

    condition_selfpolar: float
    condition_cosine: float
    condition_state: float | None
    projection: PositiveProjection | None

    def passed(self, tol: float | None = None) -> bool:
        tol = resolve_tol(tol)
        return (
            self.condition_selfpolar <= tol
            and self.condition_cosine <= tol
            and self.condition_state is not None
            and self.condition_state <= tol
        )

    def as_dict(self) -> dict:
        return {
            "condition_selfpolar": self.condition_selfpolar,
            "condition_cosine": self.condition_cosine,
            "condition_state": self.condition_state,
            "projection_found": self.projection is not None,
        }


def restricted_state(J: JordanMono, psi: StateDensity) -> StateDensity:
    """θ = ψ∘J on the source."""
    density = functional_density(J.source, lambda x: psi.evaluate(J(x)))
    return StateDensity(J.source, density.hermitian_part())


def check_hs_conditions(J: JordanMono, psi: StateDensity, tol: float | None = None) -> HSReport:
    """
    Compare the modular data of ψ on J(M₁) with that of θ = ψ∘J, and when they agree
    solve s_ψ(y, J(x)) = s_ψ(P(y), J(x)) for the projection P.
    """
    tol = resolve_tol(tol)
    theta = restricted_state(J, psi)
    ctx_theta = ModularContext(J.source, theta, tol=tol)
    ctx_psi = ModularContext(J.target, psi, tol=tol)
    basis = J.source.basis
    images = [J(e) for e in basis]

    selfpolar = 0.0
    for a, ja in zip(basis, images):
        for b, jb in zip(basis, images):
            selfpolar = max(selfpolar, abs(self_polar_form(ctx_theta, a, b) - self_polar_form(ctx_psi, ja, jb)))

    cosine = 0.0
    for t in INVARIANCE_TIMES:
        for e, je in zip(basis, images):
            cosine = max(cosine, J(cosine_family(ctx_theta, t, e)).distance(cosine_family(ctx_psi, t, je)))
    logger.info(f"Self-polar residual {selfpolar:.2e}, cosine-family residual {cosine:.2e}")

    scale = max(1.0, max(j.op_norm() for j in images) ** 2)
    if selfpolar > tol * scale or cosine > tol * scale:
        return HSReport(selfpolar, cosine, None, None)

    gram = np.array([[self_polar_form(ctx_psi, jk, jl) for jk in images] for jl in images])
    svals = la.svdvals(gram)
    nullity = int(np.sum(svals <= tol * max(1.0, svals.max())))
    if nullity:
        raise SingularSystem(f"the self-polar system leaves {nullity} directions of P undetermined", nullity=nullity)

    def projection(y: AlgebraElement) -> AlgebraElement:
        rhs = np.array([self_polar_form(ctx_psi, y, jl) for jl in images])
        coefficients = la.solve(gram, rhs)
        x = J.source.zeros()
        for c, e in zip(coefficients, basis):
            x = x + e * c
        return J(x)

    P = PositiveProjection(J.target, J, SuperOperator.from_function(J.target, J.target, projection))
    state = max(abs(psi.evaluate(y) - theta.evaluate(jordan_inverse(J, P(y)))) for y in J.target.basis)
    return HSReport(selfpolar, cosine, state, P)


def check_centralizer(phi: StateDensity, A: SubalgebraBasis, tol: float | None = None) -> float:
    """max ‖σ^φ_t(a) − a‖ over a basis of A and t ∈ {0.3, 1, π}."""
    ctx = ModularContext(phi.algebra, phi, support_only=True, tol=tol)
    unit = phi.support(tol)
    worst = 0.0
    for t in INVARIANCE_TIMES:
        for a in A.basis:
            worst = max(worst, modular_auto(ctx, t, a).distance(unit @ a @ unit))
    return worst


def check_cocycle_absolute_value(J: JordanMono, P: PositiveProjection, phi: StateDensity, psi: StateDensity,
                                 tol: float | None = None) -> float:
    """
    ‖ |z| − J(|y|) ‖ with y = d_φ^{1/2} d_ψ^{−1/2} and z the same expression for the
    extended states φ̄ = φ∘J⁻¹∘P and ψ̄ = ψ∘J⁻¹∘P.
    """
    tol = resolve_tol(tol)
    _require_faithful(phi, tol, "φ")
    _require_faithful(psi, tol, "ψ")
    y = functional_calculus(phi.d, 0.5) @ support_power(psi.d, -0.5, tol)
    target = J.target

    def extend(state):
        return functional_density(target, lambda m: state.evaluate(jordan_inverse(J, P(m)))).hermitian_part()

    z = functional_calculus(extend(phi), 0.5, tol) @ support_power(extend(psi), -0.5, tol)
    return functional_calculus(z, "abs").distance(J(functional_calculus(y, "abs")))


def check_ce_cocycle(E: ConditionalExpectation, inclusion: JordanMono, phi: StateDensity, psi: StateDensity,
                     t: float, tol: float | None = None) -> float:
    """‖(D(φ∘E):D(ψ∘E))_t − (Dφ:Dψ)_t‖ with states on the range pulled through the inclusion."""
    tol = resolve_tol(tol)
    parent = E.parent

    def lift(state):
        density = functional_density(parent, lambda y: state.evaluate(jordan_inverse(inclusion, E(y))))
        return density.hermitian_part()

    lhs = support_power(lift(phi), 1j * t, tol) @ support_power(lift(psi), -1j * t, tol)
    return lhs.distance(inclusion(connes_cocycle(phi, psi, t, tol)))
