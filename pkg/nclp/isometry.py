"""
L^p isometries: construction from Yeadon data (w, B, J) and typical data (w, J, P),
numerical verification, decomposition back into data, and the embeddings induced by
conditional expectations, antiautomorphisms and the symmetric form.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    SuperOperator,
    commutant,
    functional_calculus,
    polar,
    support,
    support_power,
)
from .errors import (
    DecompositionFailure,
    ExponentMismatch,
    InvalidTriple,
    NotIsometry,
)
from .jordan import (
    JordanMono,
    Mode,
    image_bicommutant,
    jordan_inverse,
    jordan_residuals,
    match_jordan,
    merge_parts,
    require_antiautomorphism,
    split_parts,
)
from .lp_space import (
    LpElement,
    StateDensity,
    conjugate_exponent,
    functional_density,
    orthogonal,
    positive_decompose,
    schatten_norm,
)
from .projections import (
    ConditionalExpectation,
    PositiveProjection,
    Symmetrizer,
    build_positive_projection,
    factor_projection,
    state_ce,
)
from .sampling import (
    random_element,
    random_partial_isometry,
    random_positive_definite,
    random_projection_pair,
    random_psd,
    random_unitary,
)
from .shared import resolve_tol, trial_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearMap(SuperOperator):
    """A linear map L^p(M₁) → L^p(M₂)."""

    p: float = 1.0

    def lp(self, xi: LpElement) -> LpElement:
        if xi.p != self.p:
            raise ExponentMismatch(f"map acts on L^{self.p}, got L^{xi.p}")
        return LpElement(self(xi.element), self.p)


@dataclass(frozen=True, eq=False)
class YeadonTriple:
    w: AlgebraElement
    B: AlgebraElement
    J: JordanMono
    p: float

    def residuals(self) -> dict[str, float]:
        J, one = self.J, self.J.unit()
        basis = J.source.basis
        Bp = functional_calculus(self.B, self.p)
        return {
            "partial_isometry": (self.w.adjoint() @ self.w).distance(one),
            "support": support(self.B).distance(one),
            "commutation": max(self.B.commutator(J(e)).op_norm() for e in basis),
            "trace": max(abs(e.trace() - (Bp @ J(e)).trace()) for e in basis),
        }

    def validate(self, tol: float | None = None) -> "YeadonTriple":
        tol = resolve_tol(tol)
        scale = max(1.0, self.B.op_norm()) ** max(self.p, 1.0)
        for name, value in self.residuals().items():
            if value > tol * scale * 1e3:
                logger.warning(f"Yeadon invariant {name} fails with residual {value:.3e}")
                raise InvalidTriple(f"Yeadon invariant {name} fails (residual {value:.3e})", invariant=name, residual=value)
        return self


@dataclass(frozen=True, eq=False)
class TypicalTriple:
    w: AlgebraElement
    J: JordanMono
    P: PositiveProjection
    p: float

    def residuals(self) -> dict[str, float]:
        one = self.J.unit()
        return {
            "partial_isometry": (self.w.adjoint() @ self.w).distance(one),
            "projection_unit": self.P.support().distance(one),
            "projection_support": support(self.P.support()).distance(one),
        }

    def validate(self, tol: float | None = None) -> "TypicalTriple":
        tol = resolve_tol(tol)
        for name, value in self.residuals().items():
            if value > 1e3 * tol:
                raise InvalidTriple(f"typical invariant {name} fails (residual {value:.3e})", invariant=name, residual=value)
        return self


# Construction


def construct_yeadon(data: YeadonTriple, tol: float | None = None) -> LinearMap:
    """T(x) = wBJ(x)."""
    data.validate(tol)
    wB = data.w @ data.B
    return LinearMap.from_function(data.J.source, data.J.target, lambda x: wB @ data.J(x), p=data.p)


def _two_summand_density(J: JordanMono, hp: AlgebraElement, parts, S: Symmetrizer) -> AlgebraElement:
    """Density of y ↦ φ_h(λ π⁻¹(F(y))) + φ_h((1 − λ) π′⁻¹(F(y))) with φ_h = τ(h^p ·)."""
    lam, co = S.lam, S.complement()
    coords = np.array([np.conj(((hp @ lam @ a) + (hp @ co @ b)).trace()) for a, b in parts])
    return J.target.from_vector(coords).adjoint().hermitian_part()


def construct_typical(data: TypicalTriple, tol: float | None = None) -> LinearMap:
    """
    T(φ^{1/p}) = w(φ∘J⁻¹∘P)^{1/p} on positives, extended linearly through the
    decomposition ξ = (h₁ − h₂) + i(h₃ − h₄).
    """
    data.validate(tol)
    J, p = data.J, data.p
    fac = factor_projection(data.P, tol)
    F, S = fac.conditional_expectation, fac.symmetrizer
    parts = [split_parts(J, F(e)) for e in J.target.basis]

    def on_positive(h: AlgebraElement) -> AlgebraElement:
        if h.op_norm() == 0:
            return J.target.zeros()
        density = _two_summand_density(J, functional_calculus(h, p), parts, S)
        return data.w @ functional_calculus(density, 1.0 / p)

    def apply(x: AlgebraElement) -> AlgebraElement:
        h1, h2, h3, h4 = (h.element for h in positive_decompose(LpElement(x, p)))
        return on_positive(h1) - on_positive(h2) + 1j * (on_positive(h3) - on_positive(h4))

    return LinearMap.from_function(J.source, J.target, apply, p=p)


# Verification


@dataclass(frozen=True)
class IsometryReport:
    max_rel_deviation: float
    positivity_of_T_on_cone: bool
    samples: int

    def passed(self, tol: float | None = None) -> bool:
        return self.max_rel_deviation <= resolve_tol(tol)

    def as_dict(self) -> dict:
        return {
            "max_rel_deviation": self.max_rel_deviation,
            "positivity_of_T_on_cone": self.positivity_of_T_on_cone,
            "samples": self.samples,
        }


def structured_samples(algebra: AlgebraDescriptor) -> list[AlgebraElement]:
    """All matrix units and all sums and differences of two of them."""
    units = [algebra.matrix_unit(*label) for label in algebra.basis_labels]
    out = list(units)
    for k, a in enumerate(units):
        for b in units[k + 1:]:
            out.extend((a + b, a - b))
    return out


def random_sample(algebra: AlgebraDescriptor, rng: np.random.Generator, kind: int) -> tuple[AlgebraElement, bool]:
    """One random input; the flag marks positive inputs."""
    kind = kind % 4
    if kind == 0:
        return random_element(algebra, rng), False
    if kind == 1:
        return random_psd(algebra, rng), True
    if kind == 2:
        return random_partial_isometry(algebra, rng), False
    q, rest = random_projection_pair(algebra, rng)
    return q @ random_element(algebra, rng) @ q + rest @ random_element(algebra, rng) @ rest, False


def _deviation(T: LinearMap, x: AlgebraElement) -> float:
    norm = schatten_norm(x, T.p)
    if norm == 0:
        return 0.0
    return abs(schatten_norm(T(x), T.p) - norm) / norm


def verify_isometry(T: LinearMap, trials: int = 100, seed: int = 0, workers: int = 1,
                    tol: float | None = None) -> IsometryReport:
    """Relative norm deviation over structured and seeded random inputs."""
    tol = resolve_tol(tol)
    algebra = T.domain
    worst = max((_deviation(T, x) for x in structured_samples(algebra)), default=0.0)

    def trial(index: int) -> tuple[float, bool]:
        rng = trial_rng(seed, "verify_isometry", index)
        x, positive = random_sample(algebra, rng, index)
        deviation = _deviation(T, x)
        keeps_cone = True
        if positive:
            image = T(x)
            keeps_cone = image.is_positive(tol) if image.op_norm() > 0 else True
        return deviation, keeps_cone

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(trial, range(trials)))
    else:
        results = [trial(k) for k in range(trials)]

    worst = max([worst] + [r[0] for r in results])
    cone = all(r[1] for r in results)
    samples = len(results) + len(structured_samples(algebra))
    logger.info(f"Isometry check over {samples} inputs: max deviation {worst:.3e}")
    return IsometryReport(worst, cone, samples)


def check_orthogonality_preservation(T: LinearMap, trials: int = 50, seed: int = 0,
                                     tol: float | None = None) -> float:
    """Largest orthogonality residual of T(ξ), T(η) over random orthogonal pairs ξ ⊥ η."""
    algebra = T.domain
    worst = 0.0
    for k in range(trials):
        rng = trial_rng(seed, "orthogonality", k)
        q, rest = random_projection_pair(algebra, rng)
        xi = LpElement(T(q @ random_element(algebra, rng) @ q), T.p)
        eta = LpElement(T(rest @ random_element(algebra, rng) @ rest), T.p)
        worst = max(worst, orthogonal(xi, eta, tol).residual)
    return worst


# Decomposition


_NUMERICAL_NOTE = (
    "the map is numerically isometric but does not decompose; at finite dimension every "
    "isometry with p != 2 is typical, so this points at numerical trouble, not a counterexample "
    "(p = 2 isometries need not be typical)"
)


def _require_isometry(T: LinearMap, trials: int, seed: int, tol: float):
    report = verify_isometry(T, trials, seed, tol=tol)
    if not report.passed(1e3 * tol):
        logger.warning(f"Map is not an isometry: deviation {report.max_rel_deviation:.3e}")
        raise NotIsometry(
            f"map is not an L^{T.p} isometry (relative deviation {report.max_rel_deviation:.3e})",
            deviation=report.max_rel_deviation,
        )


def decompose_isometry(T: LinearMap, p: float | None = None, trials: int = 50, seed: int = 0,
                       tol: float | None = None) -> YeadonTriple:
    """
    Recover (w, B, J) with T(x) = wBJ(x): w and B come from the polar decomposition of
    T(1), and J(x) = B⁺w*T(x).
    """
    tol = resolve_tol(tol)
    p = T.p if p is None else p
    if p != T.p:
        raise ExponentMismatch(f"map acts on L^{T.p}, decomposition asked for p = {p}")
    _require_isometry(T, trials, seed, tol)

    w, B = polar(T(T.domain.identity()), tol)
    B_inv = support_power(B, -1.0, tol)
    left = B_inv @ w.adjoint()
    K = SuperOperator.from_function(T.domain, T.codomain, lambda x: left @ T(x))
    report = jordan_residuals(K, tol)
    if not report.passed(1e3 * tol):
        logger.warning(f"B⁺w*T is not Jordan: {report.as_dict()}")
        raise DecompositionFailure(_NUMERICAL_NOTE, residuals=report.as_dict())
    J = match_jordan(K, 1e3 * tol)
    try:
        triple = YeadonTriple(w, B, J, p).validate(tol)
    except InvalidTriple as exc:
        raise DecompositionFailure(_NUMERICAL_NOTE, residuals={exc.invariant: exc.residual}) from exc
    rebuilt = construct_yeadon(triple, tol)
    mismatch = rebuilt.distance(T)
    if mismatch > 1e-8:
        raise DecompositionFailure(_NUMERICAL_NOTE, residuals={"reconstruction": mismatch})
    logger.info(f"Decomposed L^{p} isometry with {len(J.slots)} Jordan slots")
    return triple


def _rank_one(n: int, vector) -> np.ndarray:
    v = np.asarray(vector, dtype=complex)
    return np.outer(v, v.conj()) / np.vdot(v, v).real


def decompose_l1(T: LinearMap, trials: int = 50, seed: int = 0, tol: float | None = None) -> TypicalTriple:
    """
    Recover (w, J, P) of an L¹ isometry: w from the polar decomposition of T(1), J from the
    support map q ↦ s(w*T(q)) on projections, and P = J∘T₊* with T₊ = w*T.
    """
    tol = resolve_tol(tol)
    if T.p != 1:
        raise ExponentMismatch(f"the support-map decomposition applies to L^1, got L^{T.p}")
    _require_isometry(T, trials, seed, tol)
    source, target = T.domain, T.codomain

    w, _ = polar(T(source.identity()), tol)
    w_star = w.adjoint()
    T_plus = SuperOperator.from_function(source, target, lambda x: w_star @ T(x))

    def support_image(i: int, vector) -> AlgebraElement:
        blocks = [np.zeros((n, n), dtype=complex) for n in source.block_dims]
        blocks[i] = _rank_one(source.block_dims[i], vector)
        return support(T_plus(source.element(blocks)), tol)

    columns = []
    for i, a, b in source.basis_labels:
        n = source.block_dims[i]
        e_a, e_b = np.eye(n)[a], np.eye(n)[b]
        if a == b:
            image = support_image(i, e_a)
        else:
            diag = support_image(i, e_a) + support_image(i, e_b)
            real = support_image(i, e_a + e_b) * 2 - diag
            imag = support_image(i, e_a + 1j * e_b) * 2 - diag
            image = (real + imag * 1j) * 0.5
        columns.append(target.to_vector(image) / np.sqrt(source.trace_weights[i]))
    K = SuperOperator(source, target, np.column_stack(columns))
    J = match_jordan(K, 1e3 * tol)

    dual = T_plus.adjoint()
    unit_residual = dual(target.identity()).distance(source.identity())
    P = PositiveProjection(target, J, J.superoperator.compose(dual))
    support_residual = P.support().distance(J.unit())
    logger.info(f"L1 decomposition: T*(1) residual {unit_residual:.2e}, s(P) residual {support_residual:.2e}")
    if max(unit_residual, support_residual) > 1e3 * tol:
        raise DecompositionFailure(
            "dual map does not fix the unit or P(1) differs from J(1)",
            residuals={"dual_unit": unit_residual, "support": support_residual},
        )
    return TypicalTriple(w, J, P, 1.0)


# Conversions


def typical_to_yeadon(t: TypicalTriple, tol: float | None = None) -> YeadonTriple:
    """B = (density of τ₁∘J⁻¹∘P)^{1/p}."""
    J = t.J
    density = functional_density(J.target, lambda y: jordan_inverse(J, t.P(y)).trace()).hermitian_part()
    B = functional_calculus(density, 1.0 / t.p)
    return YeadonTriple(t.w, B, J, t.p).validate(tol)


def yeadon_to_typical(y: YeadonTriple, tol: float | None = None) -> TypicalTriple:
    """
    P = S_λ∘F with F the conditional expectation onto J(M₁)′′ preserving φ = τ₂(B^p ·)
    and λ read off the φ-mass of the multiplicative part.
    """
    tol = resolve_tol(tol)
    J = y.J
    phi = StateDensity(J.target, functional_calculus(y.B, y.p))
    F = state_ce(J.target, image_bicommutant(J, tol), phi, tol)
    z_m = J.mult_support
    values = []
    for i in range(J.source.num_blocks):
        unit = J.source.block_identity(i)
        values.append(phi.evaluate(z_m @ J(unit)).real / unit.trace().real)
    S = Symmetrizer.from_values(J, np.clip(values, 0.0, 1.0))
    P = build_positive_projection(J, F, S, tol)
    return TypicalTriple(y.w, J, P, y.p)


def normalize_typical(t: TypicalTriple, tol: float | None = None) -> TypicalTriple:
    """Drop the slots of J outside s(P) so that s(P) = P(1) = J(1)."""
    tol = resolve_tol(tol)
    J = t.J
    s = support(t.P.support(), tol)
    kept = []
    for slot in J.slots:
        n = J.source.block_dims[slot.src]
        blocks = [np.zeros((m, m), dtype=complex) for m in J.target.block_dims]
        blocks[slot.dst][slot.offset:slot.offset + n, slot.offset:slot.offset + n] = np.eye(n)
        u = J.conjugator
        q = u @ AlgebraElement(J.target, tuple(blocks)) @ u.adjoint()
        overlap = (s @ q).distance(q)
        if overlap <= 1e3 * tol:
            kept.append(slot)
        elif (s @ q).op_norm() > 1e3 * tol:
            raise InvalidTriple("s(P) cuts through a slot of J", invariant="slot_alignment", residual=overlap)
    J0 = JordanMono(J.source, J.target, tuple(kept), J.conjugator)
    P0 = PositiveProjection(J.target, J0, SuperOperator.from_function(J.target, J.target, lambda m: s @ t.P(m)))
    return TypicalTriple(t.w @ s, J0, P0, t.p)


# Embeddings


def _require_inclusion(E: ConditionalExpectation, inclusion: JordanMono, tol: float):
    if any(s.mode is Mode.ANTI and inclusion.source.block_dims[s.src] > 1 for s in inclusion.slots):
        raise InvalidTriple("the inclusion of the range must be multiplicative", invariant="inclusion")
    images = [inclusion(e) for e in inclusion.source.basis]
    residual = max(E.range.residual(x) for x in images)
    if residual > 1e3 * tol or E.range.dimension != inclusion.source.dimension:
        raise InvalidTriple("the inclusion does not map onto the range of E", invariant="range", residual=residual)


def embed_via_ce(E: ConditionalExpectation, inclusion: JordanMono, p: float,
                 tol: float | None = None) -> LinearMap:
    """φ^{1/p} ↦ (φ∘E)^{1/p}, with states on the range carried by the inclusion."""
    tol = resolve_tol(tol)
    _require_inclusion(E, inclusion, tol)
    N, M = inclusion.source, inclusion.target
    pulled = [jordan_inverse(inclusion, E(e)) for e in M.basis]

    def on_positive(h: AlgebraElement) -> AlgebraElement:
        hp = functional_calculus(h, p)
        coords = np.array([np.conj((hp @ x).trace()) for x in pulled])
        return functional_calculus(M.from_vector(coords).adjoint().hermitian_part(), 1.0 / p)

    def apply(x: AlgebraElement) -> AlgebraElement:
        h1, h2, h3, h4 = (h.element for h in positive_decompose(LpElement(x, p)))
        return on_positive(h1) - on_positive(h2) + 1j * (on_positive(h3) - on_positive(h4))

    return LinearMap.from_function(N, M, apply, p=p)


def embed_via_reference(E: ConditionalExpectation, inclusion: JordanMono, p: float, phi: StateDensity,
                        tol: float | None = None) -> LinearMap:
    """xφ^{1/p} ↦ J(x)(φ∘E)^{1/p} for a faithful reference state φ on the range."""
    tol = resolve_tol(tol)
    _require_inclusion(E, inclusion, tol)
    N, M = inclusion.source, inclusion.target
    lifted = functional_density(M, lambda y: phi.evaluate(jordan_inverse(inclusion, E(y)))).hermitian_part()
    root = functional_calculus(lifted, 1.0 / p)
    inverse_root = support_power(phi.d, -1.0 / p, tol)
    return LinearMap.from_function(N, M, lambda xi: inclusion(xi @ inverse_root) @ root, p=p)


def check_duality(E: ConditionalExpectation, inclusion: JordanMono, p: float, trials: int = 20, seed: int = 0,
                  tol: float | None = None) -> float:
    """max |⟨T_p ξ, T_q η⟩ − ⟨ξ, η⟩| over random pairs, for 1 < p < ∞."""
    if not 1 < p < np.inf:
        raise ExponentMismatch(f"duality is checked for 1 < p < ∞, got {p}")
    q = conjugate_exponent(p)
    T_p, T_q = embed_via_ce(E, inclusion, p, tol), embed_via_ce(E, inclusion, q, tol)
    N = inclusion.source
    worst = 0.0
    for k in range(trials):
        rng = trial_rng(seed, "duality", k)
        xi, eta = random_element(N, rng), random_element(N, rng)
        worst = max(worst, abs((T_p(xi) @ T_q(eta)).trace() - (xi @ eta).trace()))
    return worst


def isometry_from_antiiso(alpha: JordanMono, p: float, phi: StateDensity | None = None,
                          tol: float | None = None) -> LinearMap:
    """xφ^{1/p} ↦ (φ∘α⁻¹)^{1/p}α(x); the result does not depend on the faithful φ."""
    tol = resolve_tol(tol)
    require_antiautomorphism(alpha, tol)
    algebra = alpha.source
    phi = StateDensity.trace_state(algebra) if phi is None else phi
    moved = functional_density(algebra, lambda y: phi.evaluate(jordan_inverse(alpha, y))).hermitian_part()
    root = functional_calculus(moved, 1.0 / p)
    inverse_root = support_power(phi.d, -1.0 / p, tol)
    return LinearMap.from_function(algebra, algebra, lambda xi: root @ alpha(xi @ inverse_root), p=p)


def _extended_density(J: JordanMono, P: PositiveProjection, phi: StateDensity) -> AlgebraElement:
    return functional_density(J.target, lambda y: phi.evaluate(jordan_inverse(J, P(y)))).hermitian_part()


def symmetric_embedding(J: JordanMono, P: PositiveProjection, phi: StateDensity, p: float,
                        tol: float | None = None) -> LinearMap:
    """φ^{1/2p} x φ^{1/2p} ↦ φ̄^{1/2p} J(x) φ̄^{1/2p} with φ̄ = φ∘J⁻¹∘P."""
    tol = resolve_tol(tol)
    outer = functional_calculus(_extended_density(J, P, phi), 1.0 / (2 * p))
    inner = support_power(phi.d, -1.0 / (2 * p), tol)
    return LinearMap.from_function(J.source, J.target, lambda xi: outer @ J(inner @ xi @ inner) @ outer, p=p)


def companion_projection(J: JordanMono, P: PositiveProjection, phi: StateDensity, p: float,
                         tol: float | None = None) -> LinearMap:
    """φ̄^{1/2p} y φ̄^{1/2p} ↦ φ^{1/2p} J⁻¹(P(y)) φ^{1/2p}, the left inverse of symmetric_embedding."""
    tol = resolve_tol(tol)
    outer_inv = support_power(_extended_density(J, P, phi), -1.0 / (2 * p), tol)
    inner = functional_calculus(phi.d, 1.0 / (2 * p))
    return LinearMap.from_function(
        J.target, J.source, lambda eta: inner @ jordan_inverse(J, P(outer_inv @ eta @ outer_inv)) @ inner, p=p
    )


# Uniqueness


@dataclass(frozen=True)
class UniquenessReport:
    w: float
    jordan: float
    projection: float

    def passed(self, tol: float = 1e-9) -> bool:
        return max(self.w, self.jordan, self.projection) <= tol


def uniqueness_residuals(T: LinearMap, tol: float | None = None) -> UniquenessReport:
    """Decompose, rebuild, decompose again and compare the two triples."""
    first = yeadon_to_typical(decompose_isometry(T, tol=tol), tol)
    rebuilt = construct_typical(first, tol)
    second = yeadon_to_typical(decompose_isometry(rebuilt, tol=tol), tol)
    return UniquenessReport(
        first.w.distance(second.w),
        first.J.superoperator.distance(second.J.superoperator),
        first.P.map.distance(second.P.map),
    )


def uniqueness_roundtrip(T: LinearMap, p: float | None = None, tol: float | None = None) -> bool:
    if p is not None and p != T.p:
        raise ExponentMismatch(f"map acts on L^{T.p}, asked for p = {p}")
    report = uniqueness_residuals(T, tol)
    logger.debug(f"Uniqueness residuals: w {report.w:.2e}, J {report.jordan:.2e}, P {report.projection:.2e}")
    return report.passed(resolve_tol(tol))


# Random data


def random_projection_data(J: JordanMono, rng: np.random.Generator,
                           tol: float | None = None) -> tuple[ConditionalExpectation, Symmetrizer, PositiveProjection]:
    """
    Random admissible (F, S_λ, P): F preserves a state with density J(1)·n·c·J(1) for
    positive invertible n ∈ J(M₁)′′ and c ∈ J(M₁)′, and λ is drawn from (0.2, 0.8) per block.
    The density lives on J(1), so φ∘F = φ holds on the whole target even when J is not unital.
    """
    tol = resolve_tol(tol)
    target = J.target
    n = merge_parts(J, random_positive_definite(J.source, rng, 0.3), random_positive_definite(J.source, rng, 0.3))
    relative = commutant([J(e) for e in J.source.basis], target, tol)
    g = relative.element(rng.normal(size=relative.dimension) + 1j * rng.normal(size=relative.dimension))
    g = g / max(g.op_norm(), 1e-12)
    c = g @ g.adjoint() + target.identity() * 0.5
    d = J.unit() @ n @ c @ J.unit()
    phi = StateDensity(target, d.hermitian_part())
    F = state_ce(target, image_bicommutant(J, tol), phi, tol)
    S = Symmetrizer.from_values(J, rng.uniform(0.2, 0.8, size=J.source.num_blocks))
    return F, S, build_positive_projection(J, F, S, tol)


def random_typical_triple(J: JordanMono, rng: np.random.Generator, p: float,
                          tol: float | None = None) -> TypicalTriple:
    """Random (w, J, P) with P from random_projection_data and w = V·J(1) for a random unitary V."""
    _, _, P = random_projection_data(J, rng, tol)
    w = random_unitary(J.target, rng) @ J.unit()
    return TypicalTriple(w, J, P, p)
