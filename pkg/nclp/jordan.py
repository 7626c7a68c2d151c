"""
Normal Jordan *-monomorphisms between finite-dimensional algebras.

A JordanMono is stored constructively: each slot copies one source block (MULT) or its
transpose (ANTI) onto a diagonal sub-block of one target block, and the result is
conjugated by a unitary U of the target, J(x) = U·embed(x)·U*. A raw superoperator that is
Jordan can be brought to this form with match_jordan.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.linalg as la

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    SubalgebraBasis,
    SuperOperator,
    generated_algebra,
    minimal_central_projections,
)
from .errors import AmbiguousBlock, DecompositionFailure, DimensionMismatch, NotAntiauto
from .shared import resolve_tol

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    MULT = "MULT"
    ANTI = "ANTI"


@dataclass(frozen=True)
class Slot:
    src: int
    dst: int
    offset: int
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True, eq=False)
class JordanMono:
    source: AlgebraDescriptor
    target: AlgebraDescriptor
    slots: tuple[Slot, ...]
    conjugator: AlgebraElement | None = None

    def __post_init__(self):
        slots = tuple(s if isinstance(s, Slot) else Slot(*s) for s in self.slots)
        object.__setattr__(self, "slots", slots)
        if self.conjugator is None:
            object.__setattr__(self, "conjugator", self.target.identity())
        elif self.conjugator.algebra != self.target:
            raise DimensionMismatch("conjugator must be an element of the target algebra")

        occupied: dict[int, list[tuple[int, int]]] = {}
        for s in slots:
            if not 0 <= s.src < self.source.num_blocks:
                raise DimensionMismatch(f"slot source block {s.src} out of range")
            if not 0 <= s.dst < self.target.num_blocks:
                raise DimensionMismatch(f"slot target block {s.dst} out of range")
            n = self.source.block_dims[s.src]
            if s.offset < 0 or s.offset + n > self.target.block_dims[s.dst]:
                raise DimensionMismatch(
                    f"a {n}x{n} block does not fit at offset {s.offset} "
                    f"of target block {s.dst} (size {self.target.block_dims[s.dst]})"
                )
            for lo, hi in occupied.get(s.dst, []):
                if s.offset < hi and lo < s.offset + n:
                    raise DimensionMismatch(f"slots overlap inside target block {s.dst}")
            occupied.setdefault(s.dst, []).append((s.offset, s.offset + n))
        missing = set(range(self.source.num_blocks)) - {s.src for s in slots}
        if missing:
            raise DimensionMismatch(f"source blocks {sorted(missing)} have no slot; J would not be injective")

    # Standard examples

    @classmethod
    def identity(cls, algebra: AlgebraDescriptor) -> "JordanMono":
        return cls(algebra, algebra, tuple(Slot(i, i, 0, Mode.MULT) for i in range(algebra.num_blocks)))

    @classmethod
    def transpose(cls, algebra: AlgebraDescriptor) -> "JordanMono":
        return cls(algebra, algebra, tuple(Slot(i, i, 0, Mode.ANTI) for i in range(algebra.num_blocks)))

    @classmethod
    def doubling(cls, n: int = 2, weight: float = 1.0) -> "JordanMono":
        """M_n → M_2n, x ↦ diag(x, xᵗ)."""
        return cls(
            AlgebraDescriptor.of(n),
            AlgebraDescriptor.of(2 * n, weights=[weight]),
            (Slot(0, 0, 0, Mode.MULT), Slot(0, 0, n, Mode.ANTI)),
        )

    def with_conjugator(self, u: AlgebraElement) -> "JordanMono":
        return JordanMono(self.source, self.target, self.slots, u)

    # Application

    def embed(self, x: AlgebraElement) -> AlgebraElement:
        """Slot placement without the conjugator."""
        if x.algebra != self.source:
            raise DimensionMismatch("argument is not in the source algebra")
        blocks = [np.zeros((n, n), dtype=complex) for n in self.target.block_dims]
        for s in self.slots:
            b = x.blocks[s.src]
            n = b.shape[0]
            blocks[s.dst][s.offset:s.offset + n, s.offset:s.offset + n] = b if s.mode is Mode.MULT else b.T
        return AlgebraElement(self.target, tuple(blocks))

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        return jordan_apply(self, x)

    @cached_property
    def superoperator(self) -> SuperOperator:
        return SuperOperator.from_function(self.source, self.target, self)

    def unit(self) -> AlgebraElement:
        return self(self.source.identity())

    def is_pi_slot(self, slot: Slot) -> bool:
        # Abelian summands count as multiplicative.
        return slot.mode is Mode.MULT or self.source.block_dims[slot.src] == 1

    def has_pi(self, i: int) -> bool:
        return any(self.is_pi_slot(s) for s in self.slots if s.src == i)

    def has_pi_prime(self, i: int) -> bool:
        return any(not self.is_pi_slot(s) for s in self.slots if s.src == i)

    def _slot_projection(self, keep) -> AlgebraElement:
        blocks = [np.zeros((n, n), dtype=complex) for n in self.target.block_dims]
        for s in self.slots:
            if keep(s):
                n = self.source.block_dims[s.src]
                blocks[s.dst][s.offset:s.offset + n, s.offset:s.offset + n] = np.eye(n)
        u = self.conjugator
        return u @ AlgebraElement(self.target, tuple(blocks)) @ u.adjoint()

    @cached_property
    def mult_support(self) -> AlgebraElement:
        """s(π): the unit of the multiplicative part."""
        return self._slot_projection(self.is_pi_slot)

    @cached_property
    def anti_support(self) -> AlgebraElement:
        """s(π′): the unit of the antimultiplicative part."""
        return self._slot_projection(lambda s: not self.is_pi_slot(s))


def jordan_apply(J: JordanMono, x: AlgebraElement) -> AlgebraElement:
    u = J.conjugator
    return u @ J.embed(x) @ u.adjoint()


def jordan_inverse(J: JordanMono, y: AlgebraElement) -> AlgebraElement:
    """Left inverse of J, read from the first slot of each source block."""
    if y.algebra != J.target:
        raise DimensionMismatch("argument is not in the target algebra")
    u = J.conjugator
    z = u.adjoint() @ y @ u
    blocks = [None] * J.source.num_blocks
    for s in J.slots:
        if blocks[s.src] is not None:
            continue
        n = J.source.block_dims[s.src]
        sub = z.blocks[s.dst][s.offset:s.offset + n, s.offset:s.offset + n]
        blocks[s.src] = sub if s.mode is Mode.MULT else sub.T
    return AlgebraElement(J.source, tuple(blocks))


def split_parts(J: JordanMono, y: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """(π⁻¹(y), π′⁻¹(y)) for y in J(M₁)′′; blocks without the part are zero."""
    if y.algebra != J.target:
        raise DimensionMismatch("argument is not in the target algebra")
    u = J.conjugator
    z = u.adjoint() @ y @ u
    pi_blocks = [np.zeros((n, n), dtype=complex) for n in J.source.block_dims]
    anti_blocks = [np.zeros((n, n), dtype=complex) for n in J.source.block_dims]
    seen_pi, seen_anti = set(), set()
    for s in J.slots:
        n = J.source.block_dims[s.src]
        sub = z.blocks[s.dst][s.offset:s.offset + n, s.offset:s.offset + n]
        if J.is_pi_slot(s):
            if s.src not in seen_pi:
                pi_blocks[s.src] = sub if s.mode is Mode.MULT else sub.T
                seen_pi.add(s.src)
        elif s.src not in seen_anti:
            anti_blocks[s.src] = sub.T
            seen_anti.add(s.src)
    return AlgebraElement(J.source, tuple(pi_blocks)), AlgebraElement(J.source, tuple(anti_blocks))


def merge_parts(J: JordanMono, x_pi: AlgebraElement, x_anti: AlgebraElement) -> AlgebraElement:
    """π(x_pi) ⊕ π′(x_anti), the general element of J(M₁)′′."""
    blocks = [np.zeros((n, n), dtype=complex) for n in J.target.block_dims]
    for s in J.slots:
        n = J.source.block_dims[s.src]
        if J.is_pi_slot(s):
            b = x_pi.blocks[s.src]
            b = b if s.mode is Mode.MULT else b.T
        else:
            b = x_anti.blocks[s.src].T
        blocks[s.dst][s.offset:s.offset + n, s.offset:s.offset + n] = b
    u = J.conjugator
    return u @ AlgebraElement(J.target, tuple(blocks)) @ u.adjoint()


@dataclass(frozen=True)
class JordanReport:
    jordan_product_residual: float
    star_residual: float
    injectivity_ok: bool
    unit_is_projection: bool
    unit_residual: float = 0.0

    def passed(self, tol: float | None = None) -> bool:
        tol = resolve_tol(tol)
        return (
            self.jordan_product_residual <= tol
            and self.star_residual <= tol
            and self.injectivity_ok
            and self.unit_is_projection
        )

    def as_dict(self) -> dict:
        return {
            "jordan_product_residual": self.jordan_product_residual,
            "star_residual": self.star_residual,
            "injectivity_ok": self.injectivity_ok,
            "unit_is_projection": self.unit_is_projection,
            "unit_residual": self.unit_residual,
        }


def jordan_residuals(K: SuperOperator, tol: float | None = None) -> JordanReport:
    """Jordan-product, *-preservation, injectivity and unit checks of a raw linear map."""
    tol = resolve_tol(tol)
    basis = K.domain.basis
    images = [K(e) for e in basis]
    product = 0.0
    star = 0.0
    for a, ka in zip(basis, images):
        star = max(star, K(a.adjoint()).distance(ka.adjoint()))
        for b, kb in zip(basis, images):
            product = max(product, K(a.jordan(b)).distance(ka.jordan(kb)))
    svals = la.svdvals(K.matrix)
    injective = bool(svals.size == K.domain.dimension and svals.min() > tol * max(1.0, svals.max()))
    unit = K(K.domain.identity())
    unit_residual = unit.projection_residual()
    return JordanReport(product, star, injective, unit_residual <= tol, unit_residual)


def verify_jordan_mono(J: JordanMono, tol: float | None = None) -> JordanReport:
    report = jordan_residuals(J.superoperator, tol)
    logger.debug(f"Jordan check: product {report.jordan_product_residual:.2e}, star {report.star_residual:.2e}")
    return report


def image_bicommutant(J: JordanMono, tol: float | None = None) -> SubalgebraBasis:
    """J(M₁)′′ as the *-algebra generated by J(M₁), with unit J(1)."""
    return generated_algebra([J(e) for e in J.source.basis], J.target, tol)


def _classify(K: SuperOperator, z: AlgebraElement, tol: float) -> tuple[Mode, float, float]:
    basis = K.domain.basis
    images = [z @ K(e) for e in basis]
    r_mult = r_anti = 0.0
    for a, ka in zip(basis, images):
        for b, kb in zip(basis, images):
            kab = z @ K(a @ b)
            r_mult = max(r_mult, kab.distance(ka @ kb))
            r_anti = max(r_anti, kab.distance(kb @ ka))
    scale = max(1.0, max(e.op_norm() for e in images) ** 2)
    if r_mult <= tol * scale:
        return Mode.MULT, r_mult, r_anti
    if r_anti <= tol * scale:
        return Mode.ANTI, r_mult, r_anti
    logger.warning(f"Central summand is neither multiplicative ({r_mult:.2e}) nor antimultiplicative ({r_anti:.2e})")
    raise AmbiguousBlock(
        "a minimal central summand of J(M1)'' is neither multiplicative nor antimultiplicative",
        residuals={"mult": r_mult, "anti": r_anti},
    )


def _classified_summands(K: SuperOperator, tol: float) -> list[tuple[AlgebraElement, Mode]]:
    images = [K(e) for e in K.domain.basis]
    A = generated_algebra(images, K.codomain, tol)
    out = []
    for z in minimal_central_projections(A, tol):
        mode, r_mult, r_anti = _classify(K, z, tol)
        logger.debug(f"Summand of rank {z.trace().real:.3g} classified {mode.value} (residuals {r_mult:.2e}, {r_anti:.2e})")
        out.append((z, mode))
    return out


def structure_decompose(J: JordanMono, tol: float | None = None) -> tuple[AlgebraElement, AlgebraElement]:
    """
    (z_mult, z_anti): central projections of J(M₁)′′ on which J is multiplicative and
    antimultiplicative. Abelian summands, where both hold, are counted as multiplicative.
    """
    tol = resolve_tol(tol)
    z_mult, z_anti = J.target.zeros(), J.target.zeros()
    for z, mode in _classified_summands(J.superoperator, tol):
        if mode is Mode.MULT:
            z_mult = z_mult + z
        else:
            z_anti = z_anti + z
    return z_mult, z_anti


def match_jordan(K: SuperOperator, tol: float | None = None) -> JordanMono:
    """Recover slots and conjugating unitary of a raw Jordan *-monomorphism."""
    tol = resolve_tol(tol)
    report = jordan_residuals(K, tol)
    if not report.passed(tol):
        raise DecompositionFailure("map is not a Jordan *-monomorphism", residuals=report.as_dict())
    source, target = K.domain, K.codomain
    block_units = [K(source.block_identity(i)) for i in range(source.num_blocks)]

    columns: list[list[np.ndarray]] = [[] for _ in target.block_dims]
    slots: list[Slot] = []
    for z, mode in _classified_summands(K, tol):
        i = int(np.argmax([(z @ q).hs_norm() for q in block_units]))
        n = source.block_dims[i]
        if n == 1:
            mode = Mode.MULT
        Q = z @ K(source.matrix_unit(i, 0, 0))
        if mode is Mode.MULT:
            generators = [z @ K(source.matrix_unit(i, a, 0)) for a in range(n)]
        else:
            generators = [z @ K(source.matrix_unit(i, 0, a)) for a in range(n)]
        for s, qs in enumerate(Q.blocks):
            w, v = la.eigh((qs + qs.conj().T) / 2)
            vs = v[:, w > 0.5]
            for r in range(vs.shape[1]):
                slots.append(Slot(i, s, len(columns[s]), mode))
                columns[s].extend(g.blocks[s] @ vs[:, r] for g in generators)

    u_blocks = []
    for s, m in enumerate(target.block_dims):
        used = np.column_stack(columns[s]) if columns[s] else np.zeros((m, 0), dtype=complex)
        if used.shape[1] > m:
            raise DecompositionFailure(f"recovered slots overflow target block {s}", residuals={"columns": used.shape[1]})
        rest = la.null_space(used.conj().T) if used.shape[1] else np.eye(m, dtype=complex)
        u_blocks.append(np.column_stack([used, rest[:, : m - used.shape[1]]]))
    J = JordanMono(source, target, tuple(slots), AlgebraElement(target, tuple(u_blocks)))

    mismatch = J.superoperator.distance(K)
    if mismatch > 1e3 * tol:
        logger.warning(f"Matched Jordan map differs from the input by {mismatch:.2e}")
        raise DecompositionFailure(
            "recovered slot form does not reproduce the map", residuals={"match": mismatch}
        )
    logger.info(f"Matched Jordan map with {len(slots)} slots")
    return J


def require_antiautomorphism(alpha: JordanMono, tol: float | None = None):
    """Raise NotAntiauto unless alpha is a surjective *-antiautomorphism of its source."""
    tol = resolve_tol(tol)
    if alpha.source != alpha.target:
        raise NotAntiauto("an antiautomorphism maps an algebra onto itself")
    if any(s.mode is not Mode.ANTI and alpha.source.block_dims[s.src] > 1 for s in alpha.slots):
        raise NotAntiauto("map has multiplicative slots")
    report = verify_jordan_mono(alpha, tol)
    if not report.passed(tol) or alpha.unit().distance(alpha.target.identity()) > tol:
        raise NotAntiauto("map is not a surjective *-antiautomorphism")
