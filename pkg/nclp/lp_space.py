"""L^p(M, τ) over a finite-dimensional algebra: weighted Schatten norms, duality,
orthogonality, the Clarkson equality test and the positive-cone decomposition."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as la

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    functional_calculus,
    spectral_map,
    support,
)
from .errors import DimensionMismatch, ExponentMismatch, NotPositive
from .shared import resolve_tol

logger = logging.getLogger(__name__)


def conjugate_exponent(p: float) -> float:
    """q with 1/p + 1/q = 1 (q = ∞ for p = 1)."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def schatten_norm(x: AlgebraElement, p: float) -> float:
    """(Σᵢ tᵢ Tr|xᵢ|^p)^{1/p}; the operator norm for p = ∞."""
    if math.isinf(p):
        return x.op_norm()
    total = 0.0
    for t, b in zip(x.algebra.trace_weights, x.blocks):
        total += t * float(np.sum(la.svdvals(b) ** p))
    return total ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class LpElement:
    element: AlgebraElement
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ExponentMismatch(f"L^p needs p >= 1, got {self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def algebra(self) -> AlgebraDescriptor:
        return self.element.algebra

    def norm(self) -> float:
        return lp_norm(self)

    def _check(self, other: "LpElement"):
        if other.algebra != self.algebra:
            raise DimensionMismatch("L^p elements over different algebras")
        if other.p != self.p:
            raise ExponentMismatch(f"exponents differ: {self.p} and {other.p}")

    def __add__(self, other: "LpElement") -> "LpElement":
        self._check(other)
        return LpElement(self.element + other.element, self.p)

    def __sub__(self, other: "LpElement") -> "LpElement":
        self._check(other)
        return LpElement(self.element - other.element, self.p)

    def __mul__(self, scalar) -> "LpElement":
        return LpElement(self.element * scalar, self.p)

    __rmul__ = __mul__

    def adjoint(self) -> "LpElement":
        return LpElement(self.element.adjoint(), self.p)

    def modulus(self) -> "LpElement":
        return LpElement(functional_calculus(self.element, "abs"), self.p)


def lp_norm(xi: LpElement) -> float:
    return schatten_norm(xi.element, xi.p)


@dataclass(frozen=True)
class OrthogonalityCheck:
    orthogonal: bool
    residual: float


def orthogonal(xi: LpElement, eta: LpElement, tol: float | None = None) -> OrthogonalityCheck:
    """
    ξη* = ξ*η = 0, relative to max(‖ξ‖, ‖η‖)² in operator norm.

    A partner that is round-off relative to the other element counts as zero, matching the
    relative tolerance of clarkson_equal.
    """
    xi._check(eta)
    tol = resolve_tol(tol)
    a, b = xi.element, eta.element
    scale = max(a.op_norm(), b.op_norm()) ** 2
    if scale == 0:
        return OrthogonalityCheck(True, 0.0)
    residual = max((a @ b.adjoint()).op_norm(), (a.adjoint() @ b).op_norm()) / scale
    return OrthogonalityCheck(residual <= tol, residual)


@dataclass(frozen=True)
class ClarksonCheck:
    equal: bool
    lhs: float
    rhs: float

    @property
    def relative_gap(self) -> float:
        return abs(self.lhs - self.rhs) / self.rhs if self.rhs > 0 else abs(self.lhs)


def clarkson_equal(xi: LpElement, eta: LpElement, tol: float | None = None) -> ClarksonCheck:
    """
    Both sides of ‖ξ+η‖^p + ‖ξ−η‖^p = 2(‖ξ‖^p + ‖η‖^p).

    For p ≠ 2 equality holds exactly when ξ and η are orthogonal; at p = 2 it always holds.
    """
    xi._check(eta)
    p = xi.p
    lhs = lp_norm(xi + eta) ** p + lp_norm(xi - eta) ** p
    rhs = 2.0 * (lp_norm(xi) ** p + lp_norm(eta) ** p)
    gap = abs(lhs - rhs)
    return ClarksonCheck(gap <= resolve_tol(tol) * max(rhs, 1e-300), lhs, rhs)


def _positive_part(h: AlgebraElement) -> AlgebraElement:
    return spectral_map(h, lambda w: np.clip(w, 0, None))


def positive_decompose(xi: LpElement) -> tuple[LpElement, LpElement, LpElement, LpElement]:
    """ξ = (h₁ − h₂) + i(h₃ − h₄) with h₁ ⊥ h₂ and h₃ ⊥ h₄, all positive."""
    re, im = xi.element.hermitian_part(), xi.element.imaginary_part()
    h1, h3 = _positive_part(re), _positive_part(im)
    h2, h4 = _positive_part(-re), _positive_part(-im)
    return tuple(LpElement(h, xi.p) for h in (h1, h2, h3, h4))


def dual_pairing(xi: LpElement, eta: LpElement | AlgebraElement) -> complex:
    """τ(ξη) for ξ ∈ L^p and η ∈ L^q with 1/p + 1/q = 1; a plain element stands for q = ∞."""
    if isinstance(eta, AlgebraElement):
        if xi.p != 1:
            raise ExponentMismatch(f"an L^∞ element pairs with L^1, not L^{xi.p}")
        other = eta
    else:
        if abs(1.0 / xi.p + 1.0 / eta.p - 1.0) > 1e-12:
            raise ExponentMismatch(f"{xi.p} and {eta.p} are not conjugate exponents")
        other = eta.element
    if other.algebra != xi.algebra:
        raise DimensionMismatch("pairing elements of different algebras")
    return (xi.element @ other).trace()


@dataclass(frozen=True, eq=False)
class StateDensity:
    """A positive functional φ(x) = τ(dx)."""

    algebra: AlgebraDescriptor
    d: AlgebraElement

    def __post_init__(self):
        if self.d.algebra != self.algebra:
            raise DimensionMismatch("density lives in a different algebra")
        if not self.d.is_positive():
            raise NotPositive("density is not positive", margin=self.d.positivity_margin())

    @classmethod
    def trace_state(cls, algebra: AlgebraDescriptor) -> "StateDensity":
        one = algebra.identity()
        return cls(algebra, one / algebra.trace(one).real)

    def evaluate(self, x: AlgebraElement) -> complex:
        return (self.d @ x).trace()

    def mass(self) -> float:
        return self.d.trace().real

    def normalized(self) -> "StateDensity":
        return StateDensity(self.algebra, self.d / self.mass())

    def support(self, tol: float | None = None) -> AlgebraElement:
        return support(self.d, tol)

    def faithfulness_margin(self) -> float:
        return self.d.positivity_margin()

    def is_faithful(self, tol: float | None = None) -> bool:
        return self.faithfulness_margin() > resolve_tol(tol) * max(1.0, self.d.op_norm())

    def to_lp(self, p: float) -> LpElement:
        """φ^{1/p} as an element of L^p."""
        return LpElement(functional_calculus(self.d, 1.0 / p), p)


def density_identify(h: AlgebraElement, p: float) -> StateDensity:
    """h ↔ τ_{h^p}: the functional whose p-th root is h."""
    if not h.is_positive():
        raise NotPositive("only positive elements correspond to functionals", margin=h.positivity_margin())
    return StateDensity(h.algebra, functional_calculus(h, p))


def functional_density(algebra: AlgebraDescriptor, f: Callable[[AlgebraElement], complex]) -> AlgebraElement:
    """The element D with τ(Dy) = f(y) for every y."""
    # τ(Dy) = ⟨D*, y⟩, so D* has coordinates conj(f(e_k)).
    coords = np.array([np.conj(f(e)) for e in algebra.basis], dtype=complex)
    return algebra.from_vector(coords).adjoint()
