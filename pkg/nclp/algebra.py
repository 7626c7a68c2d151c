"""
Finite-dimensional von Neumann algebras as direct sums of full matrix blocks.

An algebra is described by its block sizes and the weights of its trace
τ(x) = Σ tᵢ Tr(xᵢ). Elements are stored densely, block by block. Linear maps between
algebras are dense matrices over the trace-orthonormal basis {E_ab / √tᵢ}, in which
⟨a, b⟩ = τ(a*b) becomes the standard inner product of coordinate vectors.

The commutant machinery (commutant, bicommutant, generated_algebra, center,
minimal_central_projections) reduces every question to a rank decision on a dense
matrix; rank decisions that fall inside the tolerance band raise DegenerateBasis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la

from .errors import DegenerateBasis, DimensionMismatch, NotPositive
from .shared import resolve_tol

logger = logging.getLogger(__name__)

# Singular values within a factor RANK_BAND of the rank threshold are ambiguous.
RANK_BAND = 100.0


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Block sizes nᵢ and trace weights tᵢ of M = ⊕ M_nᵢ."""

    block_dims: tuple[int, ...]
    trace_weights: tuple[float, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        weights = tuple(float(t) for t in self.trace_weights)
        if not dims:
            raise DimensionMismatch("an algebra needs at least one block")
        if len(dims) != len(weights):
            raise DimensionMismatch(
                f"{len(dims)} block dims but {len(weights)} trace weights"
            )
        if any(n < 1 for n in dims):
            raise DimensionMismatch(f"block dims must be positive: {dims}")
        if any(not t > 0 for t in weights):
            raise DimensionMismatch(f"trace weights must be strictly positive: {weights}")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "trace_weights", weights)

    @classmethod
    def of(cls, *dims: int, weights: Sequence[float] | None = None) -> "AlgebraDescriptor":
        if weights is None:
            weights = (1.0,) * len(dims)
        return cls(tuple(dims), tuple(weights))

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        return sum(n * n for n in self.block_dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.block_dims:
            out.append(acc)
            acc += n * n
        return tuple(out)

    # Constructors

    def element(self, blocks) -> "AlgebraElement":
        return AlgebraElement(self, tuple(blocks))

    def zeros(self) -> "AlgebraElement":
        return self.element(np.zeros((n, n), dtype=complex) for n in self.block_dims)

    def identity(self) -> "AlgebraElement":
        return self.element(np.eye(n, dtype=complex) for n in self.block_dims)

    def block_identity(self, i: int) -> "AlgebraElement":
        return self.element(
            np.eye(n, dtype=complex) if k == i else np.zeros((n, n), dtype=complex)
            for k, n in enumerate(self.block_dims)
        )

    def matrix_unit(self, i: int, a: int, b: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[i][a, b] = 1.0
        return self.element(blocks)

    def scalar(self, value: complex) -> "AlgebraElement":
        return self.identity() * value

    # Trace and coordinates

    def trace(self, x: "AlgebraElement") -> complex:
        return complex(sum(t * np.trace(b) for t, b in zip(self.trace_weights, x.blocks)))

    def inner(self, a: "AlgebraElement", b: "AlgebraElement") -> complex:
        """⟨a, b⟩ = τ(a*b)."""
        return complex(np.vdot(a.to_vector(), b.to_vector()))

    def to_vector(self, x: "AlgebraElement") -> np.ndarray:
        return np.concatenate(
            [np.sqrt(t) * b.reshape(-1) for t, b in zip(self.trace_weights, x.blocks)]
        )

    def from_vector(self, v: np.ndarray) -> "AlgebraElement":
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.dimension,):
            raise DimensionMismatch(f"vector of shape {v.shape} for algebra of dimension {self.dimension}")
        blocks = []
        for n, t, off in zip(self.block_dims, self.trace_weights, self.offsets):
            blocks.append(v[off:off + n * n].reshape(n, n) / np.sqrt(t))
        return self.element(blocks)

    @cached_property
    def basis_labels(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(
            (i, a, b)
            for i, n in enumerate(self.block_dims)
            for a in range(n)
            for b in range(n)
        )

    @cached_property
    def basis(self) -> tuple["AlgebraElement", ...]:
        """Trace-orthonormal basis E_ab / √tᵢ, ordered like the coordinate vector."""
        eye = np.eye(self.dimension)
        return tuple(self.from_vector(eye[k]) for k in range(self.dimension))

    @cached_property
    def hermitian_basis(self) -> tuple["AlgebraElement", ...]:
        """Trace-orthonormal real basis of the Hermitian elements."""
        out = []
        for i, (n, t) in enumerate(zip(self.block_dims, self.trace_weights)):
            for a in range(n):
                out.append(self.matrix_unit(i, a, a) / np.sqrt(t))
            for a in range(n):
                for b in range(a + 1, n):
                    e_ab, e_ba = self.matrix_unit(i, a, b), self.matrix_unit(i, b, a)
                    out.append((e_ab + e_ba) / np.sqrt(2 * t))
                    out.append((e_ab - e_ba) * (1j / np.sqrt(2 * t)))
        return tuple(out)

    @cached_property
    def central_units(self) -> tuple["AlgebraElement", ...]:
        """Block identities; they span the center Z(M)."""
        return tuple(self.block_identity(i) for i in range(self.num_blocks))

    def to_json(self) -> dict:
        return {"dims": list(self.block_dims), "weights": list(self.trace_weights)}


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: AlgebraDescriptor
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        if len(blocks) != self.algebra.num_blocks:
            raise DimensionMismatch(
                f"{len(blocks)} blocks given for an algebra with {self.algebra.num_blocks}"
            )
        for i, (b, n) in enumerate(zip(blocks, self.algebra.block_dims)):
            if b.shape != (n, n):
                raise DimensionMismatch(f"block {i} has shape {b.shape}, expected {(n, n)}")
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    def _same(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise DimensionMismatch("elements live in different algebras")
        return None

    def _map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(fn(b) for b in self.blocks))

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return self._map(lambda b: -b)

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return self._map(lambda b: b * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._map(lambda b: b / scalar)

    def __matmul__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> "AlgebraElement":
        return self._map(lambda b: b.conj().T)

    def transpose(self) -> "AlgebraElement":
        return self._map(lambda b: b.T)

    def jordan(self, other: "AlgebraElement") -> "AlgebraElement":
        """Jordan product x ∙ y = (xy + yx)/2."""
        return (self @ other + other @ self) * 0.5

    def commutator(self, other: "AlgebraElement") -> "AlgebraElement":
        return self @ other - other @ self

    def compress(self, e: "AlgebraElement") -> "AlgebraElement":
        return e @ self @ e

    def hermitian_part(self) -> "AlgebraElement":
        return (self + self.adjoint()) * 0.5

    def imaginary_part(self) -> "AlgebraElement":
        return (self - self.adjoint()) * (-0.5j)

    def trace(self) -> complex:
        return self.algebra.trace(self)

    def to_vector(self) -> np.ndarray:
        return self.algebra.to_vector(self)

    def op_norm(self) -> float:
        return max(
            (float(la.norm(b, 2)) if b.size else 0.0) for b in self.blocks
        )

    def hs_norm(self) -> float:
        """τ(x*x)^{1/2}."""
        return float(np.linalg.norm(self.to_vector()))

    def distance(self, other: "AlgebraElement") -> float:
        return (self - other).op_norm()

    def allclose(self, other: "AlgebraElement", tol: float | None = None) -> bool:
        tol = resolve_tol(tol)
        return self.distance(other) <= tol * max(1.0, self.op_norm(), other.op_norm())

    # Margin predicates

    def hermitian_residual(self) -> float:
        return self.distance(self.adjoint())

    def positivity_margin(self) -> float:
        """Smallest eigenvalue of the Hermitian part."""
        h = self.hermitian_part()
        return min(float(la.eigvalsh(b)[0]) for b in h.blocks)

    def projection_residual(self) -> float:
        return max(self.hermitian_residual(), self.distance(self @ self))

    def partial_isometry_residual(self) -> float:
        q = self.adjoint() @ self
        return q.distance(q @ q)

    def unitary_residual(self) -> float:
        one = self.algebra.identity()
        return max((self.adjoint() @ self).distance(one), (self @ self.adjoint()).distance(one))

    def is_hermitian(self, tol: float | None = None) -> bool:
        return self.hermitian_residual() <= resolve_tol(tol) * max(1.0, self.op_norm())

    def is_positive(self, tol: float | None = None) -> bool:
        return self.is_hermitian(tol) and self.positivity_margin() >= -resolve_tol(tol) * max(1.0, self.op_norm())

    def is_projection(self, tol: float | None = None) -> bool:
        return self.projection_residual() <= resolve_tol(tol)


def rank_threshold(values: np.ndarray, tol: float | None = None) -> float:
    values = np.abs(np.asarray(values))
    scale = float(values.max()) if values.size else 0.0
    return resolve_tol(tol) * max(scale, 1e-300)


def spectral_map(x: AlgebraElement, fn: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement:
    """Apply fn to the eigenvalues of a Hermitian element."""
    blocks = []
    for b in x.blocks:
        w, v = la.eigh((b + b.conj().T) / 2)
        blocks.append((v * fn(w)) @ v.conj().T)
    return AlgebraElement(x.algebra, tuple(blocks))


def functional_calculus(x: AlgebraElement, f: float | str, tol: float | None = None) -> AlgebraElement:
    """
    f(x) for a positive element: f is a power α > 0, or "abs" for |x| = (x*x)^{1/2}.

    Powers keep the support of x: eigenvalues at or below the rank threshold, round-off
    included, are treated as zero.
    """
    if f == "abs":
        return polar(x, tol)[1]
    alpha = float(f)
    if not alpha > 0:
        raise ValueError(f"power must be positive, got {alpha}")
    tol = resolve_tol(tol)
    margin = x.positivity_margin()
    scale = max(1.0, x.op_norm())
    if x.hermitian_residual() > tol * scale or margin < -tol * scale:
        raise NotPositive(f"element is not positive (min eigenvalue {margin:.3e})", margin=margin)
    thr = rank_threshold(np.concatenate([la.eigvalsh((b + b.conj().T) / 2) for b in x.blocks]), tol)
    return spectral_map(x, lambda w: np.where(w > thr, np.clip(w, thr, None), 0.0) ** alpha)


def support_power(x: AlgebraElement, exponent: complex, tol: float | None = None) -> AlgebraElement:
    """x^exponent on the support of a positive x, zero on its kernel (any complex exponent)."""
    tol = resolve_tol(tol)
    blocks = []
    all_w = np.concatenate([la.eigvalsh((b + b.conj().T) / 2) for b in x.blocks])
    thr = rank_threshold(all_w, tol)
    for b in x.blocks:
        w, v = la.eigh((b + b.conj().T) / 2)
        keep = w > thr
        vals = np.zeros_like(w, dtype=complex)
        vals[keep] = np.power(w[keep].astype(complex), exponent)
        blocks.append((v * vals) @ v.conj().T)
    return AlgebraElement(x.algebra, tuple(blocks))


def support(x: AlgebraElement, tol: float | None = None) -> AlgebraElement:
    """Support projection of a positive (or Hermitian) element."""
    return support_power(x, 0.0, tol)


def polar(x: AlgebraElement, tol: float | None = None) -> tuple[AlgebraElement, AlgebraElement]:
    """x = w|x| with w*w the support of |x|; SVD per block."""
    svals = np.concatenate([la.svdvals(b) for b in x.blocks])
    thr = rank_threshold(svals, tol)
    ws, abs_blocks = [], []
    for b in x.blocks:
        u, s, vh = la.svd(b)
        r = int(np.sum(s > thr)) if s.size and s.max() > 0 else 0
        ws.append(u[:, :r] @ vh[:r])
        abs_blocks.append((vh.conj().T * s) @ vh)
    return AlgebraElement(x.algebra, tuple(ws)), AlgebraElement(x.algebra, tuple(abs_blocks))


def supports(x: AlgebraElement, tol: float | None = None) -> tuple[AlgebraElement, AlgebraElement]:
    """Left and right support projections."""
    svals = np.concatenate([la.svdvals(b) for b in x.blocks])
    thr = rank_threshold(svals, tol)
    left, right = [], []
    for b in x.blocks:
        u, s, vh = la.svd(b)
        r = int(np.sum(s > thr)) if s.size and s.max() > 0 else 0
        left.append(u[:, :r] @ u[:, :r].conj().T)
        right.append(vh[:r].conj().T @ vh[:r])
    return AlgebraElement(x.algebra, tuple(left)), AlgebraElement(x.algebra, tuple(right))


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """A linear map between algebras as a matrix over trace-orthonormal bases."""

    domain: AlgebraDescriptor
    codomain: AlgebraDescriptor
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dimension, self.domain.dimension):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match "
                f"{self.codomain.dimension}x{self.domain.dimension}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_function(cls, domain, codomain, fn, **extra):
        columns = [codomain.to_vector(fn(e)) for e in domain.basis]
        return cls(domain, codomain, np.column_stack(columns), **extra)

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra != self.domain:
            raise DimensionMismatch("argument is not in the domain of the map")
        return self.codomain.from_vector(self.matrix @ x.to_vector())

    def compose(self, other: "SuperOperator") -> "SuperOperator":
        """self ∘ other."""
        if other.codomain != self.domain:
            raise DimensionMismatch("maps cannot be composed")
        return SuperOperator(other.domain, self.codomain, self.matrix @ other.matrix)

    def adjoint(self) -> "SuperOperator":
        """Hilbert adjoint for ⟨a, b⟩ = τ(a*b)."""
        return SuperOperator(self.codomain, self.domain, self.matrix.conj().T)

    def distance(self, other: "SuperOperator") -> float:
        return float(np.abs(self.matrix - other.matrix).max()) if self.matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class SubalgebraBasis:
    """Orthonormal basis of a *-subalgebra together with its unit."""

    parent: AlgebraDescriptor
    basis: tuple[AlgebraElement, ...]
    unit: AlgebraElement

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @cached_property
    def matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((self.parent.dimension, 0), dtype=complex)
        return np.column_stack([b.to_vector() for b in self.basis])

    def coefficients(self, x: AlgebraElement) -> np.ndarray:
        return self.matrix.conj().T @ x.to_vector()

    def project(self, x: AlgebraElement) -> AlgebraElement:
        """τ-orthogonal projection onto the span."""
        return self.parent.from_vector(self.matrix @ self.coefficients(x))

    def residual(self, x: AlgebraElement) -> float:
        return (x - self.project(x)).hs_norm()

    def contains(self, x: AlgebraElement, tol: float | None = None) -> bool:
        return self.residual(x) <= resolve_tol(tol) * max(1.0, x.hs_norm())

    def element(self, coefficients: Sequence[complex]) -> AlgebraElement:
        return self.parent.from_vector(self.matrix @ np.asarray(coefficients, dtype=complex))

    def closure_residual(self) -> float:
        worst = 0.0
        for a in self.basis:
            worst = max(worst, self.residual(a.adjoint()))
            for b in self.basis:
                worst = max(worst, self.residual(a @ b))
        return worst

    def same_span(self, other: "SubalgebraBasis", tol: float | None = None) -> bool:
        if self.dimension != other.dimension:
            return False
        return all(self.contains(b, tol) for b in other.basis)


def _orthonormal_span(vectors: np.ndarray, tol: float | None, what: str) -> np.ndarray:
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = la.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    thr = resolve_tol(tol) * s[0]
    _check_band(s, thr, what)
    r = int(np.sum(s > thr))
    return u[:, :r]


def _null_space(constraints: np.ndarray, tol: float | None, what: str) -> np.ndarray:
    n = constraints.shape[1]
    if constraints.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = la.svd(constraints, full_matrices=True)
    scale = max(float(s[0]) if s.size else 0.0, 1.0)
    thr = resolve_tol(tol) * scale
    _check_band(s, thr, what)
    r = int(np.sum(s > thr))
    return vh[r:].conj().T


def _check_band(s: np.ndarray, thr: float, what: str):
    inside = s[(s > thr / RANK_BAND) & (s < thr * RANK_BAND)]
    if inside.size:
        logger.warning(f"Ambiguous rank decision in {what}: singular value {inside[0]:.3e} near threshold {thr:.3e}")
        raise DegenerateBasis(
            f"rank decision for {what} falls inside the tolerance band "
            f"(singular value {inside[0]:.3e}, threshold {thr:.3e})",
            gap=float(inside[0]),
        )


def _algebra_of(S: Sequence[AlgebraElement], algebra: AlgebraDescriptor | None) -> AlgebraDescriptor:
    if algebra is None:
        if not S:
            raise ValueError("an algebra must be given when the generating set is empty")
        algebra = S[0].algebra
    return algebra


def commutant(S: Sequence[AlgebraElement], algebra: AlgebraDescriptor | None = None,
              tol: float | None = None) -> SubalgebraBasis:
    """S′ as the null space of the constraints xs − sx = 0."""
    algebra = _algebra_of(S, algebra)
    rows = []
    for s in S:
        rows.append(np.column_stack([e.commutator(s).to_vector() for e in algebra.basis]))
    constraints = np.vstack(rows) if rows else np.zeros((0, algebra.dimension), dtype=complex)
    null = _null_space(constraints, tol, "commutant")
    basis = tuple(algebra.from_vector(null[:, k]) for k in range(null.shape[1]))
    return SubalgebraBasis(algebra, basis, algebra.identity())


def bicommutant(S: Sequence[AlgebraElement], algebra: AlgebraDescriptor | None = None,
                tol: float | None = None) -> SubalgebraBasis:
    algebra = _algebra_of(S, algebra)
    return commutant(commutant(S, algebra, tol).basis, algebra, tol)


def generated_algebra(S: Sequence[AlgebraElement], algebra: AlgebraDescriptor | None = None,
                      tol: float | None = None) -> SubalgebraBasis:
    """The (possibly non-unital) *-algebra generated by S, by span closure."""
    algebra = _algebra_of(S, algebra)
    vectors = [s.to_vector() for s in S] + [s.adjoint().to_vector() for s in S]
    span = _orthonormal_span(
        np.column_stack(vectors) if vectors else np.zeros((algebra.dimension, 0)), tol, "generated algebra"
    )
    while True:
        elems = [algebra.from_vector(span[:, k]) for k in range(span.shape[1])]
        products = [(a @ b).to_vector() for a in elems for b in elems]
        if not products:
            break
        grown = _orthonormal_span(np.column_stack([span] + [np.column_stack(products)]), tol, "generated algebra")
        if grown.shape[1] == span.shape[1]:
            break
        span = grown
    basis = tuple(algebra.from_vector(span[:, k]) for k in range(span.shape[1]))
    if basis:
        gram = basis[0] @ basis[0].adjoint()
        for b in basis[1:]:
            gram = gram + b @ b.adjoint()
        unit = support(gram, tol)
    else:
        unit = algebra.zeros()
    logger.debug(f"Generated *-algebra of dimension {len(basis)}")
    return SubalgebraBasis(algebra, basis, unit)


def center(A: SubalgebraBasis, tol: float | None = None) -> SubalgebraBasis:
    k = A.dimension
    if k == 0:
        return A
    rows = []
    for b in A.basis:
        rows.append(np.column_stack([a.commutator(b).to_vector() for a in A.basis]))
    null = _null_space(np.vstack(rows), tol, "center")
    basis = tuple(A.element(null[:, j]) for j in range(null.shape[1]))
    return SubalgebraBasis(A.parent, basis, A.unit)


def minimal_central_projections(A: SubalgebraBasis, tol: float | None = None,
                                attempts: int = 8) -> list[AlgebraElement]:
    """
    Minimal projections of Z(A), read off the spectrum of a generic central element.

    The returned projections are mutually orthogonal and sum to the unit of A.
    """
    tol = resolve_tol(tol)
    Z = center(A, tol)
    if Z.dimension == 0:
        return []
    hermitian = [z.hermitian_part() for z in Z.basis] + [z.imaginary_part() for z in Z.basis]
    for attempt in range(attempts):
        rng = np.random.default_rng(attempt)
        h = A.parent.zeros()
        for c, z in zip(rng.normal(size=len(hermitian)), hermitian):
            h = h + z * c
        norm = h.op_norm()
        if norm > 0:
            h = h * (0.5 / norm)
        h = A.unit + h.compress(A.unit)
        projections = _spectral_clusters(h)
        if _are_minimal(projections, Z, tol):
            logger.debug(f"Found {len(projections)} minimal central projections")
            return projections
    raise DegenerateBasis("could not separate the minimal central projections", gap=None)


def _spectral_clusters(h: AlgebraElement, gap: float = 1e-6) -> list[AlgebraElement]:
    entries = []
    decomps = []
    for i, b in enumerate(h.blocks):
        w, v = la.eigh((b + b.conj().T) / 2)
        decomps.append(v)
        entries.extend((float(val), i, j) for j, val in enumerate(w) if val > 0.25)
    entries.sort()
    clusters: list[list[tuple[float, int, int]]] = []
    for entry in entries:
        if clusters and entry[0] - clusters[-1][-1][0] <= gap:
            clusters[-1].append(entry)
        else:
            clusters.append([entry])
    out = []
    for cluster in clusters:
        blocks = [np.zeros((n, n), dtype=complex) for n in h.algebra.block_dims]
        for _, i, j in cluster:
            vec = decomps[i][:, j]
            blocks[i] += np.outer(vec, vec.conj())
        out.append(AlgebraElement(h.algebra, tuple(blocks)))
    return out


def _are_minimal(projections: list[AlgebraElement], Z: SubalgebraBasis, tol: float) -> bool:
    if len(projections) > Z.dimension:
        return False
    for q in projections:
        mass = q.trace()
        for z in Z.basis:
            qz = q @ z
            if qz.distance(q * ((q @ z).trace() / mass)) > 1e3 * tol * max(1.0, z.op_norm()):
                return False
    return len(projections) == Z.dimension
