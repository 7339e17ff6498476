"""Dense complex matrix and real Lie algebra primitives.

Every algebra element lives inside ``gl(n, C)``; a real Lie algebra is given
by a real basis of complex matrices which is orthonormalised under the trace
form ``<x, y> = Re tr(x y^*)``.  All subspace computations then reduce to
real coordinate linear algebra.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la

from .errors import BasisMismatch, NotInAlgebra, NotPositiveDefinite, Singular

MAX_N = 16


@dataclass(frozen=True)
class Tol:
    """Numerical tolerances.

    eq : absolute entrywise equality tolerance
    rank : singular value threshold for rank decisions
    mu : moment map residual threshold
    """

    eq: float = 1e-9
    rank: float = 1e-7
    mu: float = 1e-7

    def __post_init__(self):
        if not (0 < self.eq <= 1e-5):
            raise ValueError(f"eq tolerance out of range: {self.eq}")
        if self.rank < self.eq:
            raise ValueError("rank tolerance must be >= eq tolerance")
        if self.mu <= 0:
            raise ValueError("mu tolerance must be positive")


DEFAULT_TOL = Tol()


def as_mat(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_N:
        raise ValueError(f"matrix size {m.shape[0]} exceeds {MAX_N}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def trace_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Re tr(x y^*)."""
    return float(np.real(np.vdot(y, x)))


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def mat_exp(a) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximant)."""
    a = as_mat(a)
    if not np.any(a):
        return np.eye(a.shape[0], dtype=complex)
    return la.expm(a)


def is_hermitian(a, atol: float) -> bool:
    return max_abs(a - dagger(a)) <= atol


def mat_log_principal(p, tol: Tol = DEFAULT_TOL) -> np.ndarray:
    """Hermitian logarithm of a Hermitian positive definite matrix."""
    p = as_mat(p)
    scale = max(1.0, max_abs(p))
    if not is_hermitian(p, tol.rank * scale):
        raise NotPositiveDefinite("matrix is not Hermitian")
    w, v = np.linalg.eigh((p + dagger(p)) / 2)
    if w[0] <= tol.rank:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= {tol.rank:.1e}")
    return (v * np.log(w)) @ dagger(v)


def polar_decompose(g, side: str = "right", tol: Tol = DEFAULT_TOL):
    """Polar factors of an invertible matrix.

    ``side="right"`` gives ``g = u exp(Y)`` with ``Y = log(g^* g)/2``;
    ``side="left"`` gives ``g = exp(Y) u`` with ``Y = log(g g^*)/2``.
    Returns ``(u, Y)``.  Computed from an SVD, which keeps the error
    proportional to the condition number rather than its square.
    """
    g = as_mat(g)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    w, s, vh = np.linalg.svd(g)
    if s[-1] <= tol.rank:
        raise Singular(f"matrix is singular within tolerance (sigma_min={s[-1]:.3e})")
    u = w @ vh
    frame = dagger(vh) if side == "right" else w
    y = (frame * np.log(s)) @ dagger(frame)
    return u, (y + dagger(y)) / 2


def nullspace(linmap, rank_tol: float = DEFAULT_TOL.rank) -> np.ndarray:
    """Orthonormal kernel basis of a real linear map, one vector per row.

    Rank is decided by comparing singular values against ``rank_tol``.
    Each returned vector has its largest-magnitude entry positive.
    """
    a = np.atleast_2d(np.asarray(linmap, dtype=float))
    m = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(m)
    _, s, vh = np.linalg.svd(a)
    r = int(np.sum(s > rank_tol))
    ker = vh[r:]
    for row in ker:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1
    return ker


def orth_rows(vectors, rank_tol: float = DEFAULT_TOL.rank) -> np.ndarray:
    """Orthonormal basis (rows) of the row span."""
    a = np.atleast_2d(np.asarray(vectors, dtype=float))
    if a.size == 0:
        return np.zeros((0, a.shape[1] if a.ndim == 2 else 0))
    _, s, vh = np.linalg.svd(a, full_matrices=False)
    return vh[: int(np.sum(s > rank_tol))]


def projector(rows: np.ndarray, dim: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=float).reshape(-1, dim)
    return rows.T @ rows


def subspace_distance(rows_a, rows_b, dim: int) -> float:
    """Spectral norm of the difference of orthogonal projectors."""
    pa = projector(orth_rows(rows_a) if len(rows_a) else np.zeros((0, dim)), dim)
    pb = projector(orth_rows(rows_b) if len(rows_b) else np.zeros((0, dim)), dim)
    return float(np.linalg.norm(pa - pb, 2))


@dataclass(frozen=True)
class AlgVec:
    """Coordinates of an element of a real Lie algebra over a fixed basis."""

    coords: np.ndarray
    basis_id: str


@dataclass
class LieAlgebra:
    """A real Lie algebra inside ``gl(n, C)`` with an orthonormal basis.

    The supplied spanning matrices are orthonormalised by Gram-Schmidt in the
    given order under ``Re tr(x y^*)``; linearly dependent inputs are dropped.
    """

    spanning: Sequence[np.ndarray]
    tol: Tol = DEFAULT_TOL
    basis: np.ndarray = field(init=False)
    basis_id: str = field(init=False)

    def __post_init__(self):
        mats = [as_mat(m) for m in self.spanning]
        if not mats:
            raise ValueError("empty algebra basis")
        n = mats[0].shape[0]
        out = []
        for m in mats:
            v = m.copy()
            for _ in range(2):
                for b in out:
                    v = v - trace_inner(v, b) * b
            nv = np.sqrt(trace_inner(v, v))
            if nv > self.tol.rank:
                out.append(v / nv)
        self.basis = np.array(out).reshape(len(out), n, n)
        self.n = n
        digest = hashlib.sha256(np.round(self.basis, 12).tobytes()).hexdigest()[:16]
        self.basis_id = f"basis-{digest}"
        # real-linear coordinate extraction: c = Re <M, B_j>
        self._flat = self.basis.reshape(len(out), -1)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coords(self, m, check: bool = True) -> np.ndarray:
        m = np.asarray(m, dtype=complex)
        c = np.real(self._flat.conj() @ m.reshape(-1))
        if check:
            resid = max_abs(m - self.matrix(c))
            if resid > self.tol.eq * 10 * max(1.0, max_abs(m)):
                raise NotInAlgebra(f"matrix not in algebra (residual {resid:.3e})")
        return c

    def matrix(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        return np.tensordot(c, self.basis, axes=(0, 0))

    def vec(self, m, check: bool = True) -> AlgVec:
        return AlgVec(self.coords(m, check=check), self.basis_id)

    def mat(self, v: AlgVec) -> np.ndarray:
        self._check(v)
        return self.matrix(v.coords)

    def _check(self, *vs: AlgVec):
        for v in vs:
            if v.basis_id != self.basis_id:
                raise BasisMismatch(f"{v.basis_id} != {self.basis_id}")

    def inner_product(self, x: AlgVec, y: AlgVec) -> float:
        self._check(x, y)
        return float(np.dot(x.coords, y.coords))

    def linear_map(self, f: Callable[[np.ndarray], np.ndarray], check: bool = True) -> np.ndarray:
        """Coordinate matrix of a real-linear map of the algebra into itself."""
        return np.column_stack([self.coords(f(b), check=check) for b in self.basis])

    def adjoint(self, g, x: AlgVec) -> AlgVec:
        """Coordinates of ``g x g^{-1}``."""
        self._check(x)
        g = as_mat(g)
        m = g @ self.matrix(x.coords) @ np.linalg.inv(g)
        return AlgVec(self.coords(m), self.basis_id)

    def ad_matrix(self, x) -> np.ndarray:
        """Coordinate matrix of ``ad(x)`` for a matrix ``x`` in the algebra."""
        return self.linear_map(lambda b: x @ b - b @ x)

    def bracket_residual(self) -> float:
        worst = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                c = self.basis[i] @ self.basis[j] - self.basis[j] @ self.basis[i]
                k = self.coords(c, check=False)
                worst = max(worst, max_abs(c - self.matrix(k)))
        return worst

    def span_matrices(self, rows) -> list[np.ndarray]:
        return [self.matrix(r) for r in np.atleast_2d(rows)] if len(rows) else []


def inner_product(algebra: LieAlgebra, x: AlgVec, y: AlgVec) -> float:
    return algebra.inner_product(x, y)


def adjoint(algebra: LieAlgebra, g, x: AlgVec) -> AlgVec:
    return algebra.adjoint(g, x)


def sl_real_basis(n: int) -> list[np.ndarray]:
    """Standard real basis of ``sl(n, R)``: E_ij (i != j), then E_ii - E_{i+1,i+1}."""
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                m = np.zeros((n, n), dtype=complex)
                m[i, j] = 1
                out.append(m)
    for i in range(n - 1):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1
        m[i + 1, i + 1] = -1
        out.append(m)
    return out
