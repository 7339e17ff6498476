"""The manifold X = beta(G), the projection to X_0, twisted involutions,
transversals and principal points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MembershipViolation, NotInH
from .matrix import as_mat, max_abs, nullspace, polar_decompose
from .symmetric import Setup


@dataclass
class PointX:
    """A point ``x = u exp(Y)`` of X with its right Cartan factors."""

    mat: np.ndarray
    u: np.ndarray
    Y: np.ndarray  # Hermitian; lies in r_0

    def coords_Y(self, setup: Setup) -> np.ndarray:
        return setup.algebra.coords(self.Y)


def point_residuals(setup: Setup, x: np.ndarray, u: np.ndarray, Y: np.ndarray) -> dict:
    th = setup.theta
    n = setup.n
    eye = np.eye(n)
    s = max(1.0, max_abs(x))
    return {
        "theta_x_inverse": max_abs(th.group(x) @ x - eye) / s**2,
        "theta_u_inverse": max_abs(th.group(u) @ u - eye),
        "theta_Y": max_abs(th.algebra(Y) + u @ Y @ np.linalg.inv(u)) / s,
    }


def make_point(setup: Setup, x, check: bool = True) -> PointX:
    """Wrap a matrix as a point of X, computing its right Cartan factors."""
    x = as_mat(x)
    u, Y = polar_decompose(x, "right", setup.tol)
    if check:
        res = point_residuals(setup, x, u, Y)
        worst = max(res.values())
        if worst > 1e3 * setup.tol.eq:
            raise MembershipViolation(f"not a point of X: {res}")
    return PointX(x, u, Y)


def beta(setup: Setup, g) -> PointX:
    """``g theta(g)^{-1}``."""
    g = as_mat(g)
    bad = setup.in_G(g)
    if bad:
        raise MembershipViolation(f"g violates constraints {bad}")
    return make_point(setup, setup.beta_matrix(g))


def star_action(setup: Setup, h, x: PointX, check: bool = True, complex_ok: bool = False) -> PointX:
    """``h x theta(h)^{-1}`` for ``h`` in H."""
    h = as_mat(h)
    if check and not setup.in_H(h, complex_ok=complex_ok):
        raise NotInH("element is not in H")
    return make_point(setup, setup.star(h, x.mat), check=check)


def lambda_projection(setup: Setup, x: PointX) -> np.ndarray:
    """Compact Cartan factor ``u`` of ``x = u exp(Y)``."""
    return x.u


def _mat(x) -> np.ndarray:
    return x.mat if isinstance(x, PointX) else np.asarray(x, dtype=complex)


def theta_x(setup: Setup, x, z, on: str = "algebra") -> np.ndarray:
    """``conj(x) o theta`` applied to a group (``on="group"``) or algebra element."""
    xm = _mat(x)
    t = setup.theta.group(z) if on == "group" else setup.theta.algebra(z)
    return xm @ t @ np.linalg.inv(xm)


def tau_x(setup: Setup, x, z, on: str = "algebra") -> np.ndarray:
    s = setup.sigma.group(z) if on == "group" else setup.sigma.algebra(z)
    return theta_x(setup, x, s, on)


def theta_x_matrix(setup: Setup, x) -> np.ndarray:
    xm = _mat(x)
    xi = np.linalg.inv(xm)
    return setup.algebra.linear_map(lambda b: xm @ setup.theta.algebra(b) @ xi)


def tau_x_matrix(setup: Setup, x) -> np.ndarray:
    return theta_x_matrix(setup, x) @ setup.coord_map("sigma")


@dataclass
class TransversalData:
    base: PointX
    slice_basis: np.ndarray  # rows: coordinates spanning S_x
    isotropy_basis: np.ndarray  # rows: h & k^(x)
    fixed_algebra_basis: np.ndarray  # rows: g^(x)
    slice_noncompact: np.ndarray = field(default=None)  # S_x & r_0
    slice_compact: np.ndarray = field(default=None)  # S_x & g_0

    @property
    def slice_dim(self) -> int:
        return len(self.slice_basis)

    @property
    def isotropy_dim(self) -> int:
        return len(self.isotropy_basis)


def transversal(setup: Setup, x) -> TransversalData:
    d = setup.algebra.dim
    eye = np.eye(d)
    rt = setup.tol.rank
    Tx = theta_x_matrix(setup, x)
    S = setup.coord_map("sigma")
    D = setup.coord_map("delta")
    sl = nullspace(np.vstack([Tx + eye, S + eye]), rt)
    iso = nullspace(np.vstack([Tx - eye, S - eye]), rt)
    fixed = nullspace(Tx @ S - eye, rt)
    nc = nullspace(np.vstack([Tx + eye, S + eye, D + eye]), rt)
    cp = nullspace(np.vstack([Tx + eye, S + eye, D - eye]), rt)
    base = x if isinstance(x, PointX) else make_point(setup, x, check=False)
    return TransversalData(base, sl, iso, fixed, nc, cp)


def isotropy_dim(setup: Setup, x) -> int:
    d = setup.algebra.dim
    Tx = theta_x_matrix(setup, x)
    S = setup.coord_map("sigma")
    return len(nullspace(np.vstack([Tx - np.eye(d), S - np.eye(d)]), setup.tol.rank))


def orbit_singular_values(setup: Setup, x) -> np.ndarray:
    """Singular values of ``Z -> Z - theta_x(Z)`` on an orthonormal basis of h."""
    d = setup.algebra.dim
    Tx = theta_x_matrix(setup, x)
    hb = setup.decomposition.bases["h"]
    m = (np.eye(d) - Tx) @ hb.T
    return np.linalg.svd(m, compute_uv=False)


def _normalised_generator(setup: Setup, row) -> np.ndarray:
    m = setup.algebra.matrix(row)
    r = np.max(np.abs(np.linalg.eigvals(m)))
    return m / r if r > setup.tol.rank else m


def slice_weights(setup: Setup, x, data: TransversalData | None = None) -> list[dict]:
    """Eigenvalues of each isotropy generator acting on the transversal.

    Each generator is rescaled to spectral radius one in the defining
    representation, so e.g. ``diag(1, -1)`` acting on ``q`` in sl(2) gives
    weights +2 and -2.
    """
    data = data or transversal(setup, x)
    alg = setup.algebra
    out = []
    if data.slice_dim == 0:
        return out
    sb = data.slice_basis
    for row in data.isotropy_basis:
        X = _normalised_generator(setup, row)
        cols = [sb @ alg.coords(X @ alg.matrix(s) - alg.matrix(s) @ X, check=False) for s in sb]
        m = np.column_stack(cols)
        if max_abs(m) <= 10 * setup.tol.eq:
            continue
        w, v = np.linalg.eig(m)
        order = np.lexsort((w.imag, w.real))
        out.append({
            "generator": row,
            "weights": w[order],
            "vectors": (v[:, order].T @ sb),
        })
    return out


@dataclass
class PrincipalResult:
    principal: bool
    algebra_trivial: bool
    witnesses_trivial: bool
    algebra_level_only: bool
    weights: list
    slice_dim: int
    isotropy_dim: int


def is_principal(setup: Setup, x, data: TransversalData | None = None) -> PrincipalResult:
    """Trivial slice representation test (algebra plus configured witnesses).

    The caller is responsible for ensuring the orbit through ``x`` is closed.
    """
    data = data or transversal(setup, x)
    weights = slice_weights(setup, x, data)
    alg_trivial = not weights
    xm = _mat(x)
    fixing = []
    for h in setup.spec.component_reps:
        if max_abs(setup.star(h, xm) - xm) <= 1e3 * setup.tol.eq:
            fixing.append(np.asarray(h, dtype=complex))
    wit_trivial = True
    for h in fixing:
        hi = np.linalg.inv(h)
        for s in data.slice_basis:
            m = setup.algebra.matrix(s)
            if max_abs(h @ m @ hi - m) > 1e3 * setup.tol.eq:
                wit_trivial = False
                break
    return PrincipalResult(
        principal=alg_trivial and wit_trivial,
        algebra_trivial=alg_trivial,
        witnesses_trivial=wit_trivial,
        algebra_level_only=not setup.spec.component_reps,
        weights=weights,
        slice_dim=data.slice_dim,
        isotropy_dim=data.isotropy_dim,
    )
