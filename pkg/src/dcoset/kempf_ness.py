"""Moment map, Kempf-Ness set and the gradient flow of ||mu||^2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cosets import PointX, make_point, orbit_singular_values, slice_weights, transversal
from .errors import Inconclusive, NoDescent, NumericError
from .matrix import dagger, mat_exp, max_abs, polar_decompose, trace_inner
from .symmetric import Setup


def _eta(setup: Setup, g) -> tuple[np.ndarray, np.ndarray]:
    """Write ``g = u exp(i eta)`` with ``eta`` in u; returns (u, eta)."""
    u, Y = polar_decompose(g, "right", setup.tol)
    return u, -1j * Y


def rho(setup: Setup, g) -> float:
    """Exhaustion ``rho(u exp(i eta)) = <eta, eta> / 2``."""
    _, eta = _eta(setup, g)
    return 0.5 * trace_inner(eta, eta)


def nu_xi(setup: Setup, g, xi) -> float:
    """Moment map of right multiplication: ``<xi, eta>`` for ``g = u exp(i eta)``."""
    _, eta = _eta(setup, g)
    return trace_inner(np.asarray(xi, dtype=complex), eta)


@dataclass
class MomentValue:
    coords: np.ndarray
    norm_sq: float


def mu(setup: Setup, x) -> MomentValue:
    """Components ``<eta, theta(xi_j) - Ad(u^{-1}) xi_j>`` over the compact form of h."""
    xm = x.mat if isinstance(x, PointX) else x
    if isinstance(x, PointX):
        u, eta = x.u, -1j * x.Y
    else:
        u, eta = _eta(setup, xm)
    ui = dagger(u)
    th = setup.theta.algebra
    c = np.array([trace_inner(eta, th(xi) - ui @ xi @ u) for xi in setup.decomposition.compact_h])
    return MomentValue(c, float(c @ c))


def mu_norm_sq(setup: Setup, xm) -> float:
    return mu(setup, make_point(setup, xm, check=False)).norm_sq


@dataclass
class KNResult:
    member: bool
    residuals: dict


def kempf_ness_residuals(setup: Setup, x) -> dict:
    xm = x.mat if isinstance(x, PointX) else np.asarray(x, dtype=complex)
    u, xi = polar_decompose(xm, "left", setup.tol)
    alg = setup.algebra
    c = alg.coords(xi, check=False)
    n = setup.n
    return {
        "xi_in_g": max_abs(xi - alg.matrix(c)),
        "xi_in_r0": max_abs(setup.delta.algebra(xi) + xi),
        "sigma_split": max_abs(setup.sigma.algebra(xi) + xi),
        "theta_u_split": max_abs(u @ setup.theta.algebra(xi) @ dagger(u) + xi),
        "u_unitary": max_abs(dagger(u) @ u - np.eye(n)),
        "theta_u_inverse": max_abs(setup.theta.group(u) @ u - np.eye(n)),
    }


def in_kempf_ness(setup: Setup, x) -> bool:
    """Membership via the left Cartan form ``x = exp(xi) u``."""
    res = kempf_ness_residuals(setup, x)
    return max(res.values()) <= setup.tol.mu


@dataclass
class FlowOptions:
    max_iters: int = 10_000
    mu_tol: float | None = None
    fd_step: float = 1e-6
    grad_tol: float = 1e-10
    armijo: float = 1e-4
    initial_step: float = 1.0
    min_step: float = 1e-14
    max_move: float = 1.0  # cap on the norm of s * zeta per step
    refine_step: bool = True
    record: bool = True


@dataclass
class FlowTrace:
    iterates: list = field(default_factory=list)  # (PointX, norm_sq, step)
    converged: bool = False
    residual: float = float("nan")
    reason: str = ""
    final: PointX | None = None
    grad_norm: float = float("nan")
    n_iters: int = 0

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "reason": self.reason,
            "iterations": self.n_iters,
            "residual": self.residual,
            "grad_norm": self.grad_norm,
        }


def _h_basis(setup: Setup) -> list[np.ndarray]:
    return [setup.algebra.matrix(r) for r in setup.decomposition.bases["h"]]


def _act(setup: Setup, Z: np.ndarray, xm: np.ndarray) -> np.ndarray:
    return setup.star(mat_exp(Z), xm)


def fd_gradient(setup: Setup, xm: np.ndarray, basis, step: float) -> np.ndarray:
    g = np.empty(len(basis))
    for j, b in enumerate(basis):
        fp = mu_norm_sq(setup, _act(setup, step * b, xm))
        fm = mu_norm_sq(setup, _act(setup, -step * b, xm))
        g[j] = (fp - fm) / (2 * step)
    return g


def gradient_flow(setup: Setup, x0: PointX, opts: FlowOptions | None = None, trace: FlowTrace | None = None) -> FlowTrace:
    """Descend ``f = ||mu||^2`` along H-orbits by ``x <- exp(-s zeta) * x``.

    ``zeta`` is the central-difference gradient of ``f`` over an orthonormal
    basis of h; ``s`` comes from Armijo backtracking (factor 1/2), then is
    halved further while ``f`` keeps dropping.  Passing an
    existing ``trace`` continues it.
    """
    opts = opts or FlowOptions()
    mu_tol = setup.tol.mu if opts.mu_tol is None else opts.mu_tol
    basis = _h_basis(setup)
    tr = trace or FlowTrace()
    x = tr.final or x0
    f = mu(setup, x).norm_sq
    if not tr.iterates and opts.record:
        tr.iterates.append((x, f, 0.0))
    start = tr.n_iters
    for k in range(opts.max_iters):
        if math.sqrt(f) < mu_tol:
            tr.converged, tr.reason = True, "mu_tol"
            break
        g = fd_gradient(setup, x.mat, basis, opts.fd_step)
        gn2 = float(g @ g)
        tr.grad_norm = math.sqrt(gn2)
        if tr.grad_norm < opts.grad_tol:
            tr.reason = "stagnated"
            break
        zeta = sum(gj * b for gj, b in zip(g, basis))
        s = opts.initial_step
        zn = math.sqrt(gn2)
        if opts.max_move and s * zn > opts.max_move:
            s = opts.max_move / zn
        while True:
            try:
                with np.errstate(all="ignore"):
                    xm_new = _act(setup, -s * zeta, x.mat)
                    f_new = mu_norm_sq(setup, xm_new)
            except (NumericError, np.linalg.LinAlgError, ValueError):
                f_new = math.inf
            if f_new <= f - opts.armijo * s * gn2:
                break
            s *= 0.5
            if s < opts.min_step:
                break
        # keep halving while it still pays: avoids zig-zag when s ~ 2 / curvature
        while s >= opts.min_step and opts.refine_step:
            try:
                with np.errstate(all="ignore"):
                    xm_half = _act(setup, -0.5 * s * zeta, x.mat)
                    f_half = mu_norm_sq(setup, xm_half)
            except (NumericError, np.linalg.LinAlgError, ValueError):
                break
            if not f_half < f_new:
                break
            s, xm_new, f_new = 0.5 * s, xm_half, f_half
        if s < opts.min_step:
            tr.reason = "no_descent"
            tr.final, tr.residual = x, math.sqrt(f)
            if tr.n_iters == start and start == 0:
                raise NoDescent("backtracking underflow on the first step", tr)
            return tr
        x = make_point(setup, xm_new, check=False)
        f = f_new
        tr.n_iters += 1
        if opts.record:
            tr.iterates.append((x, f, s))
    else:
        tr.reason = "max_iters"
    if not tr.reason:
        tr.reason = "max_iters"
    if math.sqrt(f) < mu_tol:
        tr.converged, tr.reason = True, "mu_tol"
    tr.final, tr.residual = x, math.sqrt(f)
    return tr


def orbit_dim(setup: Setup, x, rank_tol: float | None = None) -> int:
    sv = orbit_singular_values(setup, x)
    return int(np.sum(sv > (setup.tol.rank if rank_tol is None else rank_tol)))


@dataclass
class ClosedResult:
    closed: bool
    representative: PointX
    trace: FlowTrace
    orbit_dim: int
    degeneracy: float
    reason: str


def is_orbit_closed(
    setup: Setup,
    x: PointX,
    opts: FlowOptions | None = None,
    chunk: int = 100,
    near_mu: float = 0.1,
    window: float = 2.0,
    collapse_rate: float = 0.25,
) -> ClosedResult:
    """Closed-orbit test by flowing to the Kempf-Ness set.

    Let ``d`` be the orbit dimension at ``x`` and ``s_d`` the ``d``-th singular
    value of the orbit map ``Z -> Z - theta_x Z`` on h.  Near a limit inside
    the orbit ``s_d`` settles at a positive value while ``||mu|| -> 0``; when
    the limit lies in the boundary (smaller orbit) ``s_d`` collapses like a
    power of ``||mu||``.  Every ``chunk`` iterations the log-log rate
    ``log(s_d ratio) / log(mu ratio)`` is measured against the earliest sample
    with ``||mu|| <= near_mu`` that is at least ``window`` times larger than
    the current one; a rate above ``collapse_rate`` means not closed.
    """
    opts = opts or FlowOptions()
    d = orbit_dim(setup, x)
    budget = opts.max_iters
    sub = FlowOptions(**{**opts.__dict__, "max_iters": chunk})

    def degeneracy(pt):
        if d == 0:
            return float("inf")
        return float(orbit_singular_values(setup, pt)[d - 1])

    def rate(history, res, sd):
        for m0, s0 in history:
            if m0 <= near_mu and m0 >= window * res and res > 0 and math.isfinite(s0):
                return math.log(s0 / sd) / math.log(m0 / res)
        return 0.0

    tr = FlowTrace(final=x)
    tr.residual = math.sqrt(mu(setup, x).norm_sq)
    history = [(tr.residual, degeneracy(x))]
    while True:
        sub.max_iters = min(chunk, budget - tr.n_iters)
        tr.reason = ""
        try:
            tr = gradient_flow(setup, x, sub, tr)
        except NoDescent as exc:
            tr = exc.trace
        pt, res = tr.final, tr.residual
        sd = degeneracy(pt)
        r = rate(history, res, sd) if math.isfinite(sd) else 0.0
        history.append((res, sd))
        if sd <= setup.tol.rank or r > collapse_rate:
            return ClosedResult(False, pt, tr, d, sd, f"orbit map degenerates along the flow (rate {r:.2f})")
        if tr.converged:
            return ClosedResult(True, pt, tr, d, sd, "flow converged inside the orbit")
        if tr.reason in ("stagnated", "no_descent"):
            return ClosedResult(False, pt, tr, d, sd, f"flow {tr.reason} with mu={res:.3e}")
        if tr.n_iters >= budget:
            raise Inconclusive(f"no decision after {tr.n_iters} iterations (mu={res:.3e}, s_d={sd:.3e})", tr)


def slice_rep_weights(setup: Setup, x) -> list[dict]:
    """Weights of the slice representation at a Kempf-Ness point."""
    return slice_weights(setup, x, transversal(setup, x))
