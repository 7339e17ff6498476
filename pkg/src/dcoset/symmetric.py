"""Group datum with its four involutions, validation and eigenspace splits."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import InvalidSetup, MembershipViolation
from .matrix import (
    DEFAULT_TOL,
    LieAlgebra,
    Tol,
    as_mat,
    max_abs,
    nullspace,
)

INVOLUTION_NAMES = ("sigma", "theta", "delta", "phi")
CONSTRAINT_TAGS = ("det1", "real", "unitary")


@dataclass(frozen=True)
class InvolutionSpec:
    """``g -> J op(g) J^{-1}`` with op an optional inverse-transpose and/or
    entrywise conjugation."""

    conj_matrix: np.ndarray
    use_inverse_transpose: bool = False
    use_entrywise_conjugate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "conj_matrix", as_mat(self.conj_matrix))
        object.__setattr__(self, "_jinv", np.linalg.inv(self.conj_matrix))

    @property
    def holomorphic(self) -> bool:
        return not self.use_entrywise_conjugate

    def group(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=complex)
        if self.use_inverse_transpose:
            g = np.linalg.inv(g).T
        if self.use_entrywise_conjugate:
            g = g.conj()
        return self.conj_matrix @ g @ self._jinv

    def algebra(self, x) -> np.ndarray:
        """Differential of ``group``; the complex-linear extension when
        holomorphic."""
        x = np.asarray(x, dtype=complex)
        if self.use_inverse_transpose:
            x = -x.T
        if self.use_entrywise_conjugate:
            x = x.conj()
        return self.conj_matrix @ x @ self._jinv


def apply_involution(inv: InvolutionSpec, g) -> np.ndarray:
    return inv.group(g)


@dataclass
class GroupSpec:
    """Raw group datum as read from a configuration."""

    n: int
    algebra_basis: Sequence[np.ndarray]
    sigma: InvolutionSpec
    theta: InvolutionSpec
    delta: InvolutionSpec
    phi: InvolutionSpec
    membership: tuple = ("det1", "real")
    component_reps: Sequence[np.ndarray] = ()
    assume_g_eq_hg0k: bool = True
    name: str = ""


def check_membership(g, tags, atol: float) -> list[str]:
    """Return the list of violated constraint tags."""
    g = np.asarray(g, dtype=complex)
    bad = []
    for tag in tags:
        if tag == "det1":
            ok = abs(np.linalg.det(g) - 1) <= atol * 10
        elif tag == "real":
            ok = max_abs(g.imag) <= atol
        elif tag == "unitary":
            ok = max_abs(g.conj().T @ g - np.eye(len(g))) <= atol * 10
        else:
            raise ValueError(f"unknown constraint tag {tag!r}")
        if not ok:
            bad.append(tag)
    return bad


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self):
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


@dataclass
class Decomposition:
    """Orthonormal coordinate bases (rows) and projectors of the eigenspaces."""

    bases: dict
    projectors: dict
    compact_h: list  # orthonormal basis of (h & g0) + i (h & r0), as matrices

    def dim(self, name: str) -> int:
        return len(self.bases[name])

    def dims(self) -> dict:
        return {k: len(v) for k, v in self.bases.items()}


class Setup:
    """A validated group datum bundled with its algebra and decomposition.

    Construct with :func:`build_setup`.
    """

    def __init__(self, spec: GroupSpec, tol: Tol = DEFAULT_TOL, seed: int = 0):
        self.spec = spec
        self.tol = tol
        self.seed = seed
        self.n = spec.n
        self.algebra = LieAlgebra(spec.algebra_basis, tol)
        self.sigma = spec.sigma
        self.theta = spec.theta
        self.delta = spec.delta
        self.phi = spec.phi
        self._coord_maps = None
        self.decomposition = None
        self.report = None

    def involution(self, name: str) -> InvolutionSpec:
        return getattr(self.spec, name)

    def coord_map(self, name: str) -> np.ndarray:
        if self._coord_maps is None:
            self._coord_maps = {}
        if name not in self._coord_maps:
            inv = self.involution(name)
            self._coord_maps[name] = self.algebra.linear_map(inv.algebra)
        return self._coord_maps[name]

    # group-level helpers
    def in_G(self, g) -> list[str]:
        return check_membership(g, self.spec.membership, self.tol.eq * max(1.0, max_abs(g)))

    def in_H(self, g, complex_ok: bool = False) -> bool:
        g = np.asarray(g, dtype=complex)
        scale = max(1.0, max_abs(g))
        if max_abs(self.sigma.group(g) - g) > self.tol.eq * 10 * scale**2:
            return False
        tags = ("det1",) if complex_ok else self.spec.membership
        return not check_membership(g, tags, self.tol.eq * scale)

    def beta_matrix(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=complex)
        return g @ self.theta.group(np.linalg.inv(g))

    def star(self, h, x) -> np.ndarray:
        h = np.asarray(h, dtype=complex)
        return h @ np.asarray(x) @ np.linalg.inv(self.theta.group(h))

    def random_G(self, rng, scale: float = 0.5) -> np.ndarray:
        """exp of a random algebra element times a random compact factor."""
        from .matrix import mat_exp

        c = rng.normal(size=self.algebra.dim) * scale
        d = rng.normal(size=self.algebra.dim) * scale
        return mat_exp(self.algebra.matrix(c)) @ mat_exp(self.algebra.matrix(d))


def validate_setup(spec: GroupSpec, tol: Tol = DEFAULT_TOL, seed: int = 0, raise_on_fail: bool = True):
    """Check the standing assumptions numerically.

    Returns ``(setup, report)``; with ``raise_on_fail`` the first hard failure
    is raised as :class:`InvalidSetup`.
    """
    setup = Setup(spec, tol, seed)
    rep = ValidationReport()
    alg = setup.algebra
    rng = np.random.default_rng(seed)
    add = rep.checks.append
    slack = 10 * tol.eq

    add(Check("basis_rank", alg.dim == len(spec.algebra_basis), float(len(spec.algebra_basis) - alg.dim),
              f"dim={alg.dim}"))
    r = alg.bracket_residual()
    add(Check("bracket_closed", r <= slack, r))

    maps = {}
    for name in INVOLUTION_NAMES:
        inv = setup.involution(name)
        try:
            m = alg.linear_map(inv.algebra, check=False)
            resid = max(max_abs(inv.algebra(b) - alg.matrix(m[:, j])) for j, b in enumerate(alg.basis))
        except Exception as exc:  # pragma: no cover - defensive
            add(Check(f"{name}_preserves_algebra", False, float("inf"), str(exc)))
            continue
        maps[name] = m
        add(Check(f"{name}_preserves_algebra", resid <= slack, resid))
        sq = max_abs(m @ m - np.eye(alg.dim))
        add(Check(f"{name}_involutive_algebra", sq <= slack, sq))
        gsq = 0.0
        for _ in range(3):
            g = setup.random_G(rng)
            gsq = max(gsq, max_abs(inv.group(inv.group(g)) - g) / max(1.0, max_abs(g)))
        add(Check(f"{name}_involutive_group", gsq <= slack * 10, gsq))
        # automorphism of the bracket
        aut = 0.0
        for _ in range(3):
            x = alg.matrix(rng.normal(size=alg.dim))
            y = alg.matrix(rng.normal(size=alg.dim))
            lhs = inv.algebra(x @ y - y @ x)
            ix, iy = inv.algebra(x), inv.algebra(y)
            aut = max(aut, max_abs(lhs - (ix @ iy - iy @ ix)))
        add(Check(f"{name}_automorphism", aut <= slack * 10, aut))
        iso = max_abs(m.T @ m - np.eye(alg.dim))
        add(Check(f"{name}_inner_product_invariant", iso <= slack, iso))

    for name in ("sigma", "theta"):
        inv = setup.involution(name)
        add(Check(f"{name}_holomorphic", inv.holomorphic, 0.0 if inv.holomorphic else 1.0))

    if "phi" in maps:
        r = max_abs(maps["phi"] - np.eye(alg.dim))
        add(Check("algebra_is_real_form", r <= slack, r, "phi fixes every basis element"))

    for a, b in combinations(INVOLUTION_NAMES, 2):
        if a in maps and b in maps:
            c = max_abs(maps[a] @ maps[b] - maps[b] @ maps[a])
            add(Check(f"commute_{a}_{b}", c <= slack, c))

    if "delta" in maps:
        # Cartan check: (X, Y) -> -Re tr(X delta(Y)) is positive definite
        form = np.array([[-np.real(np.trace(bi @ setup.delta.algebra(bj))) for bj in alg.basis] for bi in alg.basis])
        sym = max_abs(form - form.T)
        w = np.linalg.eigvalsh((form + form.T) / 2)
        add(Check("delta_cartan_positive", sym <= slack and w[0] > tol.rank, float(w[0]),
                  "smallest eigenvalue of -B(X, delta Y)"))

    # the trace form only serves as invariant product on a semisimple algebra
    ad_forms = []
    for b in alg.basis:
        ad_forms.append(alg.ad_matrix(b))
    center = nullspace(np.vstack(ad_forms), tol.rank) if ad_forms else np.zeros((0, alg.dim))
    add(Check("center_semisimple", len(center) == 0, float(len(center)),
              "satisfied: semisimple" if len(center) == 0 else "non-trivial center"))

    for k, rep_mat in enumerate(spec.component_reps):
        bad = setup.in_G(rep_mat)
        ok = not bad and setup.in_H(rep_mat)
        add(Check(f"component_rep_{k}_in_H", ok, 0.0 if ok else 1.0, ",".join(bad)))

    add(Check("assumption_G_eq_HG0K", True, 0.0,
              "declared" if spec.assume_g_eq_hg0k else "not declared (recorded only)"))

    setup.report = rep
    if rep.ok:
        setup.decomposition = decompose(setup)
    elif raise_on_fail:
        f = rep.first_failure()
        raise InvalidSetup(f"setup check '{f.name}' failed (residual {f.residual:.3e})", rep)
    return setup, rep


def build_setup(spec: GroupSpec, tol: Tol = DEFAULT_TOL, seed: int = 0) -> Setup:
    return validate_setup(spec, tol, seed)[0]


def decompose(setup: Setup) -> Decomposition:
    """Eigenspaces of sigma, theta, delta and their pairwise intersections."""
    alg = setup.algebra
    d = alg.dim
    eye = np.eye(d)
    rt = setup.tol.rank
    S, T, D = (setup.coord_map(k) for k in ("sigma", "theta", "delta"))
    spaces = {"h": (S, 1), "q": (S, -1), "k": (T, 1), "p": (T, -1), "g0": (D, 1), "r0": (D, -1)}
    bases, projs = {}, {}
    for name, (m, s) in spaces.items():
        bases[name] = nullspace(m - s * eye, rt)
        projs[name] = (eye + s * m) / 2
    for a, b in combinations(spaces, 2):
        ma, sa = spaces[a]
        mb, sb = spaces[b]
        if ma is mb:
            continue
        key = f"{a}&{b}"
        bases[key] = nullspace(np.vstack([ma - sa * eye, mb - sb * eye]), rt)
        projs[key] = projs[a] @ projs[b]
    compact = [alg.matrix(r) for r in bases["h&g0"]] + [1j * alg.matrix(r) for r in bases["h&r0"]]
    return Decomposition(bases, projs, compact)
