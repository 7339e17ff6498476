"""Split tori, Weyl groups, the isotropy stratification of A_0, fibre data
and the minimal collection of translated tori."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .cosets import isotropy_dim, theta_x_matrix, transversal
from .errors import NotClosed, NotStandard
from .kempf_ness import in_kempf_ness
from .matrix import mat_exp, max_abs, nullspace, orth_rows, subspace_distance
from .symmetric import Setup

TWO_PI = 2 * math.pi


@dataclass
class TorusChart:
    """``base_point * exp(sum c_i gen_i)``-style chart: compact coordinates are
    angles (period 2 pi), split coordinates are rays ``t`` with ``r = e^t``."""

    generators: list
    kinds: list
    base_point: np.ndarray

    def __post_init__(self):
        self.generators = [np.asarray(g, dtype=complex) for g in self.generators]
        self.base_point = np.asarray(self.base_point, dtype=complex)

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def compact(self) -> list:
        return [g for g, k in zip(self.generators, self.kinds) if k == "compact"]

    @property
    def split(self) -> list:
        return [g for g, k in zip(self.generators, self.kinds) if k == "split"]

    def point(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self.dim == 0:
            return self.base_point.copy()
        z = np.tensordot(coords, np.array(self.generators), axes=(0, 0))
        return mat_exp(z) @ self.base_point

    def bracket_residual(self) -> float:
        worst = 0.0
        for a, b in itertools.combinations(self.generators, 2):
            worst = max(worst, max_abs(a @ b - b @ a))
        return worst

    def period_residual(self) -> float:
        n = len(self.base_point)
        return max((max_abs(mat_exp(TWO_PI * g) - np.eye(n)) for g in self.compact), default=0.0)


class TorusLog:
    """Chart coordinates on a compact torus ``exp(span E_i)`` via joint
    eigenvectors and integral weights."""

    def __init__(self, generators, tol: float = 1e-7, seed: int = 0):
        self.gens = [np.asarray(g, dtype=complex) for g in generators]
        self.r = len(self.gens)
        self.tol = tol
        if self.r == 0:
            return
        rng = np.random.default_rng(seed)
        m = sum(c * g for c, g in zip(rng.normal(size=self.r), self.gens))
        _, v = np.linalg.eig(m)
        v, _ = np.linalg.qr(v)
        self.vecs = v
        w = np.array([[np.imag(np.vdot(v[:, k], g @ v[:, k])) for g in self.gens] for k in range(v.shape[1])])
        self.weights = w
        rows, picked = [], []
        for k, row in enumerate(w):
            if np.linalg.matrix_rank(np.array(rows + [row]), tol=1e-8) > len(rows):
                rows.append(row)
                picked.append(k)
            if len(rows) == self.r:
                break
        if len(rows) < self.r:
            raise ValueError("torus generators are not independent")
        self.picked = picked
        self.wr = np.array(rows)
        det = abs(np.linalg.det(self.wr))
        self.shifts = max(1, int(round(det)))

    def coords(self, a) -> np.ndarray | None:
        """Angle coordinates in [0, 2 pi) of ``a``, or None if ``a`` is off the torus."""
        if self.r == 0:
            n = len(a)
            return np.zeros(0) if max_abs(a - np.eye(n)) <= self.tol else None
        a = np.asarray(a, dtype=complex)
        phases = np.array([np.angle(np.vdot(self.vecs[:, k], a @ self.vecs[:, k])) for k in self.picked])
        inv = np.linalg.inv(self.wr)
        rng = range(self.shifts)
        for k in itertools.product(rng, repeat=self.r):
            eta = inv @ (phases + TWO_PI * np.array(k))
            eta = np.mod(eta, TWO_PI)
            z = sum(e * g for e, g in zip(eta, self.gens))
            if max_abs(mat_exp(z) - a) <= self.tol:
                return wrap(eta)
        return None


def wrap(eta) -> np.ndarray:
    """Reduce angles to [0, 2 pi), snapping values within 1e-9 of 2 pi to 0."""
    eta = np.mod(np.asarray(eta, dtype=float), TWO_PI)
    eta[np.abs(eta - TWO_PI) < 1e-9] = 0.0
    return eta


def _is_abelian(mats, atol) -> bool:
    return all(max_abs(a @ b - b @ a) <= atol for a, b in itertools.combinations(mats, 2))


def greedy_max_abelian(setup: Setup, rows: np.ndarray, rng) -> np.ndarray:
    """Maximal abelian subspace of ``span(rows)`` by repeated centralising of
    random elements; rows are algebra coordinates."""
    alg = setup.algebra
    cur = np.asarray(rows, dtype=float).reshape(-1, alg.dim)
    atol = 10 * setup.tol.eq
    for _ in range(alg.dim + 1):
        mats = [alg.matrix(r) for r in cur]
        if len(cur) <= 1 or _is_abelian(mats, atol):
            return orth_rows(cur, setup.tol.rank) if len(cur) else cur
        x = alg.matrix(rng.normal(size=len(cur)) @ cur)
        cols = np.column_stack([alg.coords(x @ m - m @ x, check=False) for m in mats])
        k = nullspace(cols, setup.tol.rank)
        cur = k @ cur
    return cur


def centralizer_in(setup: Setup, rows: np.ndarray, within: np.ndarray) -> np.ndarray:
    """Elements of ``span(within)`` commuting with every ``rows`` element."""
    alg = setup.algebra
    if len(within) == 0:
        return within
    mats = [alg.matrix(r) for r in within]
    blocks = []
    for r in rows:
        x = alg.matrix(r)
        blocks.append(np.column_stack([alg.coords(x @ m - m @ x, check=False) for m in mats]))
    if not blocks:
        return within
    return nullspace(np.vstack(blocks), setup.tol.rank) @ within


def closed_circle_basis(setup: Setup, rows: np.ndarray) -> np.ndarray:
    """Rescale a basis of a compact abelian subalgebra so that each vector
    exponentiates to a closed circle of period 2 pi."""
    alg = setup.algebra
    r = len(rows)
    if r == 0:
        return rows
    mats = [alg.matrix(x) for x in rows]
    m = sum(c * g for c, g in zip(np.random.default_rng(1).normal(size=r), mats))
    _, v = np.linalg.eig(m)
    v, _ = np.linalg.qr(v)
    lam = np.array([[np.imag(np.vdot(v[:, k], g @ v[:, k])) for g in mats] for k in range(v.shape[1])])
    chosen = []
    for row in sorted(lam, key=lambda w: -np.max(np.abs(w))):
        if np.linalg.matrix_rank(np.array(chosen + [row]), tol=1e-8) > len(chosen):
            chosen.append(row)
        if len(chosen) == r:
            break
    inv = np.linalg.inv(np.array(chosen))
    out = []
    for i in range(r):
        c = inv[:, i]
        vals = lam @ c
        for scale in range(1, 25):
            if np.all(np.abs(vals * scale - np.round(vals * scale)) < 1e-6):
                c = c * scale
                break
        out.append(c @ rows)
    return np.array(out)


def max_split_torus(setup: Setup, u=None, seed: int = 0, compact_first: bool = True) -> TorusChart:
    """delta-stable maximal (sigma, theta_u)-split torus through ``u``.

    The compact part is a maximal abelian subspace of the compact split
    eigenspace; the split part is maximal abelian in the noncompact split
    eigenspace of its centraliser.  With ``compact_first=False`` the split
    part is chosen first and the compact part inside its centraliser.
    Compact generators come first in the chart.
    """
    n = setup.n
    u = np.eye(n, dtype=complex) if u is None else np.asarray(u, dtype=complex)
    d = setup.algebra.dim
    eye = np.eye(d)
    rt = setup.tol.rank
    Tu = theta_x_matrix(setup, u)
    S = setup.coord_map("sigma")
    D = setup.coord_map("delta")
    v0 = nullspace(np.vstack([Tu + eye, S + eye, D - eye]), rt)
    v1 = nullspace(np.vstack([Tu + eye, S + eye, D + eye]), rt)
    rng = np.random.default_rng(seed)
    if compact_first:
        b0 = greedy_max_abelian(setup, v0, rng)
        b1 = greedy_max_abelian(setup, centralizer_in(setup, b0, v1), rng)
    else:
        b1 = greedy_max_abelian(setup, v1, rng)
        b0 = greedy_max_abelian(setup, centralizer_in(setup, b1, v0), rng)
    b0 = closed_circle_basis(setup, b0)
    gens = [setup.algebra.matrix(r) for r in b0] + [setup.algebra.matrix(r) for r in b1]
    kinds = ["compact"] * len(b0) + ["split"] * len(b1)
    return TorusChart(gens, kinds, u)


# ---------------------------------------------------------------- Weyl groups


def _key_affine(lin, trans) -> tuple:
    frac = np.round(np.mod(np.asarray(trans) / TWO_PI, 1.0) * 1e6).astype(int) % 1_000_000
    return tuple(np.round(lin).astype(int).ravel()) + tuple(frac)


@dataclass
class WeylGroupTable:
    """Finite group of chart symmetries.

    ``linear[i]`` and ``translation[i]`` give the chart action
    ``c -> linear @ c + translation`` of ``elements[i]``; translations are
    zero for linear (little Weyl) tables.
    """

    elements: list
    linear: list
    translation: list
    identity: int = 0
    rejected: list = field(default_factory=list)
    closed: bool = True
    max_residual: float = 0.0

    @property
    def order(self) -> int:
        return len(self.elements)

    def apply(self, i: int, coords) -> np.ndarray:
        return self.linear[i] @ np.asarray(coords, dtype=float) + self.translation[i]

    def pure_translations(self) -> list[int]:
        k = len(self.translation[0]) if self.translation else 0
        return [i for i in range(self.order) if np.allclose(self.linear[i], np.eye(k))]

    def linear_quotient(self) -> list[np.ndarray]:
        seen, out = set(), []
        for lin in self.linear:
            key = tuple(np.round(lin).astype(int).ravel())
            if key not in seen:
                seen.add(key)
                out.append(np.round(lin))
        return out

    def fixes(self, i: int, coords, atol: float = 1e-9) -> bool:
        d = self.apply(i, coords) - np.asarray(coords)
        d = np.mod(d + math.pi, TWO_PI) - math.pi
        return bool(np.all(np.abs(d) <= atol))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "closed": self.closed,
            "linear": [np.round(m).astype(int).tolist() for m in self.linear],
            "translation": [np.asarray(t).tolist() for t in self.translation],
            "rejected": self.rejected,
        }


def _coeffs(gens, m, atol):
    """Least-squares coefficients of ``m`` over matrices ``gens``; None if off-span."""
    if not gens:
        return np.zeros(0) if max_abs(m) <= atol else None
    a = np.array([g.ravel() for g in gens]).T
    a = np.vstack([a.real, a.imag])
    b = np.concatenate([m.ravel().real, m.ravel().imag])
    c, *_ = np.linalg.lstsq(a, b, rcond=None)
    if max_abs(a @ c - b) > atol:
        return None
    return c


def _conj_linear(gens, h, atol, integral: bool):
    hi = np.linalg.inv(h)
    cols = []
    for g in gens:
        c = _coeffs(gens, h @ g @ hi, atol)
        if c is None:
            return None
        cols.append(c)
    lin = np.array(cols).T if cols else np.zeros((0, 0))
    if integral:
        if max_abs(lin - np.round(lin)) > 1e-6:
            return None
        lin = np.round(lin)
    return lin


def torus_action(setup: Setup, chart: TorusChart, h, log: TorusLog, complex_ok: bool = True):
    """Affine chart action ``c -> L c + t`` of ``h`` acting by ``*`` on the
    compact torus ``chart`` (base point e).  Returns (L, t, reason)."""
    atol = 1e3 * setup.tol.eq
    h = np.asarray(h, dtype=complex)
    if not setup.in_H(h, complex_ok=complex_ok):
        return None, None, "not_in_H"
    lin = _conj_linear(chart.generators, h, atol, integral=True)
    if lin is None:
        return None, None, "not_normalizing"
    t = log.coords(setup.beta_matrix(h))
    if t is None:
        return None, None, "beta_not_in_A0"
    return lin, t, ""


def _close(gens, mult, key_of, max_order):
    """Breadth-first closure; ``gens`` are (element, action) pairs."""
    elems = [gens[0]]
    keys = {key_of(gens[0][1]): 0}
    for g in gens[1:]:
        k = key_of(g[1])
        if k not in keys:
            keys[k] = len(elems)
            elems.append(g)
    frontier = list(elems)
    while frontier:
        new = []
        for a in frontier:
            for b in gens[1:]:
                c = mult(a, b)
                k = key_of(c[1])
                if k not in keys:
                    if len(elems) >= max_order:
                        raise NotClosed(f"group exceeds max_order={max_order}")
                    keys[k] = len(elems)
                    elems.append(c)
                    new.append(c)
        frontier = new
    return elems


def weyl_generate(setup: Setup, candidates, chart: TorusChart, max_order: int = 1024,
                  complex_ok: bool = True, verify: bool = True) -> WeylGroupTable:
    """Group generated by candidates normalising the compact torus ``chart``
    with ``beta(h)`` in it, acting by ``*``; deduplicated by chart action."""
    log = TorusLog(chart.generators, tol=1e3 * setup.tol.eq)
    r = chart.dim
    n = setup.n
    ident = (np.eye(n, dtype=complex), (np.eye(r), np.zeros(r)))
    gens, rejected = [ident], []
    for i, h in enumerate(candidates):
        lin, t, why = torus_action(setup, chart, h, log, complex_ok)
        if why:
            rejected.append({"index": i, "reason": why})
        else:
            gens.append((np.asarray(h, dtype=complex), (lin, t)))

    def mult(a, b):
        (ha, (la, ta)), (hb, (lb, tb)) = a, b
        return ha @ hb, (la @ lb, wrap(la @ tb + ta))

    elems = _close(gens, mult, lambda act: _key_affine(*act), max_order)
    worst = 0.0
    if verify:
        for h, (lin, t) in elems:
            l2, t2, why = torus_action(setup, chart, h, log, complex_ok)
            if why:
                worst = math.inf
                continue
            dt = np.mod(t2 - t + math.pi, TWO_PI) - math.pi
            worst = max(worst, max_abs(l2 - lin), max_abs(dt))
    return WeylGroupTable(
        elements=[e[0] for e in elems],
        linear=[e[1][0] for e in elems],
        translation=[e[1][1] for e in elems],
        rejected=rejected,
        max_residual=worst,
    )


def little_weyl_generate(setup: Setup, candidates, u, t_mats, max_order: int = 1024) -> WeylGroupTable:
    """Group generated by candidates fixing ``u`` (``*``-action) and normalising
    ``span(t_mats)`` under conjugation; linear action on t coordinates."""
    atol = 1e3 * setup.tol.eq
    u = np.asarray(u, dtype=complex)
    k = len(t_mats)
    n = setup.n
    gens, rejected = [(np.eye(n, dtype=complex), np.eye(k))], []
    for i, h in enumerate(candidates):
        h = np.asarray(h, dtype=complex)
        if not setup.in_H(h):
            rejected.append({"index": i, "reason": "not_in_H"})
            continue
        if max_abs(setup.star(h, u) - u) > atol:
            rejected.append({"index": i, "reason": "does_not_fix_u"})
            continue
        lin = _conj_linear(t_mats, h, atol, integral=False)
        if lin is None:
            rejected.append({"index": i, "reason": "not_normalizing"})
            continue
        gens.append((h, lin))

    def mult(a, b):
        return a[0] @ b[0], a[1] @ b[1]

    def key(lin):
        return tuple(np.round(lin, 6).ravel() + 0.0)

    elems = _close(gens, mult, key, max_order)
    return WeylGroupTable(
        elements=[e[0] for e in elems],
        linear=[e[1] for e in elems],
        translation=[np.zeros(k) for _ in elems],
        rejected=rejected,
    )


# ------------------------------------------------------------ fundamental domain


@dataclass
class Domain:
    """Box ``lower <= c <= upper`` intersected with ``A c <= b``; periodic
    domains are the whole torus ``[0, 2 pi)^r``."""

    lower: np.ndarray
    upper: np.ndarray
    ineq_A: np.ndarray
    ineq_b: np.ndarray
    periodic: bool

    @classmethod
    def torus(cls, r: int) -> "Domain":
        return cls(np.zeros(r), np.full(r, TWO_PI), np.zeros((0, r)), np.zeros(0), True)

    def contains(self, c, atol: float = 1e-9) -> bool:
        c = np.asarray(c, dtype=float)
        if self.periodic:
            return True
        if np.any(c < self.lower - atol) or np.any(c > self.upper + atol):
            return False
        return bool(np.all(self.ineq_A @ c <= self.ineq_b + atol)) if len(self.ineq_b) else True

    def to_dict(self) -> dict:
        return {
            "periodic": self.periodic,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "inequalities": [{"a": a.tolist(), "b": float(b)} for a, b in zip(self.ineq_A, self.ineq_b)],
        }


def domain_covers(domain: Domain, weyl: WeylGroupTable, samples: int = 200, seed: int = 0) -> bool:
    """Every sampled torus point has a Weyl image inside ``domain``."""
    if domain.periodic:
        return True
    rng = np.random.default_rng(seed)
    r = len(domain.lower)
    for _ in range(samples):
        c = rng.uniform(0, TWO_PI, size=r)
        if not any(domain.contains(wrap(weyl.apply(i, c)), 1e-9) for i in range(weyl.order)):
            return False
    return True


# ---------------------------------------------------------------- strata


@dataclass
class Stratum:
    id: int
    nodes: list  # chart coordinates of grid nodes in the stratum
    isotropy_dim: int
    representative: np.ndarray
    dim: int
    walls: list = field(default_factory=list)  # localised jump points
    fixers: list = field(default_factory=list)  # indices of component reps fixing it
    fiber: "FiberData | None" = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "isotropy_dim": self.isotropy_dim,
            "dim": self.dim,
            "representative": self.representative.tolist(),
            "n_nodes": len(self.nodes),
            "n_walls": len(self.walls),
            "fixers": self.fixers,
            "fiber": self.fiber.to_dict() if self.fiber else None,
        }


class Grid:
    def __init__(self, domain: Domain, grid_n: int):
        r = len(domain.lower)
        self.domain = domain
        self.r = r
        self.n = grid_n
        if domain.periodic:
            self.counts = [grid_n] * r
            self.step = (domain.upper - domain.lower) / grid_n
        else:
            self.counts = [grid_n + 1] * r
            self.step = (domain.upper - domain.lower) / grid_n
        self.index = {}
        for idx in itertools.product(*(range(c) for c in self.counts)):
            c = self.coord(idx)
            if domain.contains(c):
                self.index[idx] = len(self.index)
        self.nodes = list(self.index)

    def coord(self, idx) -> np.ndarray:
        return self.domain.lower + np.asarray(idx) * self.step

    def neighbours(self, idx):
        for d in itertools.product((-1, 0, 1), repeat=self.r):
            if not any(d):
                continue
            j = tuple(self._wrap(i + k, a) for a, (i, k) in enumerate(zip(idx, d)))
            if None not in j and j in self.index:
                yield j, d

    def _wrap(self, i, axis):
        if self.domain.periodic:
            return i % self.counts[axis]
        return i if 0 <= i < self.counts[axis] else None

    def nearest(self, c):
        c = np.asarray(c, dtype=float)
        idx = np.round((c - self.domain.lower) / self.step).astype(int)
        if self.domain.periodic:
            idx = idx % np.array(self.counts)
        return tuple(int(i) for i in idx)


def _components(grid: Grid, labels: dict) -> list[list]:
    seen, comps = set(), []
    for idx in grid.nodes:
        if idx in seen:
            continue
        comp, stack = [], [idx]
        seen.add(idx)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b, _ in grid.neighbours(a):
                if b not in seen and labels[b] == labels[a]:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def _grid_dist(grid: Grid, a, b) -> float:
    d = np.abs(np.array(a) - np.array(b)).astype(float)
    if grid.domain.periodic:
        counts = np.array(grid.counts)
        d = np.minimum(d, counts - d)
    return float(np.sqrt(np.sum(d**2)))


def _component_dim(grid: Grid, comp) -> int:
    if len(comp) < 2:
        return 0
    members = set(comp)
    diffs = []
    for a in comp:
        for b, d in grid.neighbours(a):
            if b in members:
                diffs.append(d)
    return int(np.linalg.matrix_rank(np.array(diffs, dtype=float))) if diffs else 0


def _pick_representative(grid: Grid, comp, labels, own) -> tuple:
    others = [i for i in grid.nodes if labels[i] != own]
    higher = [i for i in grid.nodes if labels[i] > own]

    def score(a):
        d1 = min((_grid_dist(grid, a, b) for b in others), default=math.inf)
        d2 = min((_grid_dist(grid, a, b) for b in higher), default=math.inf)
        return (-d1, -d2, a)

    if len(comp) == 1:
        return comp[0]
    # restrict the search to keep it cheap on large components
    return min(comp, key=score)


def stratify(setup: Setup, chart: TorusChart, weyl: WeylGroupTable | None = None, grid_n: int = 64,
             domain: Domain | None = None, refine_levels: int = 4, label_fn=None,
             threads: int = 1) -> list[Stratum]:
    """Connected components of constant isotropy dimension on a grid over a
    fundamental domain of ``chart``; jumps between neighbouring nodes are
    localised by bisection to ``step / 2**refine_levels``."""
    domain = domain or Domain.torus(chart.dim)
    grid = Grid(domain, grid_n)

    def label_at(c):
        if label_fn is not None:
            return label_fn(c)
        return isotropy_dim(setup, chart.point(c))

    coords = [grid.coord(idx) for idx in grid.nodes]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(label_at, coords))
    else:
        vals = [label_at(c) for c in coords]
    labels = dict(zip(grid.nodes, vals))
    comps = _components(grid, labels)
    comp_of = {idx: k for k, comp in enumerate(comps) for idx in comp}
    walls = {k: [] for k in range(len(comps))}
    thin = []
    for a in grid.nodes:
        for b, d in grid.neighbours(a):
            if sum(map(abs, d)) != 1 or b < a or labels[a] == labels[b]:
                continue
            lo, hi = grid.coord(a), grid.coord(a) + np.array(d) * grid.step
            la, lb = labels[a], labels[b]
            for _ in range(refine_levels):
                mid = (lo + hi) / 2
                lm = label_at(mid)
                if lm == la:
                    lo = mid
                elif lm == lb:
                    hi = mid
                else:
                    near = {labels[c] for x in (a, b) for c, _ in grid.neighbours(x)}
                    if lm not in near:
                        thin.append((mid, lm))
                    break
            wall = (lo + hi) / 2
            walls[comp_of[a]].append(wall)
            walls[comp_of[b]].append(wall)
    strata = []
    for k, comp in enumerate(comps):
        own = labels[comp[0]]
        rep_idx = _pick_representative(grid, comp, labels, own)
        rep = grid.coord(rep_idx)
        strata.append(Stratum(
            id=k,
            nodes=[grid.coord(i) for i in comp],
            isotropy_dim=own,
            representative=rep,
            dim=_component_dim(grid, comp),
            walls=walls[k],
            fixers=_fixers(setup, chart.point(rep)),
        ))
    for mid, lm in thin:
        strata.append(Stratum(len(strata), [mid], lm, mid, 0, [], _fixers(setup, chart.point(mid))))
    for s in strata:
        s.grid = grid
    return strata


def _fixers(setup: Setup, u) -> list[int]:
    out = []
    for i, h in enumerate(setup.spec.component_reps):
        if max_abs(setup.star(h, u) - u) <= 1e3 * setup.tol.eq:
            out.append(i)
    return out


def node_labels(strata: list[Stratum]) -> dict:
    """Map grid-node key -> stratum id."""
    out = {}
    for s in strata:
        for c in s.nodes:
            out[tuple(np.round(c, 9))] = s.id
    return out


def same_partition(strata_a: list[Stratum], strata_b: list[Stratum]) -> bool:
    """Whether two stratifications on the same grid induce the same partition."""
    la, lb = node_labels(strata_a), node_labels(strata_b)
    if set(la) != set(lb):
        return False
    pairs = {(la[k], lb[k]) for k in la}
    return len(pairs) == len({p[0] for p in pairs}) == len({p[1] for p in pairs})


def weyl_strata(setup: Setup, chart: TorusChart, weyl: WeylGroupTable, grid_n: int = 64,
                domain: Domain | None = None) -> list[Stratum]:
    """Connected components of the Weyl-isotropy-type stratification."""

    def label(c):
        fixed = tuple(i for i in range(weyl.order) if weyl.fixes(i, c, 1e-9))
        return len(fixed), fixed

    return stratify(setup, chart, weyl, grid_n, domain, refine_levels=0, label_fn=label)


# ---------------------------------------------------------------- fibres


@dataclass
class FiberData:
    slice_noncompact_basis: np.ndarray
    t_basis: np.ndarray
    little_weyl: WeylGroupTable
    chamber: list  # list of (normal, text) with normal . t >= 0
    maximal: bool = True

    @property
    def t_dim(self) -> int:
        return len(self.t_basis)

    def chamber_text(self) -> list[str]:
        return [txt for _, txt in self.chamber]

    def to_dict(self) -> dict:
        return {
            "slice_noncompact_dim": len(self.slice_noncompact_basis),
            "t_dim": self.t_dim,
            "little_weyl_order": self.little_weyl.order,
            "chamber": self.chamber_text(),
            "maximal": self.maximal,
        }


def dirichlet_chamber(linear_maps: list[np.ndarray], k: int) -> list:
    """Irredundant half-spaces ``normal . t >= 0`` cutting out the Dirichlet
    domain of a finite linear group around ``p = (1, 2, ..., k)``."""
    if k == 0:
        return []
    p = np.arange(1, k + 1, dtype=float)
    if sum(np.allclose(m @ p, p) for m in linear_maps) > 1:
        p = p + np.sqrt(np.arange(2, k + 2)) * 1e-3
    normals = []
    for m in linear_maps:
        v = p - m @ p
        if np.linalg.norm(v) > 1e-9:
            normals.append(v)
    keep = []
    for i, c in enumerate(normals):
        others = [o for j, o in enumerate(normals) if j != i]
        if not others:
            keep.append(c)
            continue
        res = linprog(c, A_ub=-np.array(others), b_ub=np.zeros(len(others)), bounds=[(-1, 1)] * k, method="highs")
        if res.status == 0 and res.fun < -1e-9:
            keep.append(c)
    out, seen = [], set()
    for c in keep:
        c = c / np.max(np.abs(c))
        key = tuple(np.round(c, 6))
        if key not in seen:
            seen.add(key)
            out.append((c, _ineq_text(c)))
    out.sort(key=lambda x: x[1])
    return out


def _ineq_text(c) -> str:
    nz = [(i, v) for i, v in enumerate(c) if abs(v) > 1e-9]
    if len(nz) == 1:
        i, v = nz[0]
        return f"r{i + 1} >= 1" if v > 0 else f"r{i + 1} <= 1"
    if len(nz) == 2 and abs(nz[0][1] + nz[1][1]) < 1e-9:
        (i, vi), (j, vj) = nz
        lo, hi = (i, j) if vi < 0 else (j, i)
        return f"r{lo + 1} <= r{hi + 1}"
    terms = " * ".join(f"r{i + 1}^{v:.6g}" for i, v in nz)
    return f"{terms} >= 1"


def fiber_at(setup: Setup, u, candidates_Hu=(), t_hint=None, seed: int = 0, max_order: int = 1024) -> FiberData:
    """Slice noncompact part, a maximal abelian ``t`` in it, the little Weyl
    group generated by ``candidates_Hu`` and the chamber of ``exp(t) / W``."""
    alg = setup.algebra
    tr = transversal(setup, u)
    nc = tr.slice_noncompact
    rt = setup.tol.rank
    if t_hint is not None and len(t_hint):
        rows = np.array([alg.coords(np.asarray(m, dtype=complex)) for m in t_hint])
        if len(nc):
            resid = max_abs(rows - rows @ nc.T @ nc)
        else:
            resid = max_abs(rows)
        if resid > 1e3 * setup.tol.eq:
            raise ValueError(f"t hint is not inside S_u & r0 (residual {resid:.2e})")
        t_rows = rows
    else:
        t_rows = greedy_max_abelian(setup, nc, np.random.default_rng(seed)) if len(nc) else nc
    t_mats = [alg.matrix(r) for r in t_rows]
    abelian = _is_abelian(t_mats, 10 * setup.tol.eq)
    cent = centralizer_in(setup, t_rows, nc) if len(nc) else nc
    maximal = abelian and len(orth_rows(cent, rt)) == len(orth_rows(t_rows, rt)) if len(t_rows) else len(nc) == 0
    table = little_weyl_generate(setup, candidates_Hu, u, t_mats, max_order)
    chamber = dirichlet_chamber(table.linear, len(t_mats))
    return FiberData(nc, t_rows, table, chamber, maximal)


# ------------------------------------------------------- minimal collection


def torus_compact_directions(chart_a0: TorusChart, torus: TorusChart, atol: float) -> np.ndarray | None:
    """Compact generators of ``torus`` in A_0 chart coordinates (None if not in Lie(A_0))."""
    rows = []
    for g in torus.compact:
        c = _coeffs(chart_a0.generators, g, atol)
        if c is None:
            return None
        rows.append(c)
    return np.array(rows, dtype=float).reshape(len(rows), chart_a0.dim)


@dataclass
class EquivalenceResult:
    element: int | None
    verdict: str  # "equivalent" | "inequivalent" | "not found within table"


def equivalence_test(setup: Setup, t1: TorusChart, t2: TorusChart, weyl: WeylGroupTable,
                     a0: TorusChart, atol: float = 1e-6) -> EquivalenceResult:
    """First Weyl element carrying the compact part of ``t1`` onto that of ``t2``."""
    eq = 1e3 * setup.tol.eq
    log = TorusLog(a0.generators, tol=eq)
    dirs, bases = [], []
    for t in (t1, t2):
        d = torus_compact_directions(a0, t, eq)
        b = log.coords(t.base_point)
        if d is None or b is None:
            raise NotStandard("torus compact part or base point not in A_0")
        dirs.append(d)
        bases.append(b)
    if len(t1.split) != len(t2.split) or len(dirs[0]) != len(dirs[1]):
        return EquivalenceResult(None, "inequivalent" if weyl.closed else "not found within table")
    r = a0.dim
    span2 = orth_rows(dirs[1]) if len(dirs[1]) else np.zeros((0, r))
    perp = np.eye(r) - span2.T @ span2
    for i in range(weyl.order):
        lin = weyl.linear[i]
        img = dirs[0] @ lin.T
        if len(img) and subspace_distance(img, dirs[1], r) > atol:
            continue
        diff = weyl.apply(i, bases[0]) - bases[1]
        for k in itertools.product(range(-2, 3), repeat=r):
            if max_abs(perp @ (diff + TWO_PI * np.array(k))) <= atol:
                return EquivalenceResult(i, "equivalent")
    return EquivalenceResult(None, "inequivalent" if weyl.closed else "not found within table")


def stratum_directions(stratum: Stratum) -> np.ndarray:
    """Integer direction vectors spanning the stratum in grid units."""
    if stratum.dim == 0:
        return np.zeros((0, len(stratum.representative)))
    grid = stratum.grid
    members = {tuple(np.round(c, 9)) for c in stratum.nodes}
    diffs = set()
    for c in stratum.nodes:
        idx = grid.nearest(c)
        for b, d in grid.neighbours(idx):
            if tuple(np.round(grid.coord(b), 9)) in members:
                diffs.add(tuple(abs(x) if d[0] >= 0 else -x for x in d))
    cand = sorted(diffs, key=lambda d: (sum(map(abs, d)), d))
    out = []
    for d in cand:
        if np.linalg.matrix_rank(np.array(out + [d], dtype=float)) > len(out):
            out.append(d)
        if len(out) == stratum.dim:
            break
    return np.array(out, dtype=float)


@dataclass
class MinimalTorus:
    chart: TorusChart
    stratum_id: int
    standard: bool
    split_ok: bool
    in_kempf_ness: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, fmt) -> dict:
        return {
            "stratum": self.stratum_id,
            "kinds": self.chart.kinds,
            "generators": [fmt(g) for g in self.chart.generators],
            "base_point": fmt(self.chart.base_point),
            "standard": self.standard,
            "split_ok": self.split_ok,
            "in_kempf_ness": self.in_kempf_ness,
            "diagnostics": self.diagnostics,
        }


def _torus_checks(setup: Setup, chart: TorusChart, samples: int = 5, seed: int = 0) -> tuple[bool, bool, dict]:
    u = chart.base_point
    ui = np.linalg.inv(u)
    eq = 1e3 * setup.tol.eq
    worst = 0.0
    for g, kind in zip(chart.generators, chart.kinds):
        worst = max(worst, max_abs(setup.sigma.algebra(g) + g))
        worst = max(worst, max_abs(u @ setup.theta.algebra(g) @ ui + g))
        sign = 1 if kind == "compact" else -1
        worst = max(worst, max_abs(setup.delta.algebra(g) - sign * g))
    br = chart.bracket_residual()
    per = chart.period_residual()
    split_ok = worst <= eq and br <= eq and per <= eq
    rng = np.random.default_rng(seed)
    kn = True
    for _ in range(samples):
        c = np.array([rng.uniform(0, TWO_PI) if k == "compact" else rng.normal() for k in chart.kinds])
        kn = kn and in_kempf_ness(setup, chart.point(c))
    return split_ok, kn, {"split_residual": worst, "bracket_residual": br, "period_residual": per}


def minimal_collection(setup: Setup, a0: TorusChart, weyl: WeylGroupTable, strata: list[Stratum],
                       quotient_dim: int) -> tuple[list[MinimalTorus], dict]:
    """Standard tori ``exp(t) C u`` for strata with ``dim t + dim S`` equal to
    the quotient dimension, deduplicated up to the Weyl group."""
    eq = 1e3 * setup.tol.eq
    out: list[MinimalTorus] = []
    coverage = {}
    for s in sorted(strata, key=lambda s: (s.id, tuple(s.representative))):
        if s.fiber is None:
            raise ValueError(f"stratum {s.id} has no fibre data")
        if s.fiber.t_dim + s.dim != quotient_dim:
            coverage[s.id] = "sub-maximal"
            continue
        dirs = stratum_directions(s)
        compact = [sum(c * g for c, g in zip(d, a0.generators)) for d in dirs]
        split = [setup.algebra.matrix(r) for r in s.fiber.t_basis]
        base = a0.point(s.representative)
        if s.dim == a0.dim:
            base = np.eye(setup.n, dtype=complex)
        chart = TorusChart(compact + split, ["compact"] * len(compact) + ["split"] * len(split), base)
        standard = torus_compact_directions(a0, chart, eq) is not None
        split_ok, kn, diag = _torus_checks(setup, chart)
        cand = MinimalTorus(chart, s.id, standard, split_ok, kn, diag)
        match = None
        for j, t in enumerate(out):
            if equivalence_test(setup, chart, t.chart, weyl, a0).element is not None:
                match = j
                break
        if match is None:
            coverage[s.id] = len(out)
            out.append(cand)
        else:
            coverage[s.id] = match
    return out, coverage


@dataclass
class QuotientAtlas:
    A0: TorusChart
    weyl: WeylGroupTable
    strata: list
    minimal_tori: list
    coverage: dict
    quotient_dim: int
    domain: Domain
    diagnostics: dict = field(default_factory=dict)


@dataclass
class FiberHint:
    """Configured fibre data near a chart point: optional t basis and
    candidate elements of the isotropy group."""

    at: np.ndarray
    t_basis: list = field(default_factory=list)
    candidates: list = field(default_factory=list)


def _hint_for(setup: Setup, a0: TorusChart, stratum: Stratum, hints) -> FiberHint | None:
    grid = stratum.grid
    members = {tuple(np.round(c, 9)) for c in stratum.nodes}
    for h in hints:
        if not grid.domain.contains(h.at, 1e-9):
            continue
        node = tuple(np.round(grid.coord(grid.nearest(h.at)), 9))
        if node in members and isotropy_dim(setup, a0.point(h.at)) == stratum.isotropy_dim:
            return h
    return None


def build_atlas(setup: Setup, a0: TorusChart, weyl_candidates=(), domain: Domain | None = None,
                fiber_hints=(), grid_n: int = 64, refine_levels: int = 4, max_order: int = 1024,
                seed: int = 0, threads: int = 1) -> QuotientAtlas:
    """Weyl table, strata with fibres, and the minimal torus collection."""
    diag = {}
    ref = max_split_torus(setup, seed=seed)
    quotient_dim = ref.dim
    a0_rows = [setup.algebra.coords(g, check=False) for g in a0.generators]
    ref_rows = [setup.algebra.coords(g, check=False) for g in ref.compact]
    diag["a0_dim_matches_greedy"] = len(ref_rows) == len(a0_rows)
    diag["a0_bracket_residual"] = a0.bracket_residual()
    diag["a0_period_residual"] = a0.period_residual()
    split_ok, kn, _ = _torus_checks(setup, a0)
    diag["a0_split"] = split_ok
    diag["a0_in_kempf_ness"] = kn
    weyl = weyl_generate(setup, weyl_candidates, a0, max_order=max_order)
    domain = domain or Domain.torus(a0.dim)
    diag["domain_covers_torus"] = domain_covers(domain, weyl)
    strata = stratify(setup, a0, weyl, grid_n, domain, refine_levels, threads=threads)
    for s in strata:
        hint = _hint_for(setup, a0, s, fiber_hints)
        u = a0.point(s.representative)
        if hint is None:
            s.fiber = fiber_at(setup, u, (), None, seed, max_order)
            s.fiber_source = "computed"
        else:
            s.fiber = fiber_at(setup, u, hint.candidates, hint.t_basis or None, seed, max_order)
            s.fiber_source = "configured"
    tori, coverage = minimal_collection(setup, a0, weyl, strata, quotient_dim)
    diag["max_split_residual"] = max((t.diagnostics["split_residual"] for t in tori), default=0.0)
    return QuotientAtlas(a0, weyl, strata, tori, coverage, quotient_dim, domain, diag)
