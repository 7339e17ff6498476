"""Golden checks for the bundled SL(2,R) and SL(8,R) fixtures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import Config
from .cosets import is_principal, make_point, transversal
from .errors import Inconclusive
from .kempf_ness import FlowOptions, gradient_flow, in_kempf_ness, is_orbit_closed, mu, slice_rep_weights
from .symmetric import Setup, validate_setup
from .tori import build_atlas, max_split_torus, same_partition, weyl_generate, weyl_strata

V = np.array([[0, -1], [1, 0]], dtype=complex)


def sl2_point(x: float, y: float, z: float) -> np.ndarray:
    """Point of the hyperboloid ``x^2 + y^2 = 1 + z^2`` as a matrix of X."""
    return np.array([[y + z, x], [-x, y - z]], dtype=complex)


def sl2_coords(m) -> tuple[float, float, float]:
    m = np.real(np.asarray(m))
    return float(m[0, 1]), float((m[0, 0] + m[1, 1]) / 2), float((m[0, 0] - m[1, 1]) / 2)


def on_hyperboloid(x: float, z: float, sign: int = 1) -> np.ndarray:
    return sl2_point(x, sign * math.sqrt(1 + z * z - x * x), z)


@dataclass
class GoldenCheck:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def _setup(cfg: Config, seed: int) -> Setup:
    setup, _ = validate_setup(cfg.group, cfg.tol(), seed, raise_on_fail=False)
    return setup


def golden_sl2(cfg: Config, seed: int = 0) -> list[GoldenCheck]:
    out = []
    add = out.append
    setup = _setup(cfg, seed)
    add(GoldenCheck("setup validates", setup.report.ok))
    if not setup.report.ok:
        return out
    dims = setup.decomposition.dims()
    add(GoldenCheck("dim h = 1, dim q = 2, dim r0 = 2", (dims["h"], dims["q"], dims["r0"]) == (1, 2, 2),
                    str((dims["h"], dims["q"], dims["r0"]))))

    ok = True
    for z in np.linspace(-3, 3, 13):
        for phi in np.linspace(0, 2 * np.pi, 12, endpoint=False):
            r = math.sqrt(1 + z * z)
            x, y = r * math.cos(phi), r * math.sin(phi)
            if abs(y) < 1e-12:
                y = 0.0
            pt = sl2_point(x, y, z)
            expect = abs(y) < 1e-7 or abs(z) < 1e-7
            ok &= in_kempf_ness(setup, pt) == expect
            ok &= (math.sqrt(mu(setup, pt).norm_sq) < 1e-7) == expect
    add(GoldenCheck("Kempf-Ness set is {y = 0} u {z = 0}", ok))

    pt = make_point(setup, on_hyperboloid(0.5, 1.2))
    tr = gradient_flow(setup, pt, FlowOptions(max_iters=500))
    x1, _, z1 = sl2_coords(tr.final.mat)
    add(GoldenCheck("flow from (0.5, y, 1.2) reaches z = 0", tr.converged and abs(z1) < 1e-5 and abs(x1 - 0.5) < 1e-9,
                    f"z={z1:.2e} x={x1:.12f}"))

    try:
        res = is_orbit_closed(setup, make_point(setup, sl2_point(1, 1, 1)), FlowOptions(max_iters=3000))
        add(GoldenCheck("orbit of (1, 1, 1) is not closed", not res.closed, res.reason))
    except Inconclusive as exc:
        add(GoldenCheck("orbit of (1, 1, 1) is not closed", False, str(exc)))

    tv = transversal(setup, V)
    w = slice_rep_weights(setup, V)
    ws = sorted(np.real(w[0]["weights"])) if w else []
    add(GoldenCheck("slice at v: dim 2, weights {-2, 2}",
                    tv.slice_dim == 2 and len(ws) == 2 and np.allclose(ws, [-2, 2], atol=1e-9), str(ws)))
    a0 = cfg.a0
    prin = [is_principal(setup, a0.point([t])).principal for t in (0.3, 1.0, 2.0, 4.0)]
    add(GoldenCheck("principal off +-v, not at +-v",
                    all(prin) and not is_principal(setup, V).principal and not is_principal(setup, -V).principal))

    ch = max_split_torus(setup, seed=seed)
    chv = max_split_torus(setup, V, seed=seed, compact_first=False)
    add(GoldenCheck("maximal split torus: compact at e, split at v",
                    ch.kinds == ["compact"] and chv.kinds == ["split"]))

    atlas = build_atlas(setup, a0, cfg.weyl, cfg.domain, cfg.fibers, cfg.numeric["grid_n"],
                        cfg.numeric["refine_levels"], cfg.numeric["max_group_order"], seed)
    add(GoldenCheck("W0* trivial", atlas.weyl.order == 1, f"order {atlas.weyl.order}"))
    add(GoldenCheck("4 strata", len(atlas.strata) == 4, str(len(atlas.strata))))
    bases = sorted(tuple(np.round(np.real(t.chart.base_point), 6).ravel()) for t in atlas.minimal_tori)
    want = sorted(tuple(np.round(np.real(b), 6).ravel()) for b in (np.eye(2), V, -V))
    kinds = sorted(tuple(t.chart.kinds) for t in atlas.minimal_tori)
    add(GoldenCheck("minimal tori are A0, Av, A(-v)",
                    bases == want and kinds == [("compact",), ("split",), ("split",)]))
    add(GoldenCheck("little Weyl groups trivial", all(s.fiber.little_weyl.order == 1 for s in atlas.strata)))
    wc = weyl_generate(setup, cfg.complex_weyl, a0, complex_ok=True)
    ws_ = weyl_strata(setup, a0, wc, cfg.numeric["grid_n"], atlas.domain)
    add(GoldenCheck("complex candidate: order 2, same strata",
                    wc.order == 2 and same_partition(atlas.strata, ws_), f"order {wc.order}"))
    return out


def golden_sl8(cfg: Config, seed: int = 0, threads: int = 1) -> list[GoldenCheck]:
    out = []
    add = out.append
    setup = _setup(cfg, seed)
    add(GoldenCheck("setup validates", setup.report.ok))
    if not setup.report.ok:
        return out
    d = setup.decomposition.dim("q&p")
    add(GoldenCheck("dim(p & q) = 12", d == 12, str(d)))
    ch = max_split_torus(setup, seed=seed)
    add(GoldenCheck("maximal split torus at e: 2 compact generators", ch.kinds == ["compact", "compact"]))
    w = weyl_generate(setup, cfg.weyl, cfg.a0, cfg.numeric["max_group_order"])
    add(GoldenCheck("W0* order 32", w.order == 32, str(w.order)))
    tr = w.pure_translations()
    add(GoldenCheck("4 pure translations, order 2", len(tr) == 4 and all(
        np.allclose(np.mod(2 * w.translation[i] + np.pi, 2 * np.pi) - np.pi, 0, atol=1e-9) for i in tr)))
    lin = {tuple(m.astype(int).ravel()) for m in w.linear_quotient()}
    signed = {(a, 0, 0, b) for a in (1, -1) for b in (1, -1)} | {(0, a, b, 0) for a in (1, -1) for b in (1, -1)}
    add(GoldenCheck("linear quotient = signed permutations", lin == signed))

    atlas = build_atlas(setup, cfg.a0, cfg.weyl, cfg.domain, cfg.fibers, cfg.numeric["grid_n"],
                        cfg.numeric["refine_levels"], cfg.numeric["max_group_order"], seed, threads)
    by = locate_sl8_strata(atlas)
    add(GoldenCheck("7 strata (interior, diagonal, two edges, three corners)",
                    len(atlas.strata) == 7 and len(by) == 7, str(sorted(by))))
    expect = {
        "interior": (0, 1, None),
        "diagonal": (1, 2, ["r1 >= 1"]),
        "edge_eta1_0": (1, 2, ["r1 >= 1"]),
        "edge_eta2_pi2": (1, 2, ["r1 >= 1"]),
        "corner_e": (2, 8, ["r1 <= r2", "r1 >= 1"]),
        "corner_pi2_pi2": (2, 8, None),
        "corner_0_pi2": (2, 4, ["r1 >= 1", "r2 >= 1"]),
    }
    for key, (td, order, chamber) in expect.items():
        s = by.get(key)
        if s is None:
            add(GoldenCheck(f"fibre {key}", False, "stratum missing"))
            continue
        f = s.fiber
        ok = f.t_dim == td and f.little_weyl.order == order and f.maximal
        if chamber is not None:
            ok &= f.chamber_text() == chamber
        add(GoldenCheck(f"fibre {key}: dim t={td}, |W|={order}", ok,
                        f"dim t={f.t_dim} |W|={f.little_weyl.order} chamber={f.chamber_text()}"))
    add(GoldenCheck("quotient dimension 2", atlas.quotient_dim == 2))
    interior = by.get("interior")
    ok = False
    if interior is not None and isinstance(atlas.coverage.get(interior.id), int):
        t = atlas.minimal_tori[atlas.coverage[interior.id]].chart
        ok = t.kinds == ["compact", "compact"] and np.allclose(t.base_point, np.eye(8))
    add(GoldenCheck("A0 claimed by the open stratum", ok))
    add(GoldenCheck("minimal tori standard, split and in the Kempf-Ness set",
                    all(t.standard and t.split_ok and t.in_kempf_ness for t in atlas.minimal_tori),
                    f"{len(atlas.minimal_tori)} tori"))
    return out


def locate_sl8_strata(atlas) -> dict:
    """Name the strata of the SL(8) fundamental domain by position."""
    hp = math.pi / 2
    names = {}
    for s in atlas.strata:
        e1, e2 = s.representative
        if s.dim == 2:
            key = "interior"
        elif s.dim == 0:
            key = {(0, 0): "corner_e", (1, 1): "corner_pi2_pi2", (0, 1): "corner_0_pi2"}.get(
                (int(round(e1 / hp)), int(round(e2 / hp))), f"point_{s.id}")
        elif abs(e1 - e2) < 1e-9:
            key = "diagonal"
        elif abs(e1) < 1e-9:
            key = "edge_eta1_0"
        elif abs(e2 - hp) < 1e-9:
            key = "edge_eta2_pi2"
        else:
            key = f"curve_{s.id}"
        names[key] = s
    return names


GOLDEN = {"sl2": golden_sl2, "sl8": golden_sl8}
