"""Regenerate the bundled SL(2,R) and SL(8,R) configuration fixtures."""

import itertools
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "dcoset" / "fixtures"

I2, Z2 = np.eye(2), np.zeros((2, 2))
I4, Z4 = np.eye(4), np.zeros((4, 4))
J = np.array([[0.0, 1.0], [-1.0, 0.0]])
AL = np.array([[0.0, 1.0], [1.0, 0.0]])


def d2(a, b):
    return np.block([[a, Z2], [Z2, b]])


def bd(g, h):
    return np.block([[g, Z4], [Z4, h]])


def m(a):
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in a]


def inv(jm, it=False, cj=False):
    return {"J": m(jm), "inverse_transpose": it, "conjugate": cj}


def sl2():
    return {
        "schema": "dcoset-config/1",
        "name": "sl2",
        "group": {
            "n": 2,
            "algebra_basis": [m([[0, 1], [0, 0]]), m([[0, 0], [1, 0]]), m([[1, 0], [0, -1]])],
            "membership": ["det1", "real"],
            "assume_G_eq_HG0K": True,
            "sigma": inv(np.diag([1.0, -1.0])),
            "theta": inv(AL),
            "delta": inv(np.eye(2), True, True),
            "phi": inv(np.eye(2), False, True),
        },
        "candidates": {
            "component_reps": [m(-np.eye(2))],
            "weyl": [m(-np.eye(2))],
            "complex_weyl": [m(np.diag([1j, -1j]))],
            "A0": [m(J)],
            "domain": {"periodic": True},
            "fibers": [],
        },
        "numeric": {"grid_n": 64, "seed": 0},
    }


def sl8_torus_generators():
    e1, e2 = np.zeros((8, 8)), np.zeros((8, 8))
    e1[0:2, 4:6] = J
    e1[4:6, 0:2] = J
    e2[2:4, 6:8] = J
    e2[6:8, 2:4] = J
    return e1, e2


def off_skew(c):
    return np.block([[Z4, c], [-c, Z4]])


def off_sym(c):
    return np.block([[Z4, c], [c.T, Z4]])


def point(e1v, e2v):
    from scipy.linalg import expm

    e1, e2 = sl8_torus_generators()
    return expm(e1v * e1 + e2v * e2)


def signed_perms():
    for p in itertools.permutations(range(4)):
        for s in itertools.product([1, -1], repeat=4):
            g = np.zeros((4, 4))
            for i, j in enumerate(p):
                g[i, j] = s[i]
            yield g


def isotropy_candidates(u, t_mats):
    """Block-diagonal signed permutations fixing u and normalising span(t)."""
    sp = list(signed_perms())
    blocks = [u[:4, :4], u[:4, 4:], u[4:, :4], u[4:, 4:]]
    basis = np.array([t.ravel() for t in t_mats]).T
    found = {}
    for g in sp:
        for h in sp:
            if round(np.linalg.det(g) * np.linalg.det(h)) != 1:
                continue
            u1, u2, u3, u4 = blocks
            if not (np.allclose(g @ u1 @ h.T, u1) and np.allclose(g @ u2 @ g.T, u2)
                    and np.allclose(h @ u3 @ h.T, u3) and np.allclose(h @ u4 @ g.T, u4)):
                continue
            d = bd(g, h)
            cols = []
            for t in t_mats:
                img = (d @ t @ d.T).ravel()
                c = np.linalg.lstsq(basis, img, rcond=None)[0]
                if np.linalg.norm(basis @ c - img) > 1e-9:
                    break
                cols.append(c)
            else:
                found.setdefault(tuple(np.round(np.array(cols), 6).ravel() + 0.0), d)
    return found


def _closure(mats, k):
    group = {tuple(np.eye(k).ravel())}
    frontier = list(group)
    while frontier:
        new = []
        for a in frontier:
            for g in mats:
                c = tuple(np.round(np.array(a).reshape(k, k) @ g, 6).ravel() + 0.0)
                if c not in group:
                    group.add(c)
                    new.append(c)
        frontier = new
    return group


def generators_of(found):
    """Greedy generating subset of the induced linear group."""
    keys = sorted(found)
    k = int(round(np.sqrt(len(keys[0]))))
    chosen, lin, group = [], [], _closure([], k)
    for key in keys:
        if key not in group:
            chosen.append(found[key])
            lin.append(np.array(key).reshape(k, k))
            group = _closure(lin, k)
    return chosen


def sl8():
    om = np.block([[Z4, I4], [-I4, Z4]])
    sg = np.block([[I4, Z4], [Z4, -I4]])
    sw = np.block([[Z2, I2], [I2, Z2]])
    e1, e2 = sl8_torus_generators()
    weyl = [bd(d2(AL, I2), d2(AL, I2)), bd(d2(J, I2), d2(-J, I2)), bd(d2(I2, AL), d2(I2, AL)),
            bd(d2(I2, J), d2(I2, -J)), bd(sw, sw)]
    hp = np.pi / 2
    edge1 = off_skew(d2(J, Z2))
    edge2 = off_sym(d2(Z2, AL))
    fibers = {
        (hp / 2, hp / 2): [off_skew(np.block([[Z2, AL], [-AL, Z2]]))],
        (0.0, hp / 2): [edge1],
        (hp / 2, hp): [edge2],
        (0.0, 0.0): [edge1, off_skew(d2(Z2, J))],
        (hp, hp): [off_sym(np.block([[Z2, AL], [Z2, Z2]])), off_sym(np.block([[Z2, Z2], [AL, Z2]]))],
        (0.0, hp): [edge1, edge2],
    }
    fib = []
    for at, ts in fibers.items():
        cands = generators_of(isotropy_candidates(point(*at), ts))
        fib.append({"at": list(at), "t_basis": [m(t) for t in ts], "candidates": [m(c) for c in cands]})
    rep = bd(np.diag([-1.0, 1, 1, 1]), np.diag([-1.0, 1, 1, 1]))
    return {
        "schema": "dcoset-config/1",
        "name": "sl8",
        "group": {
            "n": 8,
            "algebra_basis": {"standard": "sl_n_real"},
            "membership": ["det1", "real"],
            "assume_G_eq_HG0K": True,
            "sigma": inv(sg),
            "theta": inv(om, True, False),
            "delta": inv(np.eye(8), True, True),
            "phi": inv(np.eye(8), False, True),
        },
        "candidates": {
            "component_reps": [m(rep)],
            "weyl": [m(w) for w in weyl],
            "complex_weyl": [],
            "A0": [m(e1), m(e2)],
            "domain": {"periodic": False, "lower": [0.0, 0.0], "upper": [hp, hp],
                       "inequalities": [{"a": [1.0, -1.0], "b": 0.0}]},
            "fibers": fib,
        },
        "numeric": {"grid_n": 64, "seed": 0},
    }


def dump(data) -> str:
    """Indented JSON with each matrix kept on a single line."""
    mats = []

    def walk(x):
        if isinstance(x, dict):
            return {k: walk(v) for k, v in x.items()}
        if (isinstance(x, list) and x and isinstance(x[0], list) and x[0] and isinstance(x[0][0], list)
                and isinstance(x[0][0][0], float)):
            mats.append(json.dumps(x))
            return f"@@{len(mats) - 1}@@"
        if isinstance(x, list):
            return [walk(v) for v in x]
        return x

    text = json.dumps(walk(data), indent=2)
    for i, s in enumerate(mats):
        text = text.replace(f'"@@{i}@@"', s)
    return text + "\n"


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, fn in (("sl2", sl2), ("sl8", sl8)):
        (OUT / f"{name}.json").write_text(dump(fn()))
        print("wrote", OUT / f"{name}.json")
