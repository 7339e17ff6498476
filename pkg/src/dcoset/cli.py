"""Command line entry point: ``dcoset <command> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import Config, fixture_text, load_fixture, parse_config, parse_matrix
from .cosets import is_principal, make_point, point_residuals, transversal
from .errors import ConfigError, DCosetError, InvalidSetup, MembershipViolation, NumericError
from .golden import GOLDEN, sl2_coords
from .kempf_ness import (
    FlowOptions,
    gradient_flow,
    in_kempf_ness,
    is_orbit_closed,
    kempf_ness_residuals,
    mu,
)
from .report import dumps, make_report
from .symmetric import validate_setup
from .tori import QuotientAtlas, build_atlas, same_partition, weyl_generate, weyl_strata

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("validate", "member", "flow", "closed", "slice", "atlas", "example")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dcoset", description="Double coset spaces: Kempf-Ness sets, flows and torus atlases.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("arg", nargs="?", help="matrix (JSON or @file) or fixture name for 'example'")
    p.add_argument("--config", help="JSON configuration file, or 'sl2' / 'sl8' for a bundled fixture")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--check", action="store_true", help="run the golden suite ('example' only)")
    p.add_argument("--tol-eq", type=float)
    p.add_argument("--tol-rank", type=float)
    p.add_argument("--mu-tol", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--max-group-order", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--fd-step", type=float)
    return p


_FLAG_KEYS = {
    "tol_eq": "tol_eq",
    "tol_rank": "tol_rank",
    "mu_tol": "mu_tol",
    "grid": "grid_n",
    "seed": "seed",
    "max_iters": "max_iters",
    "max_group_order": "max_group_order",
    "threads": "threads",
    "fd_step": "fd_step",
}


def _apply_flags(cfg: Config, ns) -> None:
    for flag, key in _FLAG_KEYS.items():
        v = getattr(ns, flag)
        if v is not None:
            cfg.numeric[key] = v
    try:
        cfg.tol()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.numeric["grid_n"] < 2 or cfg.numeric["max_iters"] < 1:
        raise UsageError("--grid must be >= 2 and --max-iters >= 1")


def _settings(cfg: Config) -> dict:
    # threads is left out: output must not depend on it
    return {k: v for k, v in sorted(cfg.numeric.items()) if k != "threads"}


def _threads(cfg: Config) -> int:
    t = cfg.numeric["threads"]
    return t if t and t > 0 else (os.cpu_count() or 1)


def _read_matrix(arg: str | None, n: int) -> np.ndarray:
    if not arg:
        raise UsageError("this command needs a matrix argument")
    text = Path(arg[1:]).read_text() if arg.startswith("@") else arg
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"matrix argument is not JSON: {exc.msg}") from exc
    return parse_matrix(obj, "matrix", n)


def _flow_opts(cfg: Config) -> FlowOptions:
    return FlowOptions(max_iters=cfg.numeric["max_iters"], mu_tol=cfg.numeric["mu_tol"],
                       fd_step=cfg.numeric["fd_step"])


# -- payloads -------------------------------------------------------------------


def cmd_validate(cfg, setup, ns):
    payload = {"validation": setup.report.to_dict()}
    if setup.decomposition is not None:
        payload["dimensions"] = setup.decomposition.dims()
    return payload, EXIT_OK if setup.report.ok else EXIT_CHECK


def cmd_member(cfg, setup, ns):
    m = _read_matrix(ns.arg, setup.n)
    pt = make_point(setup, m, check=False)
    res = point_residuals(setup, pt.mat, pt.u, pt.Y)
    mv = mu(setup, pt)
    return {
        "in_X": max(res.values()) <= 1e3 * setup.tol.eq,
        "point_residuals": res,
        "mu": mv.coords,
        "mu_norm": math.sqrt(mv.norm_sq),
        "in_kempf_ness": in_kempf_ness(setup, pt),
        "kempf_ness_residuals": kempf_ness_residuals(setup, pt),
    }, EXIT_OK


def _point_payload(setup, mat) -> dict:
    out = {"matrix": mat}
    if setup.n == 2:
        out["xyz"] = list(sl2_coords(mat))
    return out


def cmd_flow(cfg, setup, ns):
    pt = make_point(setup, _read_matrix(ns.arg, setup.n))
    tr = gradient_flow(setup, pt, _flow_opts(cfg))
    return {
        "trace": tr.summary(),
        "limit": _point_payload(setup, tr.final.mat),
        "mu_norm_history": [math.sqrt(f) for _, f, _ in tr.iterates],
    }, EXIT_OK


def cmd_closed(cfg, setup, ns):
    pt = make_point(setup, _read_matrix(ns.arg, setup.n))
    res = is_orbit_closed(setup, pt, _flow_opts(cfg))
    return {
        "closed": res.closed,
        "reason": res.reason,
        "orbit_dim": res.orbit_dim,
        "degeneracy": res.degeneracy,
        "iterations": res.trace.n_iters,
        "representative": _point_payload(setup, res.representative.mat),
    }, EXIT_OK


def cmd_slice(cfg, setup, ns):
    pt = make_point(setup, _read_matrix(ns.arg, setup.n))
    tv = transversal(setup, pt)
    pr = is_principal(setup, pt, tv)
    return {
        "slice_dim": tv.slice_dim,
        "isotropy_dim": tv.isotropy_dim,
        "fixed_algebra_dim": len(tv.fixed_algebra_basis),
        "slice_noncompact_dim": len(tv.slice_noncompact),
        "slice_compact_dim": len(tv.slice_compact),
        "weights": [{"generator": w["generator"], "weights": w["weights"]} for w in pr.weights],
        "principal": pr.principal,
        "algebra_level_only": pr.algebra_level_only,
        "in_kempf_ness": in_kempf_ness(setup, pt),
    }, EXIT_OK


def atlas_payload(setup, atlas: QuotientAtlas, cfg: Config) -> dict:
    out = {
        "quotient_dim": atlas.quotient_dim,
        "A0": {"generators": atlas.A0.generators, "kinds": atlas.A0.kinds},
        "domain": atlas.domain.to_dict(),
        "weyl": atlas.weyl.to_dict(),
        "strata": [s.to_dict() for s in atlas.strata],
        "minimal_tori": [t.to_dict(lambda m: m) for t in atlas.minimal_tori],
        "coverage": {str(k): v for k, v in sorted(atlas.coverage.items())},
        "diagnostics": atlas.diagnostics,
    }
    if cfg.complex_weyl:
        wc = weyl_generate(setup, cfg.complex_weyl, atlas.A0, cfg.numeric["max_group_order"], complex_ok=True)
        ws = weyl_strata(setup, atlas.A0, wc, cfg.numeric["grid_n"], atlas.domain)
        out["complexified"] = {
            "weyl": wc.to_dict(),
            "n_strata": len(ws),
            "equals_isotropy_strata": same_partition(atlas.strata, ws),
        }
    if setup.n == 2:
        out["kempf_ness_point_cloud"] = sl2_point_cloud(atlas)
    return out


def sl2_point_cloud(atlas: QuotientAtlas, n_angle: int = 64, n_ray: int = 21, t_max: float = 2.0) -> list:
    """(x, y, z) samples of the minimal tori (these cover the Kempf-Ness set)."""
    pts = []
    for t in atlas.minimal_tori:
        ch = t.chart
        if ch.kinds == ["compact"]:
            coords = [[2 * math.pi * k / n_angle] for k in range(n_angle)]
        elif ch.kinds == ["split"]:
            coords = [[t_max * (2 * k / (n_ray - 1) - 1)] for k in range(n_ray)]
        else:
            continue
        pts.extend(list(sl2_coords(ch.point(c))) for c in coords)
    return pts


def cmd_atlas(cfg, setup, ns):
    if cfg.a0 is None:
        raise UsageError("atlas needs candidates.A0 in the configuration")
    atlas = build_atlas(setup, cfg.a0, cfg.weyl, cfg.domain, cfg.fibers, cfg.numeric["grid_n"],
                        cfg.numeric["refine_levels"], cfg.numeric["max_group_order"], cfg.numeric["seed"],
                        _threads(cfg))
    return atlas_payload(setup, atlas, cfg), EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "member": cmd_member,
    "flow": cmd_flow,
    "closed": cmd_closed,
    "slice": cmd_slice,
    "atlas": cmd_atlas,
}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run_example(ns) -> int:
    name = ns.arg
    if name not in GOLDEN:
        raise UsageError("example needs 'sl2' or 'sl8'")
    if not ns.check:
        _emit(fixture_text(name), ns.out)
        return EXIT_OK
    cfg = load_fixture(name)
    _apply_flags(cfg, ns)
    kw = {"threads": _threads(cfg)} if name == "sl8" else {}
    checks = GOLDEN[name](cfg, cfg.numeric["seed"], **kw)
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{name}: {len(checks) - failed}/{len(checks)} checks passed")
    _emit("\n".join(lines) + "\n", ns.out)
    return EXIT_OK if failed == 0 else EXIT_CHECK


def run(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command == "example":
            return run_example(ns)
        if not ns.config:
            raise UsageError("--config is required (or use 'example sl2|sl8')")
        if ns.config in GOLDEN and not Path(ns.config).exists():
            cfg = load_fixture(ns.config)
        else:
            cfg = parse_config(ns.config)
        _apply_flags(cfg, ns)
        setup, report = validate_setup(cfg.group, cfg.tol(), cfg.numeric["seed"], raise_on_fail=False)
        if not report.ok and ns.command != "validate":
            raise InvalidSetup(f"setup check '{report.first_failure().name}' failed", report)
        payload, code = HANDLERS[ns.command](cfg, setup, ns)
        _emit(dumps(make_report(ns.command, cfg.digest, _settings(cfg), payload)), ns.out)
        return code
    except UsageError as exc:
        print(f"dcoset: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"dcoset: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidSetup, MembershipViolation) as exc:
        print(f"dcoset: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"dcoset: numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DCosetError as exc:
        print(f"dcoset: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK


def main() -> None:  # pragma: no cover - console script
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
