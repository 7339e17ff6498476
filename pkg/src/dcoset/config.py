"""JSON configuration: parsing, schema checks and canonical serialisation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .matrix import MAX_N, Tol, sl_real_basis
from .symmetric import CONSTRAINT_TAGS, GroupSpec, InvolutionSpec
from .tori import Domain, FiberHint, TorusChart

SCHEMA = "dcoset-config/1"

_TOP = {"schema", "name", "group", "candidates", "numeric"}
_GROUP = {"n", "algebra_basis", "membership", "assume_G_eq_HG0K", "sigma", "theta", "delta", "phi"}
_INV = {"J", "inverse_transpose", "conjugate"}
_CAND = {"component_reps", "weyl", "complex_weyl", "A0", "domain", "fibers"}
_DOMAIN = {"periodic", "lower", "upper", "inequalities"}
_FIBER = {"at", "t_basis", "candidates"}
_NUMERIC = {"tol_eq", "tol_rank", "mu_tol", "grid_n", "refine_levels", "seed", "max_iters", "fd_step",
            "max_group_order", "threads"}

NUMERIC_DEFAULTS = {
    "tol_eq": 1e-9,
    "tol_rank": 1e-7,
    "mu_tol": 1e-7,
    "grid_n": 64,
    "refine_levels": 4,
    "seed": 0,
    "max_iters": 10000,
    "fd_step": 1e-6,
    "max_group_order": 1024,
    "threads": 0,
}


@dataclass
class Config:
    name: str
    group: GroupSpec
    weyl: list = field(default_factory=list)
    complex_weyl: list = field(default_factory=list)
    a0: TorusChart | None = None
    domain: Domain | None = None
    fibers: list = field(default_factory=list)
    numeric: dict = field(default_factory=lambda: dict(NUMERIC_DEFAULTS))
    digest: str = ""

    def tol(self) -> Tol:
        return Tol(self.numeric["tol_eq"], self.numeric["tol_rank"], self.numeric["mu_tol"])


# -- matrices -----------------------------------------------------------------


def _entry(v, where):
    if isinstance(v, bool):
        raise ValidationError(f"{where}: boolean is not a matrix entry")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: entries must be [re, im] pairs or real numbers")


def parse_matrix(obj, where: str, n: int | None = None) -> np.ndarray:
    """Row-major nested list of [re, im] pairs (plain reals also accepted)."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValidationError(f"{where}: expected a list of rows")
    if any(len(r) != len(obj) for r in obj):
        raise ValidationError(f"{where}: matrix is not square")
    m = np.array([[_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(obj)],
                 dtype=complex)
    if n is not None and m.shape != (n, n):
        raise ValidationError(f"{where}: expected {n}x{n}, got {m.shape[0]}x{m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{where}: non-finite entry")
    return m


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrices(obj, where, n) -> list:
    if not isinstance(obj, list):
        raise ValidationError(f"{where}: expected a list of matrices")
    return [parse_matrix(m, f"{where}[{i}]", n) for i, m in enumerate(obj)]


# -- schema -------------------------------------------------------------------


def _keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SchemaError(f"{where}: unknown key(s) {', '.join(extra)}")
    for k in required:
        if k not in obj:
            raise SchemaError(f"{where}: missing required block '{k}'")


def _involution(obj, name, n) -> InvolutionSpec:
    where = f"group.{name}"
    _keys(obj, _INV, where, ("J",))
    J = parse_matrix(obj["J"], f"{where}.J", n)
    if abs(np.linalg.det(J)) < 1e-12:
        raise ValidationError(f"{where}.J is singular")
    flags = {}
    for k in ("inverse_transpose", "conjugate"):
        v = obj.get(k, False)
        if not isinstance(v, bool):
            raise ValidationError(f"{where}.{k}: expected true/false")
        flags[k] = v
    return InvolutionSpec(J, flags["inverse_transpose"], flags["conjugate"])


def _group(obj, name) -> GroupSpec:
    _keys(obj, _GROUP, "group", ("n", "algebra_basis", "sigma", "theta", "delta", "phi"))
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_N:
        raise ValidationError(f"group.n: expected an integer in [1, {MAX_N}]")
    basis = obj["algebra_basis"]
    if isinstance(basis, dict):
        if basis != {"standard": "sl_n_real"}:
            raise ValidationError('group.algebra_basis: only {"standard": "sl_n_real"} is recognised')
        basis = sl_real_basis(n)
    else:
        basis = _matrices(basis, "group.algebra_basis", n)
    membership = obj.get("membership", ["det1", "real"])
    if not isinstance(membership, list) or any(t not in CONSTRAINT_TAGS for t in membership):
        raise ValidationError(f"group.membership: tags must be among {CONSTRAINT_TAGS}")
    flag = obj.get("assume_G_eq_HG0K", True)
    if not isinstance(flag, bool):
        raise ValidationError("group.assume_G_eq_HG0K: expected true/false")
    invs = {k: _involution(obj[k], k, n) for k in ("sigma", "theta", "delta", "phi")}
    return GroupSpec(n, basis, invs["sigma"], invs["theta"], invs["delta"], invs["phi"],
                     tuple(membership), (), flag, name)


def _floats(v, where, length=None):
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise ValidationError(f"{where}: expected a list of numbers")
    if length is not None and len(v) != length:
        raise ValidationError(f"{where}: expected {length} numbers")
    return np.array(v, dtype=float)


def _domain(obj, r) -> Domain:
    _keys(obj, _DOMAIN, "candidates.domain")
    if obj.get("periodic", False):
        return Domain.torus(r)
    lo = _floats(obj.get("lower", [0.0] * r), "candidates.domain.lower", r)
    hi = _floats(obj.get("upper", [2 * np.pi] * r), "candidates.domain.upper", r)
    rows, rhs = [], []
    for i, q in enumerate(obj.get("inequalities", [])):
        _keys(q, {"a", "b"}, f"candidates.domain.inequalities[{i}]", ("a", "b"))
        rows.append(_floats(q["a"], f"candidates.domain.inequalities[{i}].a", r))
        rhs.append(float(q["b"]))
    return Domain(lo, hi, np.array(rows).reshape(-1, r), np.array(rhs), False)


def _numeric(obj) -> dict:
    _keys(obj, _NUMERIC, "numeric")
    out = dict(NUMERIC_DEFAULTS)
    for k, v in obj.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"numeric.{k}: expected a number")
        out[k] = type(NUMERIC_DEFAULTS[k])(v)
    try:
        Tol(out["tol_eq"], out["tol_rank"], out["mu_tol"])
    except ValueError as exc:
        raise ValidationError(f"numeric: {exc}") from exc
    if out["grid_n"] < 2 or out["max_iters"] < 1 or out["max_group_order"] < 1:
        raise ValidationError("numeric: grid_n >= 2, max_iters >= 1 and max_group_order >= 1 required")
    return out


def config_from_dict(data: dict, digest: str = "") -> Config:
    _keys(data, _TOP, "config", ("group",))
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise SchemaError(f"config: unsupported schema {schema!r} (expected {SCHEMA!r})")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("name: expected a string")
    spec = _group(data["group"], name)
    n = spec.n
    cand = data.get("candidates", {})
    _keys(cand, _CAND, "candidates")
    spec.component_reps = tuple(_matrices(cand.get("component_reps", []), "candidates.component_reps", n))
    cfg = Config(name, spec)
    cfg.weyl = _matrices(cand.get("weyl", []), "candidates.weyl", n)
    cfg.complex_weyl = _matrices(cand.get("complex_weyl", []), "candidates.complex_weyl", n)
    if "A0" in cand:
        gens = _matrices(cand["A0"], "candidates.A0", n)
        cfg.a0 = TorusChart(gens, ["compact"] * len(gens), np.eye(n))
    r = cfg.a0.dim if cfg.a0 else 0
    if "domain" in cand:
        if cfg.a0 is None:
            raise SchemaError("candidates.domain requires candidates.A0")
        cfg.domain = _domain(cand["domain"], r)
    for i, f in enumerate(cand.get("fibers", [])):
        where = f"candidates.fibers[{i}]"
        _keys(f, _FIBER, where, ("at",))
        cfg.fibers.append(FiberHint(
            _floats(f["at"], f"{where}.at", r),
            _matrices(f.get("t_basis", []), f"{where}.t_basis", n),
            _matrices(f.get("candidates", []), f"{where}.candidates", n),
        ))
    cfg.numeric = _numeric(data.get("numeric", {}))
    cfg.digest = digest
    return cfg


def parse_config_text(text: str) -> Config:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}\n    {line.strip()}") from exc
    digest = "sha256:" + hashlib.sha256(text.encode()).hexdigest()
    return config_from_dict(data, digest)


def parse_config(path) -> Config:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}") from exc
    return parse_config_text(text)


def fixture_text(name: str) -> str:
    """Text of a bundled fixture (``sl2`` or ``sl8``)."""
    if name not in ("sl2", "sl8"):
        raise ValueError(f"unknown fixture {name!r}")
    return resources.files("dcoset.fixtures").joinpath(f"{name}.json").read_text()


def load_fixture(name: str) -> Config:
    return parse_config_text(fixture_text(name))
