"""Deterministic JSON reports (floats with 17 significant digits)."""

from __future__ import annotations

import json
import math

import numpy as np

from . import __version__

REPORT_SCHEMA = "dcoset-report/1"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    """Plain Python structure (complex -> [re, im], arrays -> lists)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialise with sorted keys and 17-significant-digit floats."""

    def enc(x, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(x, dict):
            if not x:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(x[k], level + 1)}" for k in sorted(x)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(x, list):
            if not x:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in x) or _is_matrix_row(x):
                return "[" + ", ".join(enc(v, level + 1) for v in x) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in x) + "\n" + end + "]"
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, int):
            return str(x)
        if isinstance(x, float):
            return _float(x)
        if x is None:
            return "null"
        return json.dumps(x)

    return enc(to_jsonable(obj), 0) + "\n"


def _is_matrix_row(x) -> bool:
    return all(isinstance(v, list) and len(v) == 2 and all(isinstance(p, float) for p in v) for v in x)


def loads(text: str):
    return json.loads(text)


def make_report(command: str, digest: str, settings: dict, payload: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool": "dcoset",
        "version": __version__,
        "config_digest": digest,
        "command": command,
        "settings": settings,
        "payload": payload,
    }
