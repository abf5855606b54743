"""JSON schemas for spaces, cone metrics, self maps and point sets (schema 1)."""

from __future__ import annotations

import json
import math
from typing import Callable, Optional

import numpy as np

from .cone import Generators, Halfspaces, NormSpec, Orthant, OrderedVectorSpace, SecondOrder
from .metrics import ConeMetric, cone_metric_from_dict

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text


def _require_keys(obj: dict, allowed, where: str, required=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")


def _check_schema(obj: dict, where: str):
    if obj.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"{where}: unsupported schema {obj.get('schema')!r}")


def _exponent(p) -> float:
    if isinstance(p, str) and p.lower() in ("inf", "infinity"):
        return math.inf
    if p is None:
        return math.inf
    return float(p)


def norm_from_dict(obj: dict) -> NormSpec:
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "lp":
        _require_keys(obj, ("type", "p"), "norm", ("p",))
        return NormSpec(_exponent(obj["p"]))
    if kind == "weighted-lp":
        _require_keys(obj, ("type", "p", "weights"), "norm", ("p", "weights"))
        return NormSpec(_exponent(obj["p"]), tuple(obj["weights"]))
    raise ConfigError(f"norm: unknown type {kind!r}")


def norm_to_dict(norm: NormSpec) -> dict:
    p = "inf" if math.isinf(norm.p) else norm.p
    if norm.weights is None:
        return {"type": "lp", "p": p}
    return {"type": "weighted-lp", "p": p, "weights": list(norm.weights)}


def space_from_dict(obj: dict, tolerance: Optional[float] = None) -> OrderedVectorSpace:
    """Parse and validate a space description; raises ``ConfigError``."""
    _require_keys(obj, ("schema", "dim", "norm", "cone", "tolerance"), "space", ("dim", "cone"))
    _check_schema(obj, "space")
    dim = int(obj["dim"])
    cone_obj = obj["cone"]
    kind = cone_obj.get("type") if isinstance(cone_obj, dict) else None
    try:
        if kind == "orthant":
            _require_keys(cone_obj, ("type",), "cone")
            cone = Orthant(dim)
        elif kind == "second-order":
            _require_keys(cone_obj, ("type",), "cone")
            cone = SecondOrder(dim)
        elif kind == "generators":
            _require_keys(cone_obj, ("type", "G"), "cone", ("G",))
            cone = Generators(cone_obj["G"])
        elif kind == "halfspaces":
            _require_keys(cone_obj, ("type", "A"), "cone", ("A",))
            cone = Halfspaces(cone_obj["A"])
        else:
            raise ConfigError(f"cone: unknown type {kind!r}")
        if cone.dim != dim:
            raise ConfigError(f"cone dimension {cone.dim} does not match dim {dim}")
        norm = norm_from_dict(obj.get("norm", {"type": "lp", "p": 2}))
        tol = obj.get("tolerance", 1e-9) if tolerance is None else tolerance
        return OrderedVectorSpace(cone, norm, float(tol))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"space: {exc}") from exc


def space_to_dict(space: OrderedVectorSpace) -> dict:
    return {"schema": SCHEMA_VERSION, "dim": space.dim, "norm": norm_to_dict(space.norm),
            "cone": space.cone.to_dict(), "tolerance": space.tolerance}


_METRIC_KEYS = {
    "discrete": ("a",),
    "product": ("a", "b", "d1_scale", "d2_scale"),
    "lq": ("b", "q", "N"),
    "table": ("points", "entries"),
}


def cone_metric_from_dict_checked(obj: dict, space: Optional[OrderedVectorSpace]) -> ConeMetric:
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind not in _METRIC_KEYS:
        raise ConfigError(f"cone metric: unknown kind {kind!r}")
    _require_keys(obj, ("schema", "kind") + _METRIC_KEYS[kind], "cone metric")
    _check_schema(obj, "cone metric")
    if kind == "table":
        for e in obj.get("entries", []):
            _require_keys(e, ("x", "y", "D"), "cone metric entry", ("x", "y", "D"))
    try:
        return cone_metric_from_dict(obj, space)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"cone metric: {exc}") from exc


def cone_metric_to_dict(cm: ConeMetric) -> dict:
    return {"schema": SCHEMA_VERSION, **cm.to_dict()}


def map_from_dict(obj: dict, labels=None) -> Callable:
    """Self map from ``{"kind": "identity" | "table" | "affine", ...}``."""
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind == "identity":
        _require_keys(obj, ("schema", "kind"), "map")
        return lambda x: x
    if kind == "table":
        _require_keys(obj, ("schema", "kind", "map"), "map", ("map",))
        by_name = {str(lab): lab for lab in (labels or [])}
        table = {}
        for k, v in obj["map"].items():
            src = by_name.get(str(k), k)
            table[src] = by_name.get(str(v), v)

        def T(x):
            if x not in table:
                _missing(x)
            return table[x]

        return T
    if kind == "affine":
        _require_keys(obj, ("schema", "kind", "A", "b"), "map", ("A",))
        A = np.asarray(obj["A"], dtype=float)
        b = np.asarray(obj.get("b", 0.0), dtype=float)
        if A.ndim == 0:
            if b.ndim == 0:
                return lambda x: float(A) * float(x) + float(b)
            return lambda x: float(A) * np.asarray(x, dtype=float) + b
        return lambda x: A @ np.asarray(x, dtype=float) + b
    raise ConfigError(f"map: unknown kind {kind!r}")


def _missing(x):
    raise ConfigError(f"map: no image for point {x!r}")


def points_from_dict(obj: dict) -> tuple:
    """Returns ``(labels, points)``; labels default to the points' text."""
    _require_keys(obj, ("schema", "points", "labels", "metric", "pairs"), "points")
    _check_schema(obj, "points")
    pts = obj.get("points")
    if pts is None:
        raise ConfigError("points: missing 'points'")
    pts = [np.asarray(p, dtype=float) if isinstance(p, list) else p for p in pts]
    labels = obj.get("labels")
    if labels is None:
        labels = [format_point(p) for p in pts]
    if len(labels) != len(pts):
        raise ConfigError("points: labels and points differ in length")
    return list(labels), pts


def format_point(p) -> str:
    if isinstance(p, np.ndarray):
        return "(" + " ".join(format(float(v), ".12g") for v in p) + ")"
    if isinstance(p, float):
        return format(p, ".12g")
    return str(p)
