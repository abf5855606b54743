"""Command-line front end: ``conemetric {metrize,check,transfer,fixpoint,examples}``.

Exit codes: 0 success, 1 check/transfer violations, 2 invalid input,
3 metrization error bound above ``--max-error``, 4 fixed-point iteration
did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cone import validate_cone
from .fixpoint import banach_iterate
from .metrics import FiniteTableConeMetric, GeometricLqConeMetric, validate_cone_metric
from .metrize import EquivalentMetric, check_metric_axioms, distance_matrix, write_distance_csv
from .serialize import (
    ConfigError,
    cone_metric_from_dict_checked,
    cone_metric_to_dict,
    dump_json,
    format_point,
    load_json,
    map_from_dict,
    points_from_dict,
    space_from_dict,
    space_to_dict,
)
from .transfer import check_corollary, parse_condition

EXIT_OK, EXIT_VIOLATION, EXIT_INVALID, EXIT_ERROR_BOUND, EXIT_NO_CONVERGENCE = 0, 1, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    inputs: list
    seed: int
    outputs: list = field(default_factory=list)
    tool_version: str = __version__

    def to_dict(self):
        return {"schema": 1, **asdict(self)}


class _Output:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def info(self, msg: str):
        if not self.quiet:
            print(msg)

    def error(self, msg: str):
        print(f"error: {msg}", file=sys.stderr)


def _write_manifest(manifest: RunManifest, path):
    if path:
        dump_json(manifest.to_dict(), path)


def _load_space(path, args):
    return space_from_dict(load_json(path), tolerance=args.tolerance)


def _load_metric(obj_or_path, space):
    obj = load_json(obj_or_path) if isinstance(obj_or_path, (str, os.PathLike)) else obj_or_path
    return cone_metric_from_dict_checked(obj, space)


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_metrize(args, out: _Output) -> int:
    space = _load_space(args.space, args)
    doc = load_json(args.input)
    metric_obj = load_json(args.metric) if args.metric else doc.get("metric")
    if metric_obj is None:
        raise ConfigError(f"{args.input}: no cone metric given (use --metric or a 'metric' key)")
    cm = _load_metric(metric_obj, space)
    inputs = [args.space, args.input] + ([args.metric] if args.metric else [])
    manifest = RunManifest("metrize", inputs, args.seed, [args.out, args.out + ".meta.json"])
    meta = {"schema": 1, "entries": []}
    worst = 0.0
    if "pairs" in doc:
        pairs = doc["pairs"]
        if not pairs:
            raise ConfigError(f"{args.input}: empty pairs list")
        metric = EquivalentMetric(cm)
        with open(args.out, "w", newline="") as fh:
            fh.write("x,y,d\n")
            for x, y in pairs:
                x = np.asarray(x, dtype=float) if isinstance(x, list) else x
                y = np.asarray(y, dtype=float) if isinstance(y, list) else y
                r = metric.result(x, y)
                worst = max(worst, r.error_bound)
                fh.write(f"{format_point(x)},{format_point(y)},{_fmt(r.value)}\n")
                meta["entries"].append({"x": format_point(x), "y": format_point(y),
                                        "method": r.method, "error_bound": r.error_bound})
    else:
        labels, points = points_from_dict(doc)
        if not points:
            raise ConfigError(f"{args.input}: empty points list")
        mat, results = distance_matrix(cm, None, points, details=True)
        write_distance_csv(args.out, labels, mat)
        for i, j in ((i, j) for i in range(len(points)) for j in range(i + 1, len(points))):
            r = results[i][j]
            worst = max(worst, r.error_bound)
            meta["entries"].append({"x": labels[i], "y": labels[j], "method": r.method,
                                    "error_bound": r.error_bound})
    meta["max_error_bound"] = worst
    dump_json(meta, args.out + ".meta.json")
    _write_manifest(manifest, args.manifest or args.out + ".manifest.json")
    out.info(f"wrote {args.out}")
    if worst > args.max_error:
        out.error(f"error bound {worst:.3e} exceeds --max-error {args.max_error:.3e}")
        return EXIT_ERROR_BOUND
    return EXIT_OK


def _check_points(args, cm):
    if args.points:
        _, pts = points_from_dict(load_json(args.points))
        return pts
    if isinstance(cm, FiniteTableConeMetric):
        return cm.labels
    raise ConfigError("--points is required for cone metrics that are not tables")


def cmd_check(args, out: _Output) -> int:
    space = _load_space(args.space, args)
    manifest = RunManifest("check", [args.space, args.conemetric] + ([args.points] if args.points else []),
                           args.seed)
    report = {"schema": 1, "cone": {"ok": True, "failures": []}}
    cone_rep = validate_cone(space.cone, space.tolerance)
    report["cone"] = {"ok": cone_rep.ok, "failures": cone_rep.failures}
    cm = _load_metric(args.conemetric, space)
    points = _check_points(args, cm)
    cm_rep = validate_cone_metric(cm, points)
    report["cone_metric"] = {
        "ok": cm_rep.ok,
        "triples_checked": cm_rep.triples_checked,
        "nonnegativity_failures": len(cm_rep.nonnegativity_failures),
        "identity_failures": len(cm_rep.identity_failures),
        "symmetry_failures": len(cm_rep.symmetry_failures),
        "triangle_failures": len(cm_rep.triangle_failures),
    }
    first = cm_rep.first_violation
    if first is not None:
        report["cone_metric"]["first_violation"] = {"axiom": first[0],
                                                    "points": [format_point(p) for p in first[1]]}
    ax = check_metric_axioms(EquivalentMetric(cm), points, tol=1e-8)
    report["metric"] = {
        "ok": ax.ok,
        "max_identity_violation": ax.max_identity_violation,
        "max_symmetry_violation": ax.max_symmetry_violation,
        "max_triangle_violation": ax.max_triangle_violation,
        "triples_checked": ax.triples_checked,
    }
    if ax.worst_triple is not None:
        report["metric"]["worst_triple"] = [format_point(p) for p in ax.worst_triple]
    report["manifest"] = manifest.to_dict()
    _write_manifest(manifest, args.manifest)
    out.info(dump_json(report).rstrip())
    if first is not None:
        out.error(f"cone metric axiom '{first[0]}' fails at {[format_point(p) for p in first[1]]}")
    return EXIT_OK if cm_rep.ok and ax.ok else EXIT_VIOLATION


def _domain_points(cm, count, seed):
    if isinstance(cm, FiniteTableConeMetric):
        return cm.labels
    rng = np.random.default_rng(seed)
    if isinstance(cm, GeometricLqConeMetric) or not hasattr(cm, "a") or np.ndim(getattr(cm, "a")) == 0:
        return [float(v) for v in rng.uniform(-1, 1, count)]
    return [rng.uniform(-1, 1, cm.space.dim) for _ in range(count)]


def cmd_transfer(args, out: _Output) -> int:
    space = _load_space(args.space, args)
    cm = _load_metric(args.conemetric, space)
    cond_obj = load_json(args.condition)
    dstar = None
    inputs = [args.condition, args.space, args.conemetric, args.map]
    if isinstance(cond_obj, dict) and cond_obj.get("kind") == "dominance":
        if args.dstar:
            dstar = _load_metric(args.dstar, space)
            inputs.append(args.dstar)
        elif "dstar" in cond_obj:
            dstar = _load_metric(cond_obj["dstar"], space)
        else:
            dstar = cm
    try:
        cond = parse_condition(cond_obj, dstar)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"condition: {exc}") from exc
    labels = cm.labels if isinstance(cm, FiniteTableConeMetric) else None
    T = map_from_dict(load_json(args.map), labels)
    points = _domain_points(cm, args.samples, args.seed)
    try:
        rep = check_corollary(cond, cm, T, points, max_pairs=args.samples * args.samples, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    outputs = [args.out] if args.out else []
    manifest = RunManifest("transfer", inputs, args.seed, outputs)
    doc = rep.to_dict()
    doc["condition"] = cond.to_dict()
    if args.out:
        dump_json(doc, args.out)
        _write_manifest(manifest, args.manifest or args.out + ".manifest.json")
    else:
        _write_manifest(manifest, args.manifest)
        out.info(dump_json(doc).rstrip())
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def _parse_point(text, cm):
    if isinstance(cm, FiniteTableConeMetric):
        for lab in cm.labels:
            if str(lab) == text:
                return lab
        raise ConfigError(f"--x0 {text!r} is not a point label")
    try:
        val = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--x0: {exc.msg}") from exc
    return np.asarray(val, dtype=float) if isinstance(val, list) else float(val)


def cmd_fixpoint(args, out: _Output) -> int:
    space = _load_space(args.space, args)
    cm = _load_metric(args.conemetric, space)
    labels = cm.labels if isinstance(cm, FiniteTableConeMetric) else None
    T = map_from_dict(load_json(args.map), labels)
    x0 = _parse_point(args.x0, cm)
    try:
        trace = banach_iterate(cm, T, x0, tol=args.tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = trace.to_dict()
    outputs = [args.out] if args.out else []
    manifest = RunManifest("fixpoint", [args.space, args.conemetric, args.map], args.seed, outputs)
    if args.out:
        dump_json(doc, args.out)
        _write_manifest(manifest, args.manifest or args.out + ".manifest.json")
    else:
        _write_manifest(manifest, args.manifest)
    out.info(f"iterations={len(trace.distances)} converged={trace.converged} "
             f"diverged={trace.diverged} residual={_fmt(trace.residual)} rate={trace.estimated_rate:.6g}")
    return EXIT_OK if trace.converged else EXIT_NO_CONVERGENCE


def _params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = float(v)
    return out


def cmd_examples(args, out: _Output) -> int:
    p = _params(args.param)
    name = args.name
    if name == "discrete":
        dim = int(p.get("dim", 2))
        a = [1.0 / math.sqrt(dim)] * dim
        space_doc = {"schema": 1, "dim": dim, "norm": {"type": "lp", "p": 2}, "cone": {"type": "orthant"}}
        metric_doc = {"schema": 1, "kind": "discrete", "a": a}
        pts = [[float(i)] * dim for i in range(3)]
        points_doc = {"schema": 1, "points": pts}
        spot = [(np.asarray(pts[0]), np.asarray(pts[1])), (np.asarray(pts[0]), np.asarray(pts[0]))]
    elif name == "product":
        alpha = p.get("alpha", 1.0)
        space_doc = {"schema": 1, "dim": 2, "norm": {"type": "lp", "p": 2}, "cone": {"type": "orthant"}}
        metric_doc = {"schema": 1, "kind": "product", "a": 1.0, "b": alpha}
        points_doc = {"schema": 1, "points": [0.0, 1.0, 2.0]}
        spot = [(0.0, 1.0), (0.0, 2.0)]
    else:
        q, b, n = p.get("q", 1.0), p.get("b", 2.0), int(p.get("N", 32))
        space_doc = {"schema": 1, "dim": n, "norm": {"type": "lp", "p": q}, "cone": {"type": "orthant"}}
        metric_doc = {"schema": 1, "kind": "lq", "b": b, "q": q, "N": n}
        points_doc = {"schema": 1, "points": [0.0, 1.0, 3.0]}
        spot = [(0.0, 1.0), (0.0, 3.0)]
    space = space_from_dict(space_doc)
    cm = cone_metric_from_dict_checked(metric_doc, space)
    os.makedirs(args.outdir, exist_ok=True)
    paths = [os.path.join(args.outdir, f"{name}_{kind}.json") for kind in ("space", "metric", "points")]
    dump_json(space_to_dict(space), paths[0])
    dump_json(cone_metric_to_dict(cm), paths[1])
    dump_json(points_doc, paths[2])
    _write_manifest(RunManifest("examples", [], args.seed, paths),
                    args.manifest or os.path.join(args.outdir, f"{name}_manifest.json"))
    metric = EquivalentMetric(cm)
    for x, y in spot:
        line = (f"d({format_point(x)}, {format_point(y)}): closed-form {_fmt(cm.closed_form(x, y))} "
                f"solver {_fmt(metric(x, y))}")
        if isinstance(cm, GeometricLqConeMetric):
            line += f" tail-bound {_fmt(cm.tail_bound(abs(x - y)))}"
        print(line)
    out.info("wrote " + ", ".join(paths))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conemetric", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tolerance", type=float, default=None, help="override the space tolerance")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--manifest", default=None, help="where to write the run manifest")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrize", help="metrized distance matrix as CSV")
    p.add_argument("space")
    p.add_argument("input", help="JSON with 'points' (matrix) or 'pairs' (list)")
    p.add_argument("--metric", help="cone metric JSON (otherwise the input's 'metric' key)")
    p.add_argument("--out", required=True)
    p.add_argument("--max-error", type=float, default=1e-6)
    p.set_defaults(func=cmd_metrize)

    p = sub.add_parser("check", help="validate cone, cone metric and metrized metric")
    p.add_argument("space")
    p.add_argument("conemetric")
    p.add_argument("--points")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("transfer", help="check a contractive condition on both sides")
    p.add_argument("condition")
    p.add_argument("space")
    p.add_argument("conemetric")
    p.add_argument("map")
    p.add_argument("--dstar", help="second cone metric for the dominance condition")
    p.add_argument("--samples", type=int, default=20, help="domain samples for non-table metrics")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("fixpoint", help="Picard iteration with metrized stopping")
    p.add_argument("space")
    p.add_argument("conemetric")
    p.add_argument("map")
    p.add_argument("--x0", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixpoint)

    p = sub.add_parser("examples", help="write a worked example's input files")
    p.add_argument("name", choices=("discrete", "product", "lq"))
    p.add_argument("--param", action="append", help="key=value, e.g. alpha=2 or q=0.5")
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Output(args.quiet)
    if args.command == "check":
        # the cone is validated before anything else so a bad cone exits 2
        try:
            obj = load_json(args.space)
            space_from_dict(obj, tolerance=args.tolerance)
        except ConfigError as exc:
            out.error(str(exc))
            return EXIT_INVALID
    try:
        return args.func(args, out)
    except ConfigError as exc:
        out.error(str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
