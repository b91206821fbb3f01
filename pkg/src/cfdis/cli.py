"""Batch CLI: config-driven runs, CSV/JSON ingestion and export.

Every output embeds a metadata block (tool version, resolved config and its
hash, solver diagnostics) so a run can be reproduced from its artifact alone.
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from jsonschema import ValidationError, validate

from . import __version__
from .basis import basis_size, enumerate_basis
from .christoffel import (
    build_cf,
    cf_value,
    orthonormal_chol,
    orthonormal_det,
    orthonormality_residual,
)
from .disintegration import (
    asymptotic_sweep,
    build_evaluators,
    conjecture_probe,
    decay_sweep,
    disintegrate_at,
    factorization_residual,
)
from .errors import CfError
from .maxdet import WeightedCone, maxdet_hankel, weighted_maxdet
from .moments import (
    DEFAULT_QUAD_ORDER,
    MeasureSpec,
    moment_matrix,
    moments_from_samples,
    moments_from_spec,
    read_points_csv,
)

_GRID_AXIS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min", "max", "count"],
    "properties": {
        "min": {"type": "number"},
        "max": {"type": "number"},
        "count": {"type": "integer", "minimum": 1},
    },
}

_MEASURE_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "bounds"],
            "properties": {
                "kind": {"const": "uniform_box"},
                "bounds": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "normalize": {"type": "boolean"},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "path"],
            "properties": {
                "kind": {"const": "samples"},
                "path": {"type": "string"},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "interval", "lower", "upper"],
            "properties": {
                "kind": {"const": "curve_region"},
                "interval": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "lower": {"type": "array", "items": {"type": "number"}},
                "upper": {"type": "array", "items": {"type": "number"}},
                "normalize": {"type": "boolean"},
            },
        },
    ]
}

_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "measure": _MEASURE_SCHEMA,
        "t": {"type": "integer", "minimum": 0},
        "x": {"type": "array", "items": {"type": "number"}},
        "y": {"type": "number"},
        "y_grid": _GRID_AXIS_SCHEMA,
        "grid": {"type": "array", "items": _GRID_AXIS_SCHEMA},
        "t_list": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "gamma": {"type": "number"},
        "jitter": {"type": "number", "minimum": 0},
        "quad_order": {"type": "integer", "minimum": 1},
        "coeffs": {"type": "array", "items": {"type": "number"}},
        "generators": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "input": {"type": "string"},
        "out": {"type": "string"},
    },
}


class ConfigError(Exception):
    pass


def _parse_grid_token(token):
    parts = token.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid spec {token!r} must be min:max:count")
    return {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2])}


def _load_config(args):
    """Merge a JSON config file with direct flags (flags win)."""
    config = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if getattr(args, "t", None) is not None:
        config["t"] = args.t
    if getattr(args, "x", None) is not None:
        config["x"] = [float(v) for v in args.x.split(",")]
    if getattr(args, "y", None) is not None:
        config["y"] = args.y
    if getattr(args, "y_grid", None) is not None:
        config["y_grid"] = _parse_grid_token(args.y_grid)
    if getattr(args, "grid", None) is not None:
        config["grid"] = [_parse_grid_token(tok) for tok in args.grid.split(",")]
    if getattr(args, "t_list", None) is not None:
        config["t_list"] = [int(v) for v in args.t_list.split(",")]
    if getattr(args, "gamma", None) is not None:
        config["gamma"] = args.gamma
    if getattr(args, "jitter", None) is not None:
        config["jitter"] = args.jitter
    if getattr(args, "quad_order", None) is not None:
        config["quad_order"] = args.quad_order
    if getattr(args, "coeffs", None) is not None:
        config["coeffs"] = [float(v) for v in args.coeffs.split(",")]
    if getattr(args, "generators", None) is not None:
        config["generators"] = [
            [float(v) for v in gen.split(",")] for gen in args.generators.split(";")
        ]
    if getattr(args, "input", None) is not None:
        config["input"] = args.input
    if getattr(args, "out", None) is not None:
        config["out"] = args.out
    try:
        validate(config, _CONFIG_SCHEMA)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    return config


def _require(config, *keys):
    missing = [k for k in keys if k not in config]
    if missing:
        raise ConfigError(f"missing required configuration keys: {missing}")


def _measure_spec(config):
    _require(config, "measure")
    m = config["measure"]
    if m["kind"] == "uniform_box":
        return MeasureSpec(
            kind="uniform_box",
            bounds=tuple(tuple(b) for b in m["bounds"]),
            normalize=m.get("normalize", True),
        )
    if m["kind"] == "samples":
        return MeasureSpec(kind="samples", path=m["path"])
    return MeasureSpec(
        kind="curve_region",
        interval=tuple(m["interval"]),
        lower=np.asarray(m["lower"], dtype=float),
        upper=np.asarray(m["upper"], dtype=float),
        normalize=m.get("normalize", True),
    )


def _meta(config, **extra):
    # the output destination does not affect the computation; leave it out so
    # runs writing to different paths stay byte-identical
    config = {k: v for k, v in config.items() if k != "out"}
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    meta = {
        "tool": "cfdis",
        "version": __version__,
        "config": config,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
    }
    meta.update(extra)
    return meta


def _fmt(value):
    return format(float(value), ".17g")


def _write_json(config, payload, meta_extra=None):
    doc = {"meta": _meta(config, **(meta_extra or {}))}
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    _emit(config, text)


def _write_csv(config, header, rows, meta_extra=None):
    buf = io.StringIO()
    buf.write(
        "# meta: "
        + json.dumps(_meta(config, **(meta_extra or {})), sort_keys=True)
        + "\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (int, float, np.floating)) else v
                         for v in row])
    _emit(config, buf.getvalue())


def _emit(config, text):
    out = config.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid_points(axes):
    coords = [
        np.linspace(ax["min"], ax["max"], ax["count"]) for ax in axes
    ]
    mesh = np.meshgrid(*coords, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _max_threads():
    raw = os.environ.get("CF_MAX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------- commands


def _cmd_moments(config):
    _require(config, "t")
    spec = _measure_spec(config)
    seq = moments_from_spec(
        spec, config["t"], quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER)
    )
    values = {
        ",".join(map(str, gamma)): v
        for gamma, v in sorted(seq.values.items())
    }
    _write_json(config, {"dim": seq.dim, "degree": seq.degree, "values": values})


def _cmd_cf_grid(config):
    _require(config, "t", "grid")
    spec = _measure_spec(config)
    t = config["t"]
    seq = moments_from_spec(
        spec, t, quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER)
    )
    basis = enumerate_basis(seq.dim, 0, t)
    if len(config["grid"]) != seq.dim:
        raise ConfigError(
            f"grid has {len(config['grid'])} axes, measure has dimension {seq.dim}"
        )
    evaluator = build_cf(moment_matrix(seq, basis, jitter=config.get("jitter", 0.0)))
    points = _grid_points(config["grid"])
    scale = basis_size(seq.dim, t)
    gamma = config.get("gamma")

    def eval_chunk(chunk):
        return [scale * cf_value(evaluator, pt) for pt in chunk]

    workers = _max_threads()
    if workers > 1:
        chunks = np.array_split(points, workers * 4)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = [s for part in pool.map(eval_chunk, chunks) for s in part]
    else:
        scores = eval_chunk(points)
    header = [f"x{i + 1}" for i in range(seq.dim)] + ["cf_scaled"]
    if gamma is not None:
        header.append("inside")
    rows = []
    for pt, score in zip(points, scores):
        row = list(pt) + [score]
        if gamma is not None:
            row.append(int(score >= gamma))
        rows.append(row)
    _write_csv(
        config, header, rows,
        meta_extra={"condition": evaluator.condition, "scale": scale},
    )


def _cmd_orthonormal(config):
    _require(config, "t")
    spec = _measure_spec(config)
    t = config["t"]
    seq = moments_from_spec(
        spec, t, quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER)
    )
    p = 1 if seq.dim >= 2 else 0
    basis = enumerate_basis(seq.dim - p, p, t)
    fam_det = orthonormal_det(seq, basis)
    fam_chol = orthonormal_chol(moment_matrix(seq, basis))
    payload = {
        "labels": basis.labels(),
        "coefficients_det": fam_det.coeffs.tolist(),
        "coefficients_chol": fam_chol.coeffs.tolist(),
        "max_disagreement": float(np.max(np.abs(fam_det.coeffs - fam_chol.coeffs))),
        "orthonormality_residual": orthonormality_residual(fam_det, seq),
    }
    _write_json(config, payload)


def _cmd_disintegrate(config):
    _require(config, "t", "x")
    spec = _measure_spec(config)
    joint, marg = build_evaluators(
        spec, config["t"], quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER)
    )
    res = disintegrate_at(joint, marg, config["x"])
    payload = {
        "x": list(res.x),
        "t": res.t,
        "marginal_cf": res.marginal_cf,
        "sos_coeffs": res.sos.coeffs.tolist(),
        "hankel": res.hankel.tolist(),
        "gram": res.gram.tolist(),
        "dual": res.dual.tolist(),
        "atoms": {
            "nodes": res.measure.nodes.tolist(),
            "weights": res.measure.weights.tolist(),
        },
        "mass": res.mass,
        "diagnostics": res.diagnostics,
    }
    if "y_grid" in config:
        ax = config["y_grid"]
        grid = np.linspace(ax["min"], ax["max"], ax["count"])
        payload["factorization_residual"] = factorization_residual(
            joint, marg, config["x"], grid
        )
    _write_json(config, payload)


def _cmd_maxdet(config):
    _require(config, "coeffs")
    res = maxdet_hankel(np.asarray(config["coeffs"], dtype=float))
    _write_json(
        config,
        {
            "gram": res.gram.tolist(),
            "hankel": res.hankel.tolist(),
            "dual": res.dual.tolist(),
            "mass": res.mass,
            "status": res.status,
        },
        meta_extra={
            "iterations": res.iterations,
            "gradient_norm": res.gradient_norm,
        },
    )


def _cmd_weighted_maxdet(config):
    _require(config, "coeffs", "generators", "t")
    cone = WeightedCone(
        generators=tuple(np.asarray(g, dtype=float) for g in config["generators"]),
        t=config["t"],
    )
    res = weighted_maxdet(np.asarray(config["coeffs"], dtype=float), cone)
    _write_json(
        config,
        {
            "blocks": [b.tolist() for b in res.blocks],
            "multipliers": [m.tolist() for m in res.multipliers],
            "dual": res.dual.tolist(),
            "status": res.status,
        },
        meta_extra={
            "iterations": res.iterations,
            "gradient_norm": res.gradient_norm,
        },
    )


def _cmd_decay_sweep(config):
    _require(config, "x", "y", "t_list")
    spec = _measure_spec(config)
    table = decay_sweep(
        spec, config["x"], config["y"], config["t_list"],
        quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER),
    )
    _write_csv(
        config,
        ["t", "conditional_cf"],
        table["rows"],
        meta_extra={"slope": table["slope"], "r_squared": table["r_squared"]},
    )


def _cmd_asymptotic_sweep(config):
    _require(config, "x", "t_list")
    spec = _measure_spec(config)
    table = asymptotic_sweep(
        spec, config["x"], config.get("y"), config["t_list"],
        quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER),
    )
    _write_csv(config, ["t", "t_times_cf"], table["rows"])


def _cmd_conjecture_probe(config):
    _require(config, "x", "t_list")
    spec = _measure_spec(config)
    report = conjecture_probe(
        spec, config["x"], config["t_list"],
        quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER),
    )
    _write_json(
        config,
        {
            "hankels": {str(t): h.tolist() for t, h in report["hankels"].items()},
            "distances": [
                {"t": t, "t_next": tn, "max_abs_difference": d}
                for t, tn, d in report["distances"]
            ],
        },
    )


def _cmd_score(config):
    _require(config, "t", "input")
    points = read_points_csv(config["input"])
    t = config["t"]
    gamma = config.get("gamma", 0.5)
    if "measure" in config:
        spec = _measure_spec(config)
        seq = moments_from_spec(
            spec, t, quad_order=config.get("quad_order", DEFAULT_QUAD_ORDER)
        )
    else:
        seq = moments_from_samples(points, t)
    basis = enumerate_basis(points.shape[1], 0, t)
    evaluator = build_cf(
        moment_matrix(seq, basis, jitter=config.get("jitter", 0.0))
    )
    scale = basis_size(points.shape[1], t)
    header = [f"x{i + 1}" for i in range(points.shape[1])] + ["score", "inside"]
    rows = []
    for pt in points:
        score = scale * cf_value(evaluator, pt)
        rows.append(list(pt) + [score, int(score >= gamma)])
    _write_csv(
        config, header, rows,
        meta_extra={"condition": evaluator.condition, "gamma": gamma},
    )


_COMMANDS = {
    "moments": _cmd_moments,
    "cf-grid": _cmd_cf_grid,
    "orthonormal": _cmd_orthonormal,
    "disintegrate": _cmd_disintegrate,
    "maxdet": _cmd_maxdet,
    "weighted-maxdet": _cmd_weighted_maxdet,
    "decay-sweep": _cmd_decay_sweep,
    "asymptotic-sweep": _cmd_asymptotic_sweep,
    "conjecture-probe": _cmd_conjecture_probe,
    "score": _cmd_score,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits 2 by default; config problems are exit 1 here
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="cfdis", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--t", type=int)
        p.add_argument("--x", help="comma-separated reals")
        p.add_argument("--y", type=float)
        p.add_argument("--y-grid", dest="y_grid", help="min:max:count")
        p.add_argument("--grid", help="per-axis min:max:count, comma-separated")
        p.add_argument("--t-list", dest="t_list", help="comma-separated degrees")
        p.add_argument("--gamma", type=float)
        p.add_argument("--jitter", type=float)
        p.add_argument("--quad-order", dest="quad_order", type=int)
        p.add_argument("--coeffs", help="ascending coefficients, comma-separated")
        p.add_argument(
            "--generators",
            help="semicolon-separated generator coefficient lists",
        )
        p.add_argument("--input", help="CSV points file")
        p.add_argument("--out", help="output path (default stdout)")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        config = _load_config(args)
        _COMMANDS[args.command](config)
    except (ConfigError, ValueError, OSError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1
    except CfError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
