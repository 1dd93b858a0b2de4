"""Command line entry point: ``morandim validate|cordim|localdim|energy|cluster``.

Exit status is 0 on success, 1 when a check or a cross-route comparison
fails, and 2 for unusable input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import dimension as dim
from .config import InputError, RunConfig, load_config
from .filtration import build_moran_filtration, validate_filtration
from .geometry import clustering_diagnostic, validate
from .symbolic import BudgetExceededError, format_word

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
ROUTES = (dim.MORAN, dim.FILTRATION, dim.PAIRCOUNT, "all")


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, fractions become ``"a/b"``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return _clean(obj.as_dict())
    return str(obj)


def _document(cfg: RunConfig, command: str, result: dict) -> dict:
    b = cfg.budgets
    return {
        "schema_version": cfg.schema_version,
        "command": command,
        "config_digest": cfg.digest,
        "seed": b.seed,
        "budgets": {k: getattr(b, k) for k in b.__dataclass_fields__},
        "result": result,
    }


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def path_digest(path) -> str:
    return hashlib.sha256(np.asarray(path, dtype="<i8").tobytes()).hexdigest()[:16]


# --------------------------------------------------------------------------
# subcommands; each returns (exit status, document, csv text)


def cmd_validate(cfg: RunConfig):
    v = cfg.validate
    report = validate(cfg.geometry, v.depth)
    levels = v.filtration_levels or cfg.budgets.n_max
    freport = None
    note = None
    filt = build_moran_filtration(cfg.geometry, levels)
    if filt.n_levels >= 3:
        freport = validate_filtration(filt, v.gamma_threshold)
    else:
        note = f"only {filt.n_levels} filtration levels built; F1-F4 need at least 3"
    failed = [c.name for c in report.exact_failures]
    if freport is not None:
        failed += [c.name for c in freport.exact_failures]
    result = {
        "geometry": report.as_dict(),
        "filtration": freport.as_dict() if freport is not None else None,
        "filtration_levels": filt.as_dict(),
        "exact_failures": failed,
        "trend_violations": [c.name for c in report.trend_violations]
        + ([k for k, c in freport.conditions.items() if c.status == "violation-trend"] if freport else []),
        "note": note,
    }

    def trend(c):
        return c.trend.verdict if c.trend is not None else ""

    rows = [(name, c.status, c.checked_depth, trend(c)) for name, c in report.conditions.items()]
    if freport is not None:
        rows += [(name, c.status, freport.n_levels, trend(c)) for name, c in freport.conditions.items()]
    return (EXIT_FAIL if failed else EXIT_OK), result, _csv(("condition", "status", "depth", "trend"), rows)


def _route_estimate(cfg: RunConfig, route: str):
    b = cfg.budgets
    if route == dim.MORAN:
        return dim.cordim_moran(cfg.measure, cfg.geometry, b.n_max, b.tail_window), None
    if route == dim.FILTRATION:
        filt = build_moran_filtration(cfg.geometry, b.n_max)
        return dim.cordim_filtration(cfg.measure, filt, b.tail_window), None
    curve = dim.cordim_paircount(cfg.measure, cfg.geometry, b.samples, seed=b.seed, r_levels=b.r_levels)
    return curve.as_estimate(), curve


def _estimate_rows(est: dim.DimensionEstimate, prefix=()):
    return [
        (*prefix, int(n), s, d, a)
        for n, s, d, a in zip(est.indices, est.sum_log, est.denom_log, est.sequence)
    ]


def cmd_cordim(cfg: RunConfig, route: str):
    header = ("n", "sum_log", "denom_log", "a_n")
    if route != "all":
        est, curve = _route_estimate(cfg, route)
        result = {"route": route, "value": est.value, "estimate": est.as_dict()}
        if curve is not None:
            result["curve"] = curve.as_dict()
        return EXIT_OK, result, _csv(header, _estimate_rows(est))
    report = dim.consistency_check(cfg.measure, cfg.geometry, cfg.budgets, cfg.validate.depth)
    result = {
        "route": "all",
        "values": report.values,
        "estimates": {k: v.as_dict() for k, v in report.estimates.items()},
        "curve": report.curve.as_dict(),
        "lower_hausdorff": report.lower_hausdorff.as_dict(),
        "consistency": report.as_dict(),
    }
    rows = []
    for name in (dim.MORAN, dim.FILTRATION, dim.PAIRCOUNT):
        rows += _estimate_rows(report.estimates[name], (name,))
    return (EXIT_OK if report.passed else EXIT_FAIL), result, _csv(("route",) + header, rows)


def cmd_localdim(cfg: RunConfig):
    b = cfg.budgets
    header = ("path_digest", "lower", "upper")
    ld = cfg.localdim
    if ld.path is not None:
        path = ld.path
        if ld.periodic:
            reps = -(-b.depth // len(path))
            path = (path * reps)[: b.depth]
        sample = dim.local_dim_sequence(cfg.measure, cfg.geometry, path, b.tail_window)
        digest = path_digest(sample.path)
        entry = sample.as_dict() | {"path_digest": digest, "path": format_word(sample.path)}
        result = {"mode": "explicit-path", "samples": [entry]}
        return EXIT_OK, result, _csv(header, [(digest, sample.lower, sample.upper)])
    est = dim.lower_hausdorff_estimate(cfg.measure, cfg.geometry, b.paths, b.depth, b.tail_window, b.seed)
    rows, entries = [], []
    for s in est.samples:
        digest = path_digest(s.path)
        rows.append((digest, s.lower, s.upper))
        entries.append(
            {
                "path_digest": digest,
                "lower": s.lower,
                "upper": s.upper,
                "upper_is_equality": s.upper_is_equality,
                "tail_n": list(range(len(s.sequence) - s.tail_window + 1, len(s.sequence) + 1)),
                "tail_b_n": s.sequence[-s.tail_window :].tolist(),
            }
        )
    result = {
        "mode": "sampled",
        "essinf": est.value,
        "summary": est.as_dict(),
        "samples": entries,
    }
    return EXIT_OK, result, _csv(header, rows)


def cmd_energy(cfg: RunConfig, s=None, bisect=None):
    b = cfg.budgets
    e = cfg.energy
    if s is None and bisect is None:
        s, bisect = e.s, e.bisect
    ladder = e.epsilon_ladder
    if bisect is not None:
        lo, hi, tol = bisect
        br = dim.cordim_energy(cfg.measure, cfg.geometry, lo, hi, tol, b.samples, ladder, b.seed)
        rows = [(p, int(d), g) for p, d, g in br.probes]
        result = {"mode": "bisect", "bracket": br.as_dict()}
        return EXIT_OK, result, _csv(("s", "diverging", "growth_exponent"), rows)
    if s is None:
        raise InputError("energy.s", "give an exponent s or a bisect block")
    if e.x is not None:
        pl = dim.potential_ladder(cfg.measure, cfg.geometry, s, e.x, b.samples, ladder, b.seed)
        rows = zip(pl.epsilon_ladder, pl.values, pl.stderr, pl.n_excluded)
        result = {"mode": "potential", "potential": pl.as_dict()}
        return EXIT_OK, result, _csv(("epsilon", "value", "stderr", "excluded"), rows)
    est = dim.energy_estimate(cfg.measure, cfg.geometry, s, b.samples, ladder, b.seed)
    rows = zip(est.epsilon_ladder, est.values, est.stderr, est.excluded_fraction)
    result = {"mode": "energy", "value": est.value, "energy": est.as_dict()}
    return EXIT_OK, result, _csv(("epsilon", "value", "stderr", "excluded_fraction"), rows)


def cmd_cluster(cfg: RunConfig):
    c = cfg.cluster
    rep = clustering_diagnostic(cfg.geometry, cfg.measure, c.points, c.r_levels, cfg.budgets.seed)
    rows = [(k + 1, r, int(m)) for k, (r, m) in enumerate(zip(rep.r_grid, rep.max_per_r))]
    result = {"sup_estimate": rep.sup_estimate, "report": rep.as_dict()}
    return EXIT_OK, result, _csv(("k", "r", "max_count"), rows)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morandim", description="Dimensions of measures on Moran constructions.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--n-max", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tail-window", type=int)
    common.add_argument("--out", help="output file (default: config output.path, else stdout)")
    common.add_argument("--format", choices=("csv", "doc"))
    sub.add_parser("validate", parents=[common], help="check construction and filtration conditions")
    p = sub.add_parser("cordim", parents=[common], help="correlation dimension")
    p.add_argument("--route", choices=ROUTES, default=dim.MORAN)
    sub.add_parser("localdim", parents=[common], help="local dimensions along sampled or given paths")
    p = sub.add_parser("energy", parents=[common], help="truncated energies, potentials and energy bisection")
    p.add_argument("--s", type=float)
    p.add_argument("--bisect", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--tol", type=float, default=0.05)
    sub.add_parser("cluster", parents=[common], help="finite clustering diagnostic")
    return parser


def _run(args, cfg: RunConfig):
    if args.command == "validate":
        return cmd_validate(cfg)
    if args.command == "cordim":
        return cmd_cordim(cfg, args.route)
    if args.command == "localdim":
        return cmd_localdim(cfg)
    if args.command == "energy":
        if args.s is not None and args.s < 0:
            raise InputError("--s", "must be >= 0")
        bisect = None
        if args.bisect is not None:
            lo, hi = args.bisect
            if not 0 <= lo < hi or args.tol <= 0:
                raise InputError("--bisect", f"need 0 <= LO < HI and tol > 0, got {lo}, {hi}, {args.tol}")
            bisect = (lo, hi, args.tol)
        return cmd_energy(cfg, args.s, bisect)
    return cmd_cluster(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_budgets(
            n_max=args.n_max, samples=args.samples, seed=args.seed, tail_window=args.tail_window
        )
        status, result, table = _run(args, cfg)
    except InputError as exc:
        print(f"morandim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, BudgetExceededError) as exc:
        print(f"morandim: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc, ValueError) else EXIT_FAIL
    except dim.DegenerateEstimateError as exc:
        print(f"morandim: {exc}", file=sys.stderr)
        return EXIT_FAIL

    fmt = args.format or cfg.output_format
    if fmt == "csv":
        text = table
        summary = {k: result[k] for k in ("value", "values", "essinf", "sup_estimate", "exact_failures") if k in result}
        if summary:
            print(json.dumps(_clean(summary), sort_keys=True), file=sys.stderr)
    else:
        text = json.dumps(_clean(_document(cfg, args.command, result)), sort_keys=True, indent=2) + "\n"
    out = args.out or cfg.output_path
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_FAIL and "consistency" in result:
        for f in result["consistency"]["failures"]:
            print(f"morandim: consistency failure: {f['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
