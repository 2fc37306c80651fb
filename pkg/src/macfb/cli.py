"""Command-line driver.

Exit codes: 0 success, 2 invalid input, 3 consistency violation, 1 internal
error.  CSV numbers carry 6 significant digits; JSON carries full doubles.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from macfb.awgn import FBCAP_REFERENCE, AwgnConfig, cl_equal_rate, rate_terms, theorem1_awgn_region
from macfb.consistency import (
    ExtendedFeedbackLaw,
    FeedbackLaw,
    check_consistency,
    check_consistency_extended,
)
from macfb.errors import ConsistencyError, MacfbError
from macfb.prob import ExtendedInputLaw, InputLaw, JointTable
from macfb.regions import (
    FULL_HISTORY,
    OUTPUT_HISTORY,
    boundary_trace,
    cover_leung_region,
    equal_rate_point,
    nofeedback_pentagon,
    theorem1_region_3form,
    theorem1_region_5form,
    theorem2_region,
)
from macfb.search import (
    SearchSpec,
    default_awgn_spec,
    default_binary_spec,
    maximize_awgn_equal_rate,
    maximize_binary_sum_coefficient,
)

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CONSISTENCY = 0, 1, 2, 3

AWGN_HEADER = ("snr", "r_cl", "r_star", "r_fbcap_ref", "alpha", "beta", "lambda")
BINARY_HEADER = ("region", "coefficient", "fit_residual", "two_point_coefficient",
                 "p0", "p00", "p10", "p01", "p11", "c0", "c1")

REGIONS = ("theorem1", "theorem1-3form", "theorem2", "cover-leung", "nofeedback")
HISTORIES = {"full": FULL_HISTORY, "output": OUTPUT_HISTORY}


class InputError(MacfbError):
    pass


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{v:.6g}"


def write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row.get(k)) for k in header])


def write_json(out, obj):
    json.dump(obj, out, indent=2, allow_nan=True)
    out.write("\n")


def parse_float_list(text, what):
    items = [t.strip() for t in (text or "").split(",") if t.strip()]
    if not items:
        raise InputError(f"{what} is empty")
    try:
        return [float(t) for t in items]
    except ValueError:
        raise InputError(f"{what} must be comma-separated numbers, got {text!r}") from None


def load_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None


def load_search_spec(path, default):
    if not path:
        return default
    data = load_json(path)
    if "bounds" in data:
        return SearchSpec.from_dict(data)
    unknown = set(data) - set(SearchSpec.__dataclass_fields__)
    if unknown:
        raise InputError(f"unknown search config fields: {sorted(unknown)}")
    return default.with_overrides(**data)


def dump_trace(path, traces):
    if not path:
        return
    with open(path, "w", encoding="utf-8") as f:
        write_json(f, {k: r.to_dict() for k, r in traces.items()})


# commands -----------------------------------------------------------------

def cmd_awgn_table(args, out):
    snrs = parse_float_list(args.snr_list, "--snr-list")
    if any(not s > 0 for s in snrs):
        raise InputError("every snr must be positive")
    spec = load_search_spec(args.search_config, default_awgn_spec())
    rows, traces = [], {}
    for s in snrs:
        res = maximize_awgn_equal_rate(s, spec, record_trace=bool(args.trace))
        traces[f"snr={s:g}"] = res
        rows.append({"snr": s, "r_cl": cl_equal_rate(s), "r_star": res.best_value,
                     "r_fbcap_ref": FBCAP_REFERENCE.get(s), **res.best_params})
    dump_trace(args.trace, traces)
    if args.format == "csv":
        write_csv(out, AWGN_HEADER, rows)
    else:
        write_json(out, {"unit": "bits", "r_fbcap_ref_note": "reference constants, not computed",
                         "rows": rows})


def cmd_awgn_point(args, out):
    cfg = AwgnConfig(args.snr, args.alpha, args.beta, args.lam)
    g, h, total = rate_terms(cfg)
    region = theorem1_awgn_region(cfg)
    row = {"snr": cfg.snr, "alpha": cfg.alpha, "beta": cfg.beta, "lambda": cfg.lam,
           "k1": cfg.gains.k1, "k2": cfg.gains.k2, "G": g, "H": h, "sum": total,
           "equal_rate": equal_rate_point(region)}
    if args.format == "csv":
        write_csv(out, tuple(row), [row])
    else:
        write_json(out, {"unit": "bits", **row, "region": region.to_dict()})


def _binary_row(region, rate):
    row = {"region": region, "coefficient": rate.coefficient, "fit_residual": rate.fit_residual,
           "two_point_coefficient": rate.two_point_coefficient}
    row.update(rate.params)
    return row


def cmd_binary_mac(args, out):
    from macfb.binary_mac import (
        CL_OPTIMUM, DEFAULT_Q_GRID, REFERENCE_OPTIMUM, asymptotic_cl_sum_rate, asymptotic_sum_rate)

    q_grid = tuple(parse_float_list(args.q_grid, "--q-grid")) if args.q_grid else DEFAULT_Q_GRID
    if any(not 0 < q < 0.5 for q in q_grid) or len(q_grid) < 3:
        raise InputError("--q-grid needs at least three values in (0, 0.5)")
    t1_params, cl_params, traces = REFERENCE_OPTIMUM, CL_OPTIMUM, {}
    if args.optimize:
        t1 = maximize_binary_sum_coefficient(
            load_search_spec(args.search_config, default_binary_spec("theorem1")),
            q_grid=q_grid, record_trace=bool(args.trace))
        cl = maximize_binary_sum_coefficient(restrict="cover-leung", q_grid=q_grid,
                                             record_trace=bool(args.trace))
        traces = {"theorem1": t1, "cover-leung": cl}
        t1_params, cl_params = t1.best_params, cl.best_params
    dump_trace(args.trace, traces)
    t1_rate = asymptotic_sum_rate(**t1_params, q_grid=q_grid)
    cl_rate = asymptotic_cl_sum_rate(**cl_params, q_grid=q_grid)
    rows = [_binary_row("theorem1", t1_rate), _binary_row("cover-leung", cl_rate)]
    if args.format == "csv":
        write_csv(out, BINARY_HEADER, rows)
    else:
        rows[0]["closed_form_gap"] = t1_rate.closed_form_gap
        rows[0]["max_consistency_deviation"] = max(t1_rate.consistency_deviation)
        for row, rate in zip(rows, (t1_rate, cl_rate)):
            row["normalized_rates"] = list(rate.normalized_rates)
        write_json(out, {"unit": "nats", "q_grid": list(q_grid), "optimized": args.optimize,
                         "rows": rows})


def _history(value):
    if value is None:
        return FULL_HISTORY
    if isinstance(value, str):
        if value not in HISTORIES:
            raise InputError(f"history must be one of {sorted(HISTORIES)} or a list of names")
        return HISTORIES[value]
    return tuple(value)


def evaluate_region_spec(spec, unit=None):
    """Evaluate a region description; returns ``(region, deviation or None)``."""
    if not isinstance(spec, dict):
        raise InputError("region spec must be a JSON object")
    kind = spec.get("region", "theorem1")
    if kind not in REGIONS:
        raise InputError(f"region must be one of {REGIONS}, got {kind!r}")
    unit = unit or spec.get("unit", "nats")
    try:
        if kind in ("cover-leung", "nofeedback"):
            dist = JointTable.from_dict(spec["dist"])
            fn = cover_leung_region if kind == "cover-leung" else nofeedback_pentagon
            return fn(dist, unit), None
        tol = float(spec.get("tol", 1e-8))
        if kind == "theorem2":
            law = ExtendedInputLaw.from_dict(spec["law"])
            fb = ExtendedFeedbackLaw.from_dict(spec["feedback"])
            report = check_consistency_extended(law, fb, tol)
            return theorem2_region(law, fb, unit, tol=tol), report.max_deviation
        law = InputLaw.from_dict(spec["law"])
        fb = FeedbackLaw.from_dict(spec["feedback"])
    except KeyError as e:
        raise InputError(f"region spec is missing field {e}") from None
    except (TypeError, AttributeError) as e:
        raise InputError(f"malformed region spec: {e}") from None
    report = check_consistency(law, fb, tol)
    fn = theorem1_region_5form if kind == "theorem1" else theorem1_region_3form
    return fn(law, fb, unit, history=_history(spec.get("history")), tol=tol), report.max_deviation


def cmd_region_eval(args, out):
    region, dev = evaluate_region_spec(load_json(args.input), args.unit)
    if args.format == "csv":
        rows = [{"a1": float(a1), "a2": float(a2), "bound": b, "label": lab}
                for (a1, a2, b), lab in zip(region.constraints, region.labels)]
        write_csv(out, ("a1", "a2", "bound", "label"), rows)
    else:
        write_json(out, {**region.to_dict(), "consistency_deviation": dev,
                         "equal_rate_point": equal_rate_point(region)})


def cmd_boundary(args, out):
    if args.points < 2:
        raise InputError("--points must be at least 2")
    region, _ = evaluate_region_spec(load_json(args.input), args.unit)
    pts = boundary_trace(region, args.points)
    if args.format == "csv":
        write_csv(out, ("r1", "r2"), [{"r1": p.r1, "r2": p.r2} for p in pts])
    else:
        write_json(out, {"unit": region.unit, "points": [[p.r1, p.r2] for p in pts]})


# entry point --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="macfb", description="Rate regions for the two-user MAC with feedback.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.set_defaults(func=fn)
        return p

    p = add("awgn-table", cmd_awgn_table, "optimised Gaussian equal-rate points per snr")
    p.add_argument("--snr-list", required=True)
    p.add_argument("--search-config")
    p.add_argument("--trace", metavar="PATH", help="write search evaluation traces as JSON")

    p = add("awgn-point", cmd_awgn_point, "Gaussian region at one parameter point")
    p.add_argument("--snr", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = add("binary-mac", cmd_binary_mac, "small-q sum-rate coefficients of the binary MAC")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--q-grid")
    p.add_argument("--search-config")
    p.add_argument("--trace", metavar="PATH", help="write search evaluation traces as JSON")

    for name, fn, help_ in (("region-eval", cmd_region_eval, "evaluate a region from a JSON spec"),
                            ("boundary", cmd_boundary, "trace a region boundary from a JSON spec")):
        p = add(name, fn, help_)
        p.add_argument("--input", required=True)
        p.add_argument("--unit", choices=("bits", "nats"))
        if name == "boundary":
            p.add_argument("--points", type=int, default=101)
    sub.choices["region-eval"].set_defaults(format="json")
    sub.choices["boundary"].set_defaults(format="csv")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except ConsistencyError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except MacfbError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    out.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
