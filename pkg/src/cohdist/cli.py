"""Command line surface.

Subcommands cover single-quantity queries, distillation reports,
Haar-sampling experiments, tensor-power rate scans, and the
cross-route selftest battery.  Exit codes: 0 ok, 1 selftest failure,
2 input error, 3 solver failure, 4 unsupported class/state
combination, 5 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import distill, monotones, report, selftest
from .errors import (
    CoherenceError,
    ConvergenceFailure,
    ResourceLimit,
    SolverFailure,
    UnsupportedCombination,
)
from .experiments import run_haar
from .linalg import StateVector
from .stateio import load_state_file

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_UNSUPPORTED = 4
EXIT_RESOURCE = 5

VARIANTS = ("theta", "theta-hat", "robustness", "mod-trace", "trace", "rel-ent")
CLASSES = ("mio", "dio", "sio", "io")


def _emit_json(doc):
    json.dump(doc, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _witness_residuals(w: np.ndarray, bound: float, mode: str):
    eigs = np.linalg.eigvalsh(w)
    dg = np.real(np.diag(w))
    if mode == "leq":
        diag_resid = max(0.0, float(dg.max()))
    else:
        diag_resid = float(np.max(np.abs(dg)))
    return {
        "eig_below_lower": max(0.0, float(-1.0 - eigs[0])),
        "eig_above_upper": max(0.0, float(eigs[-1] - bound)),
        "diagonal": diag_resid,
    }


def cmd_monotone(args) -> int:
    state = load_state_file(args.state)
    variant = args.variant
    doc = {"variant": variant, "dim": state.dim}
    res = None
    bound = mode = None
    if variant in ("theta", "theta-hat"):
        if args.m is None:
            print("error: --m is required for %s" % variant, file=sys.stderr)
            return EXIT_INPUT
        if args.m < 0:
            print("error: --m must be nonnegative", file=sys.stderr)
            return EXIT_INPUT
        doc["m"] = args.m
        if variant == "theta":
            res = monotones.theta(state, args.m)
            bound, mode = args.m, "leq"
        else:
            res = monotones.theta_hat(state, args.m)
            bound, mode = args.m, "eq"
    elif variant == "robustness":
        res = monotones.robustness(state)
        bound, mode = state.dim - 1.0, "leq"
    elif variant == "mod-trace":
        res = monotones.modified_trace_distance(state)
        bound, mode = 1.0, "leq"
    elif variant == "trace":
        doc["value"] = monotones.trace_distance_of_coherence(state)
    else:
        doc["value"] = monotones.relative_entropy_of_coherence(state)

    if res is not None:
        doc["value"] = res.value
        doc["route_gap"] = res.gap
        doc["witness_residuals"] = _witness_residuals(res.witness.mat, bound, mode)

    if args.json:
        _emit_json(doc)
    else:
        print("variant:   %s" % variant)
        if "m" in doc:
            print("m:         %g" % doc["m"])
        print("value:     %.12g" % doc["value"])
        if res is not None:
            print("route gap: %.3e" % doc["route_gap"])
            r = doc["witness_residuals"]
            print(
                "witness residuals: eig>lower %.3e, eig<upper %.3e, diagonal %.3e"
                % (r["eig_below_lower"], r["eig_above_upper"], r["diagonal"])
            )
    return EXIT_OK


def cmd_distill(args) -> int:
    state = load_state_file(args.state)
    cls = args.cls
    if cls in ("sio", "io") and not isinstance(state, StateVector):
        print(
            "error: class %s is only supported for pure states "
            "(no algorithm for mixed inputs)" % cls,
            file=sys.stderr,
        )
        return EXIT_UNSUPPORTED
    # for pure states all four classes give the same one-shot rate,
    # so sio/io queries run through the same programs
    which = cls if cls in ("mio", "dio") else "mio"
    rep = distill.one_shot_distillable(state, args.epsilon, which=which)
    doc = {
        "class": cls,
        "epsilon": args.epsilon,
        "dim": state.dim,
        "kind": "pure" if isinstance(state, StateVector) else "mixed",
        "m": rep.m,
        "rate_bits": rep.log2_m,
        "fidelity": rep.fidelity,
        "delta": rep.delta,
        "route": rep.route,
        "scan_m": rep.scan_m,
        "flags": list(rep.flags),
    }
    if args.json:
        _emit_json(doc)
    else:
        print("class:     %s   epsilon: %g" % (cls, args.epsilon))
        print("m:         %d  (rate %.12g bits)" % (rep.m, rep.log2_m))
        print("fidelity:  %.12g" % rep.fidelity)
        print("delta:     %.12g" % rep.delta)
        print("route:     %s" % rep.route)
        if rep.flags:
            print("flags:     %s" % ", ".join(rep.flags))
    return EXIT_OK


def cmd_sample_haar(args) -> int:
    if args.dim < 1 or args.samples < 1:
        print("error: need --dim >= 1 and --samples >= 1", file=sys.stderr)
        return EXIT_INPUT
    stats, summary = run_haar(args.dim, args.samples, args.seed)
    doc = {
        "dimension": summary.dimension,
        "samples": summary.samples,
        "seed": summary.seed,
        "fraction_distillable": summary.fraction_distillable,
        "predicted_fraction": summary.predicted_fraction,
        "stderr": summary.stderr,
        "mean_zero_error_bits": summary.mean_bits,
    }
    if args.out:
        header = ("sample_index", "max_prob", "zero_error_bits", "fidelity_at_2")
        rows = ((i, s[0], s[1], s[2]) for i, s in enumerate(stats))
        report.write_csv(args.out, header, rows)
        fig = report.figure_path(args.out)
        report.render_haar_figure(stats, summary, fig)
        doc["csv"] = str(args.out)
        doc["figure"] = fig
    if args.json:
        _emit_json(doc)
    else:
        print("dimension: %d   samples: %d   seed: %d" % (args.dim, args.samples, args.seed))
        print(
            "fraction with >= 1 bit: %.6f   predicted: %.6f   MC stderr: %.6f"
            % (summary.fraction_distillable, summary.predicted_fraction, summary.stderr)
        )
        print("mean zero-error bits:   %.6f" % summary.mean_bits)
        if args.out:
            print("wrote %s and %s" % (doc["csv"], doc["figure"]))
    return EXIT_OK


def cmd_rate_scan(args) -> int:
    state = load_state_file(args.state)
    if not isinstance(state, StateVector):
        print("error: rate-scan requires a pure state file", file=sys.stderr)
        return EXIT_INPUT
    rows = distill.asymptotic_rate_scan(state, args.epsilon, args.n_max)
    reference = monotones.relative_entropy_of_coherence(state)
    doc = {
        "epsilon": args.epsilon,
        "n_max": args.n_max,
        "reference_relative_entropy": reference,
        "rows": [[n, r] for n, r in rows],
    }
    if args.out:
        header = ("n", "rate_per_copy", "C_r_reference")
        report.write_csv(args.out, header, ((n, r, reference) for n, r in rows))
        fig = report.figure_path(args.out)
        report.render_rate_scan_figure(rows, reference, fig)
        doc["csv"] = str(args.out)
        doc["figure"] = fig
    if args.json:
        _emit_json(doc)
    else:
        print("epsilon: %g   reference relative entropy: %.6f" % (args.epsilon, reference))
        for n, r in rows:
            print("n=%2d  rate/copy %.12g" % (n, r))
        if args.out:
            print("wrote %s and %s" % (doc["csv"], doc["figure"]))
    return EXIT_OK


def cmd_selftest(args) -> int:
    try:
        dims = tuple(int(x) for x in args.dims.split(",") if x.strip())
    except ValueError:
        print("error: --dims must be a comma-separated list of integers", file=sys.stderr)
        return EXIT_INPUT
    if not dims or any(d < 1 for d in dims):
        print("error: dimensions must be positive", file=sys.stderr)
        return EXIT_INPUT
    results = selftest.run_battery(
        dims=dims, samples=args.samples, seed=args.seed, tolerance=args.tolerance
    )
    n_dumped = 0
    for check in results:
        for failure in check.failures:
            selftest.dump_failure(
                dict(failure, check=check.name), args.dump_dir, n_dumped
            )
            n_dumped += 1
    ok = all(c.ok for c in results)
    if args.json:
        _emit_json(
            {
                "ok": ok,
                "tolerance": args.tolerance,
                "dims": list(dims),
                "samples": args.samples,
                "checks": [
                    {
                        "name": c.name,
                        "instances": c.instances,
                        "worst": c.worst,
                        "failures": len(c.failures),
                    }
                    for c in results
                ],
            }
        )
    else:
        width = max(len(c.name) for c in results)
        for c in results:
            print(
                "%-*s  %4d instances  worst %.3e  %s"
                % (width, c.name, c.instances, c.worst, "PASS" if c.ok else "FAIL")
            )
        if not ok:
            print("%d failing instance(s) dumped to %s" % (n_dumped, args.dump_dir))
    return EXIT_OK if ok else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coherence",
        description="One-shot coherence distillation toolkit.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    mono = sub.add_parser(
        "monotone",
        help="evaluate a coherence monotone on a state file",
        description="Evaluate a coherence monotone. Variants theta and "
        "theta-hat take --m; the others ignore it.",
    )
    mono.add_argument("state", help="path to a state JSON file")
    mono.add_argument("--m", type=float, default=None, help="monotone order")
    mono.add_argument("--variant", choices=VARIANTS, default="theta")
    mono.add_argument("--json", action="store_true")
    mono.set_defaults(func=cmd_monotone)

    dist = sub.add_parser(
        "distill",
        help="one-shot distillation report",
        description="Compute the one-shot distillable coherence at error "
        "epsilon. Classes sio and io accept pure states only.",
    )
    dist.add_argument("state", help="path to a state JSON file")
    dist.add_argument("--epsilon", type=float, default=0.0)
    dist.add_argument("--class", dest="cls", choices=CLASSES, default="mio")
    dist.add_argument("--json", action="store_true")
    dist.set_defaults(func=cmd_distill)

    haar = sub.add_parser(
        "sample-haar",
        help="Haar-random sampling experiment",
        description="Sample Haar-random pure states and report the "
        "distillable fraction. CSV columns: sample_index, max_prob, "
        "zero_error_bits, fidelity_at_2 (floats at 12 significant digits).",
    )
    haar.add_argument("--dim", type=int, required=True)
    haar.add_argument("--samples", type=int, required=True)
    haar.add_argument("--seed", type=int, default=0)
    haar.add_argument("--out", default=None, help="CSV output path")
    haar.add_argument("--json", action="store_true")
    haar.set_defaults(func=cmd_sample_haar)

    scan = sub.add_parser(
        "rate-scan",
        help="per-copy rate over tensor powers",
        description="Scan the per-copy one-shot rate over tensor powers of "
        "a pure state. CSV columns: n, rate_per_copy, C_r_reference.",
    )
    scan.add_argument("state", help="path to a pure state JSON file")
    scan.add_argument("--epsilon", type=float, default=0.05)
    scan.add_argument("--n-max", type=int, default=8)
    scan.add_argument("--out", default=None, help="CSV output path")
    scan.add_argument("--json", action="store_true")
    scan.set_defaults(func=cmd_rate_scan)

    st = sub.add_parser(
        "selftest",
        help="cross-route consistency battery",
        description="Run every quantity through its two independent "
        "routes over a seeded Haar corpus and compare.",
    )
    st.add_argument("--dims", default="2,3,4,5,6,7,8")
    st.add_argument("--samples", type=int, default=selftest.DEFAULT_SAMPLES)
    st.add_argument("--seed", type=int, default=selftest.DEFAULT_SEED)
    st.add_argument(
        "--tolerance",
        type=float,
        default=1e-6,
        help="cross-route comparison strictness (solver internals are fixed)",
    )
    st.add_argument("--dump-dir", default=".", help="where failing instances go")
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_selftest)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_RESOURCE
    except UnsupportedCombination as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (SolverFailure, ConvergenceFailure) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_SOLVER
    except (CoherenceError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


def entry():
    sys.exit(main())
