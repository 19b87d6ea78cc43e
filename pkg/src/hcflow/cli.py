"""Command line front end.

    hcflow run --config scenario.toml [--out DIR]
    hcflow check-speed --expr "H^2 + H" [--json]
    hcflow sweep --config scenario.toml --param flow.speed \
                 --values "H,H^2,log(1+H)+H" [--out DIR] [--jobs N]
    hcflow plot --series runs/name/series.csv --out plot.svg
    hcflow verify --config TARGET   (scenario TOML, run dir, or manifest.json)

Exit codes: 0 success, 1 configuration error, 2 simulation abort or I/O
error, 3 invariant violation.  An aborted run still writes its partial
series and a manifest recording the abort reason before exiting.  The
HCFLOW_JOBS environment variable supplies the default for --jobs.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, load_scenario
from .flow import FlowAbort
from .outputs import dump_json, render_series_svg
from .runner import run_scenario, sweep_worker, verdict_lines, verify_run
from .speed import SpeedParseError, check_admissibility

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_VIOLATION = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to the config-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _cmd_run(args) -> int:
    scenario = load_scenario(args.config)
    out_dir = Path(args.out) if args.out else (
        Path(scenario.out_dir) if scenario.out_dir else Path("runs") / scenario.name)
    outcome = run_scenario(scenario, out_dir=out_dir)
    res = outcome.result
    last = res.records[-1]
    print(f"scenario '{scenario.name}': stop_reason={res.stop_reason} "
          f"steps={res.monitors.steps} t_final={res.state.t:.6g}")
    print(f"  sup|phi - h| = {last.sup_phi_minus_h:.3e}   "
          f"A = {last.A:.12g}   V = {last.V:.12g}")
    if res.limit is not None:
        print(f"  limit sphere: radius {res.limit.radius_mean:.12g} "
              f"(closed form {res.limit.radius_closed_form:.12g}, "
              f"rel err {res.limit.radius_rel_err:.2e}, "
              f"spread {res.limit.radius_spread:.2e})")
    if outcome.fit is not None:
        print(f"  decay fit: rate {outcome.fit.rate:.6g}, "
              f"r^2 {outcome.fit.r_squared:.6f} on t in "
              f"[{outcome.fit.window[0]:.3g}, {outcome.fit.window[1]:.3g}]")
    for line in verdict_lines(outcome.verdicts):
        print(line)
    print(f"artifacts written to {out_dir}")
    if outcome.ok:
        return EXIT_OK
    print("invariant violation: one or more verdicts failed", file=sys.stderr)
    return EXIT_VIOLATION


def _cmd_check_speed(args) -> int:
    try:
        report = check_admissibility(args.expr, alpha_min=args.alpha_min,
                                     alpha_max=args.alpha_max,
                                     points=args.points,
                                     attest_limits=args.attest_limits)
    except SpeedParseError as e:
        print(f"config error: {e}", file=sys.stderr)
        src = getattr(e, "source", None)
        pos = getattr(e, "pos", None)
        if src is not None and pos is not None:
            print(f"  {src}", file=sys.stderr)
            print(f"  {' ' * pos}^", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        print(report.summary())
    if report.admissible:
        return EXIT_OK
    print("invariant violation: speed fails the admissibility conditions",
          file=sys.stderr)
    return EXIT_VIOLATION


def _value_slug(text: str) -> str:
    s = re.sub(r"[^A-Za-z0-9.=_-]+", "_", text.strip()).strip("_")
    return s or "value"


def _cmd_sweep(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        print("config error: --values is empty", file=sys.stderr)
        return EXIT_CONFIG
    config = Path(args.config)
    if not config.exists():
        print(f"config error: no such config {config}", file=sys.stderr)
        return EXIT_CONFIG

    out_root = Path(args.out) if args.out else Path("runs") / f"{config.stem}-sweep"
    jobs = []
    for i, value in enumerate(values):
        sub = f"{i:02d}_{_value_slug(value)}"
        jobs.append((str(config), args.param, value, str(out_root / sub)))

    workers = args.jobs
    if workers is None:
        env = os.environ.get("HCFLOW_JOBS")
        if env is not None:
            try:
                workers = int(env)
            except ValueError:
                print(f"config error: HCFLOW_JOBS={env!r} is not an integer",
                      file=sys.stderr)
                return EXIT_CONFIG
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(jobs)))

    if workers == 1:
        results = [sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(sweep_worker, jobs))

    wide = max(len(r["name"]) for r in results)
    code = EXIT_OK
    for r in results:
        head = f"{r['name']:<{wide}}  {args.param}={r['value']}"
        if r["status"] == "config-error":
            code = max(code, EXIT_CONFIG)
            print(f"{head}  CONFIG-ERROR  {r['error']}")
        elif r["status"] in ("aborted", "error"):
            code = max(code, EXIT_ABORT)
            print(f"{head}  ABORTED  {r['error']}")
        else:
            ok = "ok" if r["ok"] else "FAIL " + ",".join(r["failed_verdicts"])
            print(f"{head}  {r['status']}  steps={r['steps']} "
                  f"t={r['t_final']:.6g}  {ok}")
            if not r["ok"]:
                code = max(code, EXIT_VIOLATION)

    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "sweep.json").write_text(dump_json(
        {"config": str(config), "param": args.param, "values": values,
         "jobs": results}))
    print(f"summary written to {out_root / 'sweep.json'}")
    return code


def _cmd_plot(args) -> int:
    csv_path = Path(args.series)
    try:
        svg = render_series_svg(csv_path.read_text(),
                                title=csv_path.parent.name or csv_path.stem)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    ok, lines = verify_run(args.config)
    for line in lines:
        print(line)
    print("verify: OK" if ok else "verify: FAILED")
    if ok:
        return EXIT_OK
    print("invariant violation: one or more verdicts failed", file=sys.stderr)
    return EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hcflow",
        description="Constrained curvature flow laboratory for h-convex "
                    "hypersurfaces in hyperbolic space.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and write its artifacts")
    p.add_argument("--config", required=True, help="scenario TOML file")
    p.add_argument("--out", help="output directory (default: the scenario's "
                                 "output dir, else runs/<name>)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("check-speed", help="grade a speed expression against "
                                           "the admissibility conditions")
    p.add_argument("--expr", required=True,
                   help="speed expression, e.g. 'H^2' or 'log(1 + H) + H'")
    p.add_argument("--alpha-min", type=float, default=1e-6)
    p.add_argument("--alpha-max", type=float, default=1e13)
    p.add_argument("--points", type=int, default=241)
    p.add_argument("--attest-limits", action="store_true",
                   help="accept externally established limit behavior for "
                        "conditions the sampled grid leaves inconclusive")
    p.add_argument("--json", action="store_true",
                   help="print the report as JSON instead of aligned text")
    p.set_defaults(func=_cmd_check_speed)

    p = sub.add_parser("sweep", help="run one scenario repeatedly, varying a "
                                     "single config key")
    p.add_argument("--config", required=True, help="base scenario TOML file")
    p.add_argument("--param", required=True,
                   help="dotted config key to vary, e.g. flow.speed")
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 'H,H^2,log(1+H)+H'")
    p.add_argument("--out", help="root directory for the runs "
                                 "(default runs/<config>-sweep)")
    p.add_argument("--jobs", type=int,
                   help="parallel workers (default: HCFLOW_JOBS, else CPUs)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plot", help="render a series.csv to an SVG")
    p.add_argument("--series", required=True, help="series.csv from a run")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("verify", help="re-grade a scenario file or a finished "
                                      "run directory / manifest.json")
    p.add_argument("--config", required=True,
                   help="scenario TOML, run directory, or manifest.json")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FlowAbort as e:
        print(f"simulation abort: {e.reason}", file=sys.stderr)
        if e.state is not None:
            print(f"  at t={e.state.t:.6g} after {e.state.steps} steps",
                  file=sys.stderr)
        return EXIT_ABORT
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
