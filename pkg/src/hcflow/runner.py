"""Scenario orchestration: run a flow, grade it against the theory's
checkable claims, and write or re-check run directories.

A verdict is one claim with a measured value and a fixed threshold; the set
of applicable verdicts depends on the constraint mode and on whether the run
converged.  verify_run() recomputes the verdicts either by re-running a
scenario file or from the artifacts of a finished run directory, so a run
can be audited without the process that produced it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .config import (ConfigError, Scenario, load_scenario,
                     load_scenario_with_override, parse_override_value)
from .diag import DecayFit, fit_decay, records_from_csv
from .flow import FlowAbort, FlowResult, run_flow
from .outputs import build_manifest, write_run_outputs

THRESHOLDS = {
    "constraint_drift": 1e-10,     # relative, per step, after projection
    "area_increase": 1e-9,         # absolute per-step slack, volume mode
    "volume_decrease": 1e-9,       # absolute per-step slack, area mode
    "margin": -1e-6,               # h-convexity slack for discrete curvatures
    "sandwich_tol": 1e-3,          # inradius enclosure slack
    "diameter_tol": 1e-3,
    "support_ratio": 1.0 - 1e-6,
    "pinch_floor": -1e-12,
    "limit_radius_rel": 1e-6,
    "limit_spread": 1e-6,
    "decay_r2": 0.99,
}


def _verdict(ok: bool, value, threshold, note: str = "") -> dict:
    return {"pass": bool(ok), "value": value, "threshold": threshold, "note": note}


def compute_verdicts(a: float, n: int, constraint: str, monitors: dict,
                     records, limit: dict | None, stop_reason: str,
                     fit: dict | None) -> dict:
    """Grade one run; monitors/limit/fit are plain dictionaries so stored
    manifests can be re-graded the same way as live results."""
    V = {}
    T = THRESHOLDS

    def mon(key, empty):
        # JSON stores the +-inf sentinels of a 0-step run as null
        v = monitors.get(key)
        return empty if v is None else v

    if constraint != "none" and monitors:
        drift = mon("max_constraint_drift", 0.0)
        V["constraint_conserved"] = _verdict(
            drift <= T["constraint_drift"], drift, T["constraint_drift"],
            f"relative drift of the conserved {constraint} after projection")
        if constraint == "volume":
            worst = mon("max_area_increase", -math.inf)
            V["dual_monotone"] = _verdict(
                worst <= T["area_increase"], worst, T["area_increase"],
                "area must not increase under the volume-preserving flow")
        else:
            worst = mon("max_volume_decrease", -math.inf)
            V["dual_monotone"] = _verdict(
                worst <= T["volume_decrease"], worst, T["volume_decrease"],
                "volume must not decrease under the area-preserving flow")

    if monitors:
        margin = mon("min_margin", math.inf)
        V["h_convex_margin"] = _verdict(
            margin >= T["margin"], margin, T["margin"],
            "min over steps and nodes of (lambda - a)")

    if records:
        low = min(r.inradius_est - r.xi_psiV for r in records)
        high = min(r.psiV - r.inradius_est for r in records)
        V["inradius_sandwich"] = _verdict(
            low >= -T["sandwich_tol"] and high >= -T["sandwich_tol"],
            min(low, high), -T["sandwich_tol"],
            "xi(psi(V)) <= inradius <= psi(V), worst slack over records")

        worst = -math.inf
        for r in records:
            bound = max(2.0 * (r.psiV + a * math.log(2.0)),
                        2.0 * (r.psiV + math.log(2.0) / a))
            worst = max(worst, r.diameter_est - bound)
        V["diameter_bound"] = _verdict(
            worst <= T["diameter_tol"], worst, T["diameter_tol"],
            "diameter minus 2(psi(V) + ln 2 shift), worst over records")

        ratio = min(r.sigma_min_ratio for r in records)
        V["support_bound"] = _verdict(
            ratio >= T["support_ratio"], ratio, T["support_ratio"],
            "min <nu, d_r> / (a ta_a(dist to boundary)) from the inball center")

        fvals = [r.f_max for r in records]
        finite = all(math.isfinite(x) for x in fvals)
        fmin = min(fvals) if finite else math.nan
        V["pinch_nonnegative"] = _verdict(
            finite and fmin >= T["pinch_floor"], fmin, T["pinch_floor"],
            "f = 1/n^n - Ktilde/Htilde^n stays defined and nonnegative")

    if stop_reason == "converged" and limit:
        ok = (limit["radius_rel_err"] <= T["limit_radius_rel"]
              and limit["radius_spread"] <= T["limit_spread"])
        V["limit_sphere"] = _verdict(
            ok, {"radius_rel_err": limit["radius_rel_err"],
                 "radius_spread": limit["radius_spread"]},
            {"radius_rel_err": T["limit_radius_rel"],
             "radius_spread": T["limit_spread"]},
            "final shape matches the closed-form sphere of the conserved quantity")

    if stop_reason == "converged" and fit:
        V["exponential_decay"] = _verdict(
            fit["r_squared"] >= T["decay_r2"] and fit["rate"] > 0.0,
            {"rate": fit["rate"], "r_squared": fit["r_squared"]},
            {"rate": 0.0, "r_squared": T["decay_r2"]},
            "log-linear tail fit of sup |phi - h|")

    return V


@dataclass(frozen=True)
class RunOutcome:
    scenario: Scenario
    result: FlowResult
    fit: DecayFit | None
    verdicts: dict
    manifest: dict
    out_dir: Path | None

    @property
    def ok(self) -> bool:
        return all(v["pass"] for v in self.verdicts.values())


def run_scenario(scenario, out_dir=None) -> RunOutcome:
    """Run one scenario (object or path to its TOML); write artifacts when
    out_dir is given.

    An aborted flow still leaves a partial series and a manifest carrying the
    abort reason in out_dir before the FlowAbort propagates.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    try:
        result = run_flow(scenario.build_graph(), scenario.build_flow_config())
    except FlowAbort as e:
        if out_dir is not None and e.partial is not None:
            write_run_outputs(out_dir, scenario, e.partial,
                              abort_reason=e.reason)
        raise

    fit = None
    try:
        fit = fit_decay([r.t for r in result.records],
                        [r.sup_phi_minus_h for r in result.records])
    except ValueError:
        pass

    verdicts = compute_verdicts(
        a=scenario.space.a, n=scenario.space.n, constraint=scenario.constraint,
        monitors=asdict(result.monitors), records=result.records,
        limit=None if result.limit is None else _limit_dict(result.limit),
        stop_reason=result.stop_reason,
        fit=None if fit is None else asdict(fit))

    if out_dir is not None:
        manifest = write_run_outputs(out_dir, scenario, result,
                                     fit=fit, verdicts=verdicts)
        out_dir = Path(out_dir)
    else:
        manifest = build_manifest(scenario, result, fit=fit, verdicts=verdicts)
    return RunOutcome(scenario=scenario, result=result, fit=fit,
                      verdicts=verdicts, manifest=manifest, out_dir=out_dir)


def _limit_dict(limit) -> dict:
    d = asdict(limit)
    d["center"] = {"r": limit.center.r, "dir": list(limit.center.dir)}
    return d


def verdict_lines(verdicts: dict) -> list:
    lines = []
    for name, v in verdicts.items():
        mark = "PASS" if v["pass"] else "FAIL"
        lines.append(f"  [{mark}] {name}: value={v['value']} "
                     f"threshold={v['threshold']}")
    return lines


def verify_run(target) -> tuple:
    """Re-grade a run.  target is a scenario TOML (re-runs it), a run
    directory, or a manifest.json.  Returns (ok, report lines)."""
    p = Path(target)
    if p.is_dir():
        p = p / "manifest.json"

    if p.suffix == ".toml":
        outcome = run_scenario(p)
        lines = [f"re-ran scenario '{outcome.scenario.name}': "
                 f"stop_reason={outcome.result.stop_reason}, "
                 f"steps={outcome.result.monitors.steps}"]
        lines += verdict_lines(outcome.verdicts)
        return outcome.ok, lines

    try:
        manifest = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read manifest {p}: {e}") from e
    if manifest.get("format") != "hcflow-run/1":
        raise ConfigError(f"{p} is not a run manifest")

    scen = manifest["scenario"]
    res = manifest["result"]
    records = []
    series = manifest.get("files", {}).get("series")
    if series and (p.parent / series).exists():
        records = records_from_csv((p.parent / series).read_text())

    verdicts = compute_verdicts(
        a=scen["space"]["a"], n=scen["space"]["n"],
        constraint=scen["flow"]["constraint"],
        monitors=res.get("monitors"), records=records,
        limit=res.get("limit"), stop_reason=res.get("stop_reason"),
        fit=manifest.get("decay_fit"))

    ok = all(v["pass"] for v in verdicts.values())
    lines = [f"re-graded run '{scen['name']}' from artifacts: "
             f"stop_reason={res.get('stop_reason')}, steps={res.get('steps')}"]
    lines += verdict_lines(verdicts)

    stored = manifest.get("verdicts") or {}
    for name in sorted(set(stored) | set(verdicts)):
        was = stored.get(name, {}).get("pass")
        now = verdicts.get(name, {}).get("pass")
        if was is not None and now is not None and was != now:
            ok = False
            lines.append(f"  [FAIL] stored verdict '{name}' disagrees with "
                         f"the artifacts (stored pass={was}, recomputed pass={now})")
    return ok, lines


# ---------------------------------------------------------------------------
# sweeps


def sweep_worker(job) -> dict:
    """Run one sweep point; top-level so process pools can pickle it.

    job = (config path, dotted param, raw value text, output dir).  The value
    is parsed like a TOML scalar, substituted into the config under the
    dotted key, and the scenario renamed after its output directory so the
    sweep's manifests stay distinguishable.
    """
    path, param, value_text, out_dir = job
    run_name = Path(out_dir).name
    base = {"param": param, "value": value_text, "dir": str(out_dir),
            "name": run_name}
    try:
        scenario = load_scenario_with_override(
            path, param=param, value=parse_override_value(value_text))
        scenario = replace(scenario, name=run_name)
        outcome = run_scenario(scenario, out_dir=out_dir)
        limit = outcome.result.limit
        return {**base, "status": outcome.result.stop_reason,
                "ok": outcome.ok,
                "steps": outcome.result.monitors.steps,
                "t_final": outcome.result.state.t,
                "limit_radius": None if limit is None else limit.radius_mean,
                "failed_verdicts": sorted(k for k, v in outcome.verdicts.items()
                                          if not v["pass"])}
    except ConfigError as e:
        return {**base, "status": "config-error", "ok": False, "error": str(e)}
    except FlowAbort as e:
        return {**base, "status": "aborted", "ok": False, "error": e.reason}
    except Exception as e:   # report, don't kill the pool
        return {**base, "status": "error", "ok": False, "error": str(e)}
