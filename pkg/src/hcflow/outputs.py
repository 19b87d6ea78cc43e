"""Run artifacts: diagnostics CSV, surface snapshots, SVG plots, and the
manifest that makes a run directory self-describing and re-checkable.

Plots are hand-rolled SVG so runs render anywhere with zero plotting
dependencies; a run needs a line chart and a disk profile, not a toolkit.
"""

from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .diag import records_to_csv
from .surface import RadialGraph


def _package_version() -> str:
    try:
        from importlib import metadata
        return metadata.version("hcflow")
    except Exception:
        return "unknown"


# ---------------------------------------------------------------------------
# SVG primitives

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_ticks(lo: float, hi: float, target: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt_tick(x: float, logy: bool) -> str:
    if logy:
        return f"1e{int(round(x))}"
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-3:
        return f"{x:.1e}"
    return f"{x:.4g}"


def svg_line_plot(series, title: str, xlabel: str, ylabel: str,
                  logy: bool = False, width: int = 760, height: int = 460) -> str:
    """Render labelled (x, y) series as a standalone SVG line chart.

    series: iterable of (label, x, y) or (label, x, y, dash) with dash an SVG
    dash pattern; y <= 0 points are dropped when logy.
    """
    L, R, T, B = 72, 24, 44, 52
    pw, ph = width - L - R, height - T - B

    prepared = []
    for i, item in enumerate(series):
        label, x, y = item[0], item[1], item[2]
        dash = item[3] if len(item) > 3 else None
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logy:
            keep &= y > 0.0
        x, y = x[keep], y[keep]
        if logy:
            y = np.log10(y)
        if x.size:
            prepared.append((label, x, y, _PALETTE[i % len(_PALETTE)], dash))

    if prepared:
        xlo = min(float(np.min(x)) for _, x, _, _, _ in prepared)
        xhi = max(float(np.max(x)) for _, x, _, _, _ in prepared)
        ylo = min(float(np.min(y)) for _, _, y, _, _ in prepared)
        yhi = max(float(np.max(y)) for _, _, y, _, _ in prepared)
    else:
        xlo, xhi, ylo, yhi = 0.0, 1.0, 0.0, 1.0
    if xhi <= xlo:
        xlo, xhi = xlo - 0.5, xlo + 0.5
    if yhi <= ylo:
        ylo, yhi = ylo - 0.5, ylo + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def px(x):
        return L + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return T + ph - (y - ylo) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}" '
           f'font-family="Helvetica, Arial, sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
           f'font-size="15">{title}</text>']

    xticks = _nice_ticks(xlo, xhi)
    yticks = [t for t in _nice_ticks(ylo, yhi) if ylo <= t <= yhi]
    if logy:
        ints = [t for t in range(math.ceil(ylo), math.floor(yhi) + 1)]
        if 1 < len(ints) <= 12:
            yticks = ints
    for t in xticks:
        x = px(t)
        out.append(f'<line x1="{x:.1f}" y1="{T}" x2="{x:.1f}" y2="{T + ph}" '
                   f'stroke="#e0e0e0" stroke-width="1"/>')
        out.append(f'<text x="{x:.1f}" y="{T + ph + 18}" text-anchor="middle">'
                   f'{_fmt_tick(t, False)}</text>')
    for t in yticks:
        y = py(t)
        out.append(f'<line x1="{L}" y1="{y:.1f}" x2="{L + pw}" y2="{y:.1f}" '
                   f'stroke="#e0e0e0" stroke-width="1"/>')
        out.append(f'<text x="{L - 8}" y="{y + 4:.1f}" text-anchor="end">'
                   f'{_fmt_tick(t, logy)}</text>')
    out.append(f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" '
               f'stroke="#444" stroke-width="1"/>')
    out.append(f'<text x="{L + pw / 2:.1f}" y="{height - 12}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="20" y="{T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {T + ph / 2:.1f})">{ylabel}</text>')

    for label, x, y, color, dash in prepared:
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.6"{extra}/>')
    for i, (label, _, _, color, dash) in enumerate(prepared):
        yl = T + 14 + 16 * i
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{L + pw - 190}" y1="{yl}" x2="{L + pw - 164}" '
                   f'y2="{yl}" stroke="{color}" stroke-width="2"{extra}/>')
        out.append(f'<text x="{L + pw - 158}" y="{yl + 4}">{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_disk_profile(g_first: RadialGraph, g_last: RadialGraph,
                     title: str, size: int = 520) -> str:
    """Initial and final surface in the conformal disk model (disk radius
    tanh(a u / 2)); n=2 meridians are mirrored across the rotation axis."""
    c = size / 2.0
    rad = 0.44 * size
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
           f'height="{size}" viewBox="0 0 {size} {size}" '
           f'font-family="Helvetica, Arial, sans-serif" font-size="12">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           f'<text x="{c:.1f}" y="22" text-anchor="middle" font-size="15">'
           f'{title}</text>',
           f'<circle cx="{c:.1f}" cy="{c:.1f}" r="{rad:.1f}" fill="none" '
           f'stroke="#999" stroke-dasharray="3 3"/>',
           f'<circle cx="{c:.1f}" cy="{c:.1f}" r="2" fill="#444"/>']

    def paths(g):
        r = np.tanh(g.space.a * g.u / 2.0)
        if g.space.n == 1:
            th = np.append(g.theta, g.theta[0])
            r = np.append(r, r[0])
            x, y = r * np.cos(th), r * np.sin(th)
            return [(x, y)]
        x, y = r * np.sin(g.theta), r * np.cos(g.theta)
        return [(x, y), (-x, y)]

    for g, color, dash in ((g_first, "#999999", ' stroke-dasharray="5 4"'),
                           (g_last, "#1f77b4", "")):
        for x, y in paths(g):
            pts = " ".join(f"{c + rad * a:.2f},{c - rad * b:.2f}"
                           for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.6"{dash}/>')

    leg_y = size - 30
    out.append(f'<line x1="30" y1="{leg_y}" x2="56" y2="{leg_y}" stroke="#999999" '
               f'stroke-width="2" stroke-dasharray="5 4"/>')
    out.append(f'<text x="62" y="{leg_y + 4}">initial</text>')
    out.append(f'<line x1="120" y1="{leg_y}" x2="146" y2="{leg_y}" '
               f'stroke="#1f77b4" stroke-width="2"/>')
    out.append(f'<text x="152" y="{leg_y + 4}">final</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# run directory


def snapshot_filename(t: float) -> str:
    return f"t_{t:012.6f}.json"


def _jsonable(x):
    """Strict-JSON form: non-finite floats become null, arrays become lists."""
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def dump_json(data: dict) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True,
                      allow_nan=False) + "\n"


def write_run_outputs(out_dir, scenario, result, fit=None, verdicts=None,
                      abort_reason=None) -> dict:
    """Write series.csv, optional snapshots and plots, and manifest.json.

    Aborted runs pass their partial result plus abort_reason; whatever was
    recorded before the abort still lands on disk.  Returns the manifest
    dictionary (also written to disk).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"series": "series.csv", "snapshots": [], "plots": []}

    (out_dir / "series.csv").write_text(records_to_csv(result.records))

    if result.snapshots:
        snap_dir = out_dir / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for snap in result.snapshots:
            name = snapshot_filename(snap["meta"]["t"])
            (snap_dir / name).write_text(dump_json(snap))
            files["snapshots"].append(f"snapshots/{name}")

    if scenario.plots and result.records:
        g_last = result.state.graph if result.state is not None else None
        files["plots"] = write_plots(out_dir, scenario.name, result.records,
                                     scenario.build_graph(), g_last, fit=fit)

    manifest = build_manifest(scenario, result, fit=fit, verdicts=verdicts,
                              files=files, abort_reason=abort_reason)
    (out_dir / "manifest.json").write_text(dump_json(manifest))
    return manifest


def decay_plot_svg(records, title: str, fit=None) -> str:
    """sup|phi - h| and max f on log-linear axes, with the fitted exponential
    tail overlaid when a fit is available (rate shown in the legend)."""
    t = [r.t for r in records]
    series = [("sup |phi(H) - h|", t, [r.sup_phi_minus_h for r in records])]
    if any(r.f_max > 0.0 for r in records):
        series.append(("max f", t, [r.f_max for r in records]))
    if fit is not None:
        t0, t1 = fit["window"] if isinstance(fit, dict) else fit.window
        rate = fit["rate"] if isinstance(fit, dict) else fit.rate
        amp = fit["amplitude"] if isinstance(fit, dict) else fit.amplitude
        series.append((f"fit: rate {rate:.4g}", [t0, t1],
                       [amp * math.exp(-rate * t0), amp * math.exp(-rate * t1)],
                       "6 4"))
    return svg_line_plot(series, title=title, xlabel="t",
                         ylabel="log10 of decay quantities", logy=True)


def conserved_plot_svg(records, title: str) -> str:
    """Area and enclosed volume against time."""
    t = [r.t for r in records]
    return svg_line_plot(
        [("A(t)", t, [r.A for r in records]),
         ("V(t)", t, [r.V for r in records])],
        title=title, xlabel="t", ylabel="area / volume")


def write_plots(out_dir, name: str, records, g_first, g_last=None,
                fit=None) -> list:
    """Write the standard plot set under out_dir/plots; returns the relative
    paths.  The disk profile is skipped when the final shape is unknown."""
    plot_dir = Path(out_dir) / "plots"
    plot_dir.mkdir(parents=True, exist_ok=True)
    written = []

    (plot_dir / "decay.svg").write_text(
        decay_plot_svg(records, f"{name}: decay toward the limit sphere", fit))
    written.append("plots/decay.svg")

    (plot_dir / "conserved.svg").write_text(
        conserved_plot_svg(records, f"{name}: area and volume"))
    written.append("plots/conserved.svg")

    if g_last is not None:
        profile = svg_disk_profile(g_first, g_last,
                                   title=f"{name}: disk-model profile")
        (plot_dir / "profile.svg").write_text(profile)
        written.append("plots/profile.svg")
    return written


def _stack_svgs(panels, width: int = 760) -> str:
    """Stack standalone SVG documents vertically into one document."""
    parts = []
    y = 0
    for text, w, h in panels:
        body = text[text.index(">") + 1: text.rindex("</svg>")]
        parts.append(f'<svg x="0" y="{y}" width="{w}" height="{h}" '
                     f'viewBox="0 0 {w} {h}">{body}</svg>')
        y += h
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{y}" viewBox="0 0 {width} {y}">'
            + "".join(parts) + "</svg>\n")


def render_series_svg(csv_text: str, title: str = "flow series") -> str:
    """Render a series.csv into one SVG with the decay and A/V panels; used
    by the plot subcommand so a CSV can be re-plotted without the run state."""
    from .diag import fit_decay, records_from_csv

    records = records_from_csv(csv_text)
    if not records:
        raise ValueError("the series holds no records")
    fit = None
    try:
        fit = fit_decay([r.t for r in records],
                        [r.sup_phi_minus_h for r in records])
    except ValueError:
        pass
    return _stack_svgs([
        (decay_plot_svg(records, f"{title}: decay", fit), 760, 460),
        (conserved_plot_svg(records, f"{title}: area and volume"), 760, 460),
    ])


def build_manifest(scenario, result, fit=None, verdicts=None, files=None,
                   abort_reason=None) -> dict:
    last = result.records[-1] if result.records else None
    limit = None
    if result.limit is not None:
        limit = asdict(result.limit)
        limit["center"] = {"r": result.limit.center.r,
                           "dir": list(result.limit.center.dir)}
    return {
        "format": "hcflow-run/1",
        "scenario": scenario.effective(),
        "environment": {
            "package": _package_version(),
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "result": {
            "stop_reason": result.stop_reason,
            "abort_reason": abort_reason,
            "steps": result.monitors.steps,
            "t_final": None if result.state is None else result.state.t,
            "sup_phi_minus_h_final": None if last is None else last.sup_phi_minus_h,
            "monitors": asdict(result.monitors),
            "limit": limit,
        },
        "decay_fit": None if fit is None else asdict(fit),
        "verdicts": verdicts or {},
        "files": files or {},
    }
