"""Run diagnostics: inradius and diameter estimates, enclosure checks,
exponential-rate fits, pinch quantities, and the per-record series schema.

Everything here is measurement; the assertions live with the callers (test
suite and the verify verdicts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .hypmath import HPoint, distances_from, embed_polar, psi, ta_a, xi
from .surface import (GeometryFrame, RadialGraph, embed_nodes,
                      hconvexity_margin, support_components)


# ---------------------------------------------------------------------------
# record schema


@dataclass(frozen=True)
class FlowRecord:
    """One diagnostics row of a flow run; the CSV schema in field order."""

    t: float
    A: float
    V: float
    h: float
    maxH: float
    minH: float
    hconv_margin: float
    inradius_est: float
    psiV: float
    xi_psiV: float
    diameter_est: float
    sigma_min_ratio: float
    f_max: float
    sup_phi_minus_h: float
    projection_eps: float


RECORD_FIELDS = tuple(f.name for f in fields(FlowRecord))


def records_to_csv(records) -> str:
    """Serialize records with 17 significant digits."""
    lines = [",".join(RECORD_FIELDS)]
    for r in records:
        lines.append(",".join(f"{getattr(r, name):.17g}" for name in RECORD_FIELDS))
    return "\n".join(lines) + "\n"


def records_from_csv(text: str):
    """Parse a series written by records_to_csv."""
    rows = [ln for ln in text.strip().splitlines() if ln]
    header = rows[0].split(",")
    if tuple(header) != RECORD_FIELDS:
        raise ValueError("unexpected series header")
    out = []
    for ln in rows[1:]:
        vals = [float(x) for x in ln.split(",")]
        out.append(FlowRecord(**dict(zip(RECORD_FIELDS, vals))))
    return out


# ---------------------------------------------------------------------------
# inradius / diameter


@dataclass(frozen=True)
class InradiusResult:
    rho: float
    center: HPoint


def _center_point(n: int, z: np.ndarray) -> HPoint:
    if n == 1:
        r = float(np.hypot(z[0], z[1]))
        return HPoint(r, (float(math.atan2(z[1], z[0])),))
    r = float(abs(z[0]))
    return HPoint(r, (0.0 if z[0] >= 0 else math.pi, 0.0))


def estimate_inradius(g: RadialGraph, frame: GeometryFrame | None = None,
                      tol: float = 1e-6) -> InradiusResult:
    """Largest ball centered in the enclosed region: maximize the minimum
    distance to the boundary nodes by deterministic compass search.

    For n=2 the center is constrained to the symmetry axis.  At the returned
    tolerance the search is exact enough for the enclosure monitors; the
    boundary is sampled at the nodes, which overestimates the true inradius
    by O(mesh width^2).
    """
    a = g.space.a
    n = g.space.n
    X = embed_nodes(g)

    def objective(z):
        p = _center_point(n, z)
        P = embed_polar(a, p.r, p.direction_vector())
        return float(np.min(distances_from(a, P, X)))

    dim = 2 if n == 1 else 1
    z = np.zeros(dim)
    f0 = objective(z)
    h = 0.5 * f0
    steps = np.vstack([np.eye(dim), -np.eye(dim)])
    for _ in range(400):
        if h < 0.25 * tol:
            break
        cand = [(objective(z + h * d), z + h * d) for d in steps]
        fbest, zbest = max(cand, key=lambda c: c[0])
        if fbest > f0:
            z, f0 = zbest, fbest
        else:
            h *= 0.5
    return InradiusResult(rho=f0, center=_center_point(n, z))


def diameter_estimate(g: RadialGraph, max_nodes: int = 256) -> float:
    """Max pairwise distance over a subsampled node set (extrinsic chordal
    distances in the ambient space, which geodesic balls realize)."""
    X = embed_nodes(g)
    stride = max(1, int(math.ceil(g.N / max_nodes)))
    X = X[::stride]
    a = g.space.a
    Y = X.copy()
    Y[:, 0] = -Y[:, 0]
    ch = -(a * a) * (X @ Y.T)
    return float(np.max(np.arccosh(np.maximum(ch, 1.0))) / a)


# ---------------------------------------------------------------------------
# enclosure checks


@dataclass(frozen=True)
class SandwichResult:
    lower: float      # xi(psi(V))
    upper: float      # psi(V)
    rho: float
    ok: bool
    tol: float


def check_inradius_sandwich(space, rho: float, V: float,
                            tol: float = 1e-3) -> SandwichResult:
    """Enclosure xi(psi(V)) <= rho <= psi(V) for h-convex regions, up to tol."""
    upper = psi(space.a, space.n, V)
    lower = xi(space.a, float(upper))
    ok = (lower - tol) <= rho <= (upper + tol)
    return SandwichResult(lower=float(lower), upper=float(upper), rho=float(rho),
                          ok=bool(ok), tol=tol)


def diameter_bounds(space, V: float) -> tuple[float, float]:
    """Upper bounds for the diameter of an h-convex region of volume V:
    2 (psi(V) + a ln 2) and the curvature-rescaled 2 (psi(V) + ln(2)/a).
    They agree at a = 1."""
    p = psi(space.a, space.n, V)
    return (2.0 * (p + space.a * math.log(2.0)),
            2.0 * (p + math.log(2.0) / space.a))


# ---------------------------------------------------------------------------
# pinch quantities


@dataclass(frozen=True)
class TildeReport:
    f_max: float
    Qtilde_min: float
    Htilde_min: float
    note: str


def tilde_diagnostics(frame: GeometryFrame, n: int) -> TildeReport:
    """Summaries of the shifted curvature quantities on a strictly h-convex
    frame (Htilde > 0 required); checks 0 <= f_max < 1/n^n."""
    hmin = float(np.min(frame.Htilde))
    if hmin <= 0:
        raise ValueError("tilde diagnostics need a strictly h-convex frame "
                         f"(min Htilde = {hmin:.3g})")
    f_max = float(np.max(frame.f))
    cap = 1.0 / n ** n
    if not 0.0 <= f_max < cap:
        raise ValueError(f"pinch quantity out of range: f_max = {f_max:.6g} "
                         f"not in [0, {cap:.6g})")
    note = "f vanishes identically for curves (n=1)" if n == 1 else ""
    return TildeReport(f_max=f_max,
                       Qtilde_min=float(np.min(frame.Qtilde)),
                       Htilde_min=hmin,
                       note=note)


# ---------------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    r_squared: float
    window: tuple
    npoints: int


def fit_decay(t, y, window_frac: float = 0.5, floor: float = 1e-12,
              min_points: int = 10) -> DecayFit:
    """Least-squares fit of log y against t on a tail window.

    The window is the last window_frac of the records collected before y
    first drops under the floor (roundoff territory); the early transient is
    excluded by construction.  Returns the decay rate (positive = decaying),
    the amplitude, and r^2 of the log-linear fit.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be matching 1-d arrays")
    below = np.nonzero(y < floor)[0]
    stop = int(below[0]) if below.size else t.size
    start = stop - int(math.floor(stop * window_frac))
    tw = t[start:stop]
    yw = y[start:stop]
    if tw.size < min_points:
        raise ValueError(f"need at least {min_points} usable records, have {tw.size}")
    if np.any(yw <= 0):
        raise ValueError("series must be positive on the fit window")
    ly = np.log(yw)
    slope, intercept = np.polyfit(tw, ly, 1)
    pred = slope * tw + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return DecayFit(rate=float(-slope), amplitude=float(math.exp(intercept)),
                    r_squared=float(r2), window=(float(tw[0]), float(tw[-1])),
                    npoints=int(tw.size))


# ---------------------------------------------------------------------------
# record assembly


def build_record(g: RadialGraph, frame: GeometryFrame, t: float, h: float,
                 phi: np.ndarray, projection_eps: float = 0.0) -> FlowRecord:
    """Assemble the full diagnostics row for the current state."""
    a = g.space.a
    inr = estimate_inradius(g, frame)
    psiV = float(psi(a, g.space.n, frame.V))
    inner, d = support_components(g, inr.center, frame)
    bound = a * float(ta_a(a, float(np.min(d))))
    f_max = 0.0 if g.space.n == 1 else float(np.max(frame.f))
    return FlowRecord(
        t=float(t),
        A=frame.A,
        V=frame.V,
        h=float(h),
        maxH=float(np.max(frame.H)),
        minH=float(np.min(frame.H)),
        hconv_margin=hconvexity_margin(frame, a),
        inradius_est=inr.rho,
        psiV=psiV,
        xi_psiV=float(xi(a, psiV)),
        diameter_est=diameter_estimate(g),
        sigma_min_ratio=float(np.min(inner)) / bound,
        f_max=f_max,
        sup_phi_minus_h=float(np.max(np.abs(phi - h))),
        projection_eps=float(projection_eps),
    )
