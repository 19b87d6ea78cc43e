"""Time integrator for constrained curvature flow of radial graphs.

The surface moves with normal velocity -phi(H) + h(t), which for a radial
graph is the radial update du/dt = (h - phi(H)) v.  The nonlocal forcing h
is the measure-weighted average that freezes the enclosed volume
(h = int phi dmu / A) or the boundary area (h = int H phi dmu / int H dmu),
and is recomputed at every stage.  Stepping is explicit Heun with a
curvature-scaled step size

    dt = cfl * min_i  s_a(u_i)^2 v_i^3 dtheta^2 / (n phi'(H_i)),

the parabolic scale of the linearized operator.  Floating-point drift of the
conserved functional is removed after every step by a Newton projection in a
uniform radial shift, using the exact derivative of the discrete functional,
so conservation holds to roundoff for the whole run regardless of length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diag import build_record, estimate_inradius
from .hypmath import HPoint, distances_from, embed
from .speed import SpeedDomainError, SpeedFunction, parse_speed
from .sphere import radius_from_constraint
from .surface import (GeometryFrame, RadialGraph, _wderivs, embed_nodes,
                      geometry, hconvexity_margin, quadrature_weights,
                      snapshot_dict)

DT_FLOOR = 1e-14
CONSTRAINTS = ("volume", "area", "none")


class FlowAbort(RuntimeError):
    """The integrator left its admissible regime; carries the last state and
    the partial result (records and monitors up to the failure)."""

    def __init__(self, reason: str, state=None, partial=None):
        super().__init__(reason)
        self.reason = reason
        self.state = state
        self.partial = partial


@dataclass(frozen=True)
class FlowConfig:
    """Integrator controls; `dt` overrides the curvature-scaled step size."""

    speed: SpeedFunction
    constraint: str = "volume"
    cfl: float = 0.4
    t_end: float = 50.0
    dt: float | None = None
    projection: bool = True
    stop_eps: float = 1e-8
    record_every: int = 20
    max_steps: int = 20_000_000
    keep_snapshots: bool = False

    def __post_init__(self):
        if isinstance(self.speed, str):
            object.__setattr__(self, "speed", parse_speed(self.speed))
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {CONSTRAINTS}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("fixed dt must be positive")
        if not self.stop_eps > 0.0:
            raise ValueError("stop_eps must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class FlowState:
    t: float
    graph: RadialGraph
    frame: GeometryFrame
    h: float
    phi: np.ndarray
    dt_last: float
    steps: int


@dataclass(frozen=True)
class FlowMonitors:
    """Per-step worst cases over the whole run."""

    min_margin: float            # min over steps of min(lambda) - a
    max_constraint_drift: float  # |C - C0| / |C0| after each step
    max_area_increase: float     # largest single-step increase of A
    max_volume_decrease: float   # largest single-step decrease of V
    max_maxphi_increase: float   # largest single-step increase of max phi, t >= 0.1
    min_dt: float
    steps: int


@dataclass(frozen=True)
class LimitReport:
    """Comparison of the final shape against the closed-form limit sphere."""

    center: HPoint
    radius_mean: float
    radius_spread: float        # max - min node distance from the center
    radius_closed_form: float   # sphere radius with the conserved A or V
    radius_rel_err: float
    constraint: str
    constraint_value: float


@dataclass(frozen=True)
class FlowResult:
    state: FlowState
    records: list
    monitors: FlowMonitors
    stop_reason: str            # converged | t_end | max_steps
    limit: LimitReport | None
    snapshots: list


def forcing_value(frame: GeometryFrame, phi: np.ndarray, constraint: str) -> float:
    """Nonlocal forcing h for the given constraint mode."""
    if constraint == "volume":
        return float(np.sum(phi * frame.dmu) / frame.A)
    if constraint == "area":
        return float(np.sum(frame.H * phi * frame.dmu) / np.sum(frame.H * frame.dmu))
    if constraint == "none":
        return 0.0
    raise ValueError(f"constraint must be one of {CONSTRAINTS}")


def _stage(g: RadialGraph, speed: SpeedFunction, constraint: str,
           frame: GeometryFrame | None = None):
    if frame is None:
        frame = geometry(g)
    phi, dphi, _ = speed.eval(frame.H)
    h = forcing_value(frame, phi, constraint)
    return frame, phi, dphi, h


def _cfl_dt(g: RadialGraph, frame: GeometryFrame, dphi: np.ndarray) -> float:
    a, n = g.space.a, g.space.n
    dth = (2.0 * math.pi if n == 1 else math.pi) / g.N
    s = np.sinh(a * g.u) / a
    return float(np.min(s * s * frame.v ** 3 * dth * dth / (n * dphi)))


def _constraint_value(frame: GeometryFrame, constraint: str) -> float:
    return frame.V if constraint == "volume" else frame.A


def _constraint_derivative(g: RadialGraph, frame: GeometryFrame,
                           constraint: str) -> float:
    """d/d eps of the discrete functional under u -> u + eps, exactly as the
    quadrature in geometry() sees it (the w' sensitivity goes through the
    same difference stencil)."""
    a, n = g.space.a, g.space.n
    w = quadrature_weights(g)
    s = np.sinh(a * g.u) / a
    if constraint == "volume":
        return float(np.sum(s ** n * w))
    c = np.cosh(a * g.u)
    dth = (2.0 * math.pi if n == 1 else math.pi) / g.N
    dwp, _ = _wderivs(1.0 / s, dth, n)
    dv = frame.wp * dwp / frame.v
    return float(np.sum((n * s ** (n - 1) * c * frame.v + s ** n * dv) * w))


def _project(g: RadialGraph, C0: float, constraint: str):
    """Shift all radii by the eps that restores the conserved functional.

    Newton on the scalar equation C(u + eps) = C0; the derivative is exact,
    so two or three iterations reach roundoff.  Returns the corrected graph,
    the applied eps and its geometry frame.
    """
    eps = 0.0
    u = g.u
    tol = 1e-15 * max(1.0, abs(C0))
    for _ in range(30):
        try:
            gg = g.with_u(u + eps) if eps != 0.0 else g
        except ValueError as e:
            raise FlowAbort(f"projection left the admissible radius range: {e}")
        frame = geometry(gg)
        resid = _constraint_value(frame, constraint) - C0
        if abs(resid) <= tol:
            return gg, eps, frame
        eps -= resid / _constraint_derivative(gg, frame, constraint)
    raise FlowAbort("constraint projection did not converge")


def run_flow(g0: RadialGraph, cfg: FlowConfig) -> FlowResult:
    """Integrate the flow from g0 until sup|phi(H) - h| < stop_eps, t_end,
    or max_steps; FlowAbort on numerical breakdown."""
    g = g0
    a = g.space.a
    t = 0.0
    steps = 0
    eps_last = 0.0
    dt_last = math.nan

    def state_now():
        return FlowState(t=t, graph=g, frame=frame, h=h, phi=phi,
                         dt_last=dt_last, steps=steps)

    try:
        frame, phi, dphi, h = _stage(g, cfg.speed, cfg.constraint)
    except SpeedDomainError as e:
        raise FlowAbort(f"speed undefined on the initial data: {e}") from e

    C0 = _constraint_value(frame, cfg.constraint) if cfg.constraint != "none" else math.nan
    A_prev, V_prev = frame.A, frame.V
    maxphi_prev = float(np.max(phi))

    mon = {"min_margin": math.inf, "max_constraint_drift": 0.0,
           "max_area_increase": -math.inf, "max_volume_decrease": -math.inf,
           "max_maxphi_increase": -math.inf, "min_dt": math.inf}
    records: list = []
    snapshots: list = []
    stop_reason = None

    try:
        while True:
            if not np.all(np.isfinite(phi)):
                raise FlowAbort("speed became non-finite")
            if np.any(dphi <= 0.0) or not np.all(np.isfinite(dphi)):
                raise FlowAbort("speed derivative is not positive on the surface")
            mon["min_margin"] = min(mon["min_margin"], hconvexity_margin(frame, a))

            sup = float(np.max(np.abs(phi - h)))
            if sup < cfg.stop_eps:
                stop_reason = "converged"
            elif t >= cfg.t_end - 1e-12 * max(1.0, cfg.t_end):
                stop_reason = "t_end"
            elif steps >= cfg.max_steps:
                stop_reason = "max_steps"

            if stop_reason or steps % cfg.record_every == 0:
                records.append(build_record(g, frame, t, h, phi, eps_last))
                if cfg.keep_snapshots:
                    snapshots.append(snapshot_dict(g, t))
            if stop_reason:
                break

            dt = cfg.dt if cfg.dt is not None else cfg.cfl * _cfl_dt(g, frame, dphi)
            dt = min(dt, cfg.t_end - t)
            last_err = ""
            for _ in range(45):
                if dt < DT_FLOOR:
                    raise FlowAbort("step size underflow"
                                    + (f" ({last_err})" if last_err else ""))
                try:
                    k1 = (h - phi) * frame.v
                    g_mid = g.with_u(g.u + dt * k1)
                    frame_mid, phi_mid, _, h_mid = _stage(g_mid, cfg.speed,
                                                          cfg.constraint)
                    k2 = (h_mid - phi_mid) * frame_mid.v
                    g_new = g.with_u(g.u + 0.5 * dt * (k1 + k2))
                    break
                except (ValueError, SpeedDomainError) as e:
                    last_err = str(e)
                    dt *= 0.5
            else:
                raise FlowAbort(f"step size collapsed ({last_err})")

            eps_last = 0.0
            frame_new = None
            if cfg.projection and cfg.constraint != "none":
                g_new, eps_last, frame_new = _project(g_new, C0, cfg.constraint)

            try:
                frame_new, phi_new, dphi_new, h_new = _stage(
                    g_new, cfg.speed, cfg.constraint, frame=frame_new)
            except SpeedDomainError as e:
                raise FlowAbort(f"speed undefined after the step: {e}") from e

            if cfg.constraint != "none":
                drift = abs(_constraint_value(frame_new, cfg.constraint) - C0) / abs(C0)
                mon["max_constraint_drift"] = max(mon["max_constraint_drift"], drift)
            mon["max_area_increase"] = max(mon["max_area_increase"],
                                           frame_new.A - A_prev)
            mon["max_volume_decrease"] = max(mon["max_volume_decrease"],
                                             V_prev - frame_new.V)
            maxphi_new = float(np.max(phi_new))
            if t >= 0.1:
                mon["max_maxphi_increase"] = max(mon["max_maxphi_increase"],
                                                 maxphi_new - maxphi_prev)
            mon["min_dt"] = min(mon["min_dt"], dt)
            A_prev, V_prev, maxphi_prev = frame_new.A, frame_new.V, maxphi_new

            t += dt
            steps += 1
            dt_last = dt
            g, frame, phi, dphi, h = g_new, frame_new, phi_new, dphi_new, h_new
    except FlowAbort as e:
        if e.state is None:
            e.state = state_now()
        e.partial = FlowResult(state=e.state, records=records,
                               monitors=FlowMonitors(steps=steps, **mon),
                               stop_reason="aborted", limit=None,
                               snapshots=snapshots)
        raise

    limit = None
    if stop_reason == "converged" and cfg.constraint != "none":
        limit = _limit_report(g, cfg.constraint, C0)

    monitors = FlowMonitors(steps=steps, **mon)
    return FlowResult(state=state_now(), records=records, monitors=monitors,
                      stop_reason=stop_reason, limit=limit, snapshots=snapshots)


def _limit_report(g: RadialGraph, constraint: str, C0: float) -> LimitReport:
    # recover the limit center to high accuracy so the spread measurement is
    # not polluted by the center search itself
    inr = estimate_inradius(g, tol=1e-10)
    P = embed(g.space.a, inr.center)
    d = distances_from(g.space.a, P, embed_nodes(g))
    r_mean = float(np.mean(d))
    spread = float(np.max(d) - np.min(d))
    r_exact = radius_from_constraint(g.space, constraint, C0)
    return LimitReport(center=inr.center, radius_mean=r_mean,
                       radius_spread=spread, radius_closed_form=r_exact,
                       radius_rel_err=abs(r_mean - r_exact) / r_exact,
                       constraint=constraint, constraint_value=C0)
