"""Closed-form geodesic-sphere quantities and the sphere comparison ODE.

These are the independent references the discrete surface machinery is tested
against: area, enclosed volume and mean curvature of geodesic spheres, the
radius ODE r' = -phi(n co_a(r)) for the unconstrained flow, and inversion of
the closed forms to predict the limit radius of a constrained run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hypmath import SpaceParams, ball_volume, co_a, newton_bracketed, s_a, RANGE_LIMIT
from .speed import SpeedFunction


@dataclass(frozen=True)
class SphereState:
    """Radius with its closed-form area, enclosed volume and mean curvature."""

    R: float
    A: float
    V: float
    H: float


def sphere_area(space: SpaceParams, R: float) -> float:
    """Area: 2 pi s_a(R) for n=1, 4 pi s_a(R)^2 for n=2."""
    s = float(s_a(space.a, R))
    return 2.0 * math.pi * s if space.n == 1 else 4.0 * math.pi * s * s


def sphere_quantities(space: SpaceParams, R: float) -> SphereState:
    """Closed-form state of the geodesic sphere of radius R."""
    if not (math.isfinite(R) and R > 0):
        raise ValueError(f"radius must be finite and positive, got {R!r}")
    return SphereState(R=float(R),
                       A=sphere_area(space, R),
                       V=float(ball_volume(space.a, space.n, R)),
                       H=float(space.n * co_a(space.a, R)))


@dataclass(frozen=True)
class SphereFlowResult:
    """RK4 radius trajectory; collapsed is set when R reached the floor
    before t_end, with the time it happened."""

    t: list
    R: list
    collapsed: bool
    t_collapse: float | None


def standard_flow_ode(space: SpaceParams, speed: SpeedFunction, R0: float,
                      t_end: float, dt: float = 1e-5,
                      forcing: float = 0.0) -> SphereFlowResult:
    """Integrate r' = -phi(n co_a(r)) + forcing with classical RK4.

    The reference uses a fixed step (default 1e-5); the trajectory stops if
    the radius falls to 1e-6.
    """
    if not (R0 > 0 and t_end > 0 and dt > 0):
        raise ValueError("need positive R0, t_end and dt")
    a, n = space.a, space.n

    def rhs(r):
        if r <= 0:
            return 0.0
        return -float(speed(float(n * a / math.tanh(a * r)))) + forcing

    ts = [0.0]
    rs = [float(R0)]
    t, r = 0.0, float(R0)
    nsteps = int(math.ceil(t_end / dt - 1e-12))
    for k in range(nsteps):
        h = min(dt, t_end - t)
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        r_new = r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_new = t + h
        if r_new <= 1e-6:
            ts.append(t_new)
            rs.append(max(r_new, 0.0))
            return SphereFlowResult(ts, rs, collapsed=True, t_collapse=t_new)
        t, r = t_new, r_new
        ts.append(t)
        rs.append(r)
    return SphereFlowResult(ts, rs, collapsed=False, t_collapse=None)


def radius_from_constraint(space: SpaceParams, constraint: str, value: float) -> float:
    """Radius of the geodesic sphere with the given enclosed volume
    (constraint="volume") or area (constraint="area").

    This is the predicted limit radius of a converged constrained run.
    """
    if constraint not in ("volume", "area"):
        raise ValueError(f"constraint must be 'volume' or 'area', got {constraint!r}")
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"constraint value must be finite and positive, got {value!r}")
    a = space.a

    if constraint == "volume":
        fwd = lambda r: float(ball_volume(a, space.n, r))
        dfwd = lambda r: sphere_area(space, r)
    else:
        fwd = lambda r: sphere_area(space, r)
        if space.n == 1:
            dfwd = lambda r: 2.0 * math.pi * math.cosh(a * r)
        else:
            dfwd = lambda r: 8.0 * math.pi * float(s_a(a, r)) * math.cosh(a * r)

    hi = 1.0 / a
    while fwd(hi) < value:
        hi *= 2.0
        if a * hi > RANGE_LIMIT:
            raise ValueError("constraint value exceeds the supported radius range")
    return newton_bracketed(lambda r: fwd(r) - value, 0.0, hi, df=dfwd,
                            xtol=1e-12)
