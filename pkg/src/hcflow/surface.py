"""Discrete radial graphs and their extrinsic geometry.

A closed hypersurface star-shaped about the base point is stored as radial
distances u over a fixed angular grid:

  n = 1  periodic grid theta_i = 2 pi i / N on the circle;
  n = 2  axisymmetric profile on cell centers theta_i = (i + 1/2) pi / N of
         the polar angle, with even-reflection ghosts at both poles.

All curvature formulas run through the flattening variable w with
dw/du = 1/s_a(u), in closed form w = ln tanh(a u / 2):

  v            = sqrt(1 + w'^2)
  lam_meridian = (c_a(u) v^2 - w'') / (s_a(u) v^3)
  lam_parallel = (c_a(u) - cot(theta) w') / (s_a(u) v)   (n = 2)

with the parallel curvature at the two cells nearest the poles evaluated in
the limit form (c_a - w'') / (s_a v).  Derivatives are centered second-order
differences.  Angular quadrature uses exact per-cell integrals of the sin
factor for n = 2, so geodesic spheres reproduce their closed-form area and
volume to machine precision at any resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypmath import SpaceParams, HPoint, s_a, c_a, ta_a, embed, embed_polar, \
    minkowski_dot, radial_tangents_from, _check_range


@dataclass(frozen=True)
class RadialGraph:
    """Radial graph: space parameters, angular nodes theta, radii u."""

    space: SpaceParams
    theta: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if theta.ndim != 1 or u.shape != theta.shape:
            raise ValueError("theta and u must be matching 1-d arrays")
        if theta.size < 8:
            raise ValueError("need at least 8 angular nodes")
        if not np.all(np.isfinite(u)) or np.any(u <= 0):
            raise ValueError("radii must be finite and positive")
        _check_range(self.space.a, u)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "u", u)

    @property
    def N(self) -> int:
        return self.theta.size

    def with_u(self, u: np.ndarray) -> "RadialGraph":
        return RadialGraph(self.space, self.theta, u)


def uniform_grid(space: SpaceParams, N: int) -> np.ndarray:
    """Standard angular grid: periodic for n=1, pole-free cell centers for n=2."""
    if N < 8:
        raise ValueError("need at least 8 angular nodes")
    if space.n == 1:
        return 2.0 * math.pi * np.arange(N) / N
    return (np.arange(N) + 0.5) * math.pi / N


def sphere_graph(space: SpaceParams, N: int, R: float) -> RadialGraph:
    """Geodesic sphere of radius R about the base point."""
    return RadialGraph(space, uniform_grid(space, N), np.full(N, float(R)))


def perturbed_graph(space: SpaceParams, N: int, R: float, mode: int,
                    amplitude: float) -> RadialGraph:
    """Sphere with a cosine perturbation u = R + amplitude cos(mode * theta)."""
    if abs(amplitude) >= R:
        raise ValueError("perturbation amplitude must stay below the base radius")
    th = uniform_grid(space, N)
    return RadialGraph(space, th, R + amplitude * np.cos(mode * th))


def offset_sphere_graph(space: SpaceParams, N: int, R: float, offset: float) -> RadialGraph:
    """Geodesic sphere of radius R centered at distance `offset` along the
    theta = 0 axis, written as a radial graph about the base point.

    Requires offset < R so the base point stays inside.  The profile solves
    the law of cosines for u(theta) in closed form; the exact curvature is
    n co_a(R) at every node, which makes these graphs the reference objects
    for discretization-error studies (a constant-u sphere is differenced
    exactly and shows no error at all).
    """
    if not 0 <= offset < R:
        raise ValueError("need 0 <= offset < R so the base point is enclosed")
    th = uniform_grid(space, N)
    a = space.a
    C = math.cosh(a * offset)
    S = math.sinh(a * offset)
    m = np.sqrt(C * C - (S * np.cos(th)) ** 2)
    eta = np.arcsinh(S * np.cos(th) / m)
    x = eta + np.arccosh(np.cosh(a * R) / m)
    return RadialGraph(space, th, x / a)


@dataclass(frozen=True)
class GeometryFrame:
    """Pointwise geometry of a radial graph.

    lam columns are principal curvatures (meridian first); H their sum, A2
    the sum of squares.  The shifted quantities subtract the horospherical
    threshold a: Htilde = H - n a, Ktilde = prod(lam_i - a), Qtilde =
    Ktilde/Htilde^n (NaN where Htilde <= 0), and f = 1/n^n - Qtilde >= 0
    measures the pinch toward umbilicity.  dmu are per-node measure weights
    summing to the area A; V is the enclosed volume.
    """

    v: np.ndarray
    lam: np.ndarray
    H: np.ndarray
    A2: np.ndarray
    Htilde: np.ndarray
    Ktilde: np.ndarray
    Qtilde: np.ndarray
    f: np.ndarray
    dmu: np.ndarray
    A: float
    V: float
    wp: np.ndarray      # discrete w' used by the normal field


def _wderivs(W: np.ndarray, dth: float, n: int):
    if n == 1:
        Wf = np.roll(W, -1)
        Wb = np.roll(W, 1)
    else:
        # even reflection across both poles
        Wf = np.concatenate([W[1:], W[-1:]])
        Wb = np.concatenate([W[:1], W[:-1]])
    return (Wf - Wb) / (2.0 * dth), (Wf - 2.0 * W + Wb) / (dth * dth)


def geometry(g: RadialGraph) -> GeometryFrame:
    """Evaluate the full geometry frame of a radial graph."""
    a = g.space.a
    n = g.space.n
    u = g.u
    th = g.theta
    dth = (2.0 * math.pi if n == 1 else math.pi) / g.N

    au = a * u
    s = np.sinh(au) / a
    c = np.cosh(au)
    W = np.log(np.tanh(au / 2.0))
    wp, wpp = _wderivs(W, dth, n)
    v2 = 1.0 + wp * wp
    v = np.sqrt(v2)
    v3 = v2 * v

    lam_m = (c * v2 - wpp) / (s * v3)
    if n == 1:
        lam = lam_m[:, None]
        H = lam_m
        A2 = lam_m * lam_m
        dmu = s * v * dth
        V = float(np.sum((c - 1.0) / a**2) * dth)
        Htilde = H - a
        Ktilde = Htilde.copy()
        Qtilde = np.ones_like(H)
        f = np.zeros_like(H)
    else:
        lam_p = (c - wp / np.tan(th)) / (s * v)
        lam_p[0] = (c[0] - wpp[0]) / (s[0] * v[0])
        lam_p[-1] = (c[-1] - wpp[-1]) / (s[-1] * v[-1])
        lam = np.stack([lam_m, lam_p], axis=1)
        H = lam_m + lam_p
        A2 = lam_m * lam_m + lam_p * lam_p
        wsin = 2.0 * math.sin(dth / 2.0) * np.sin(th)   # exact cell integral of sin
        dmu = 2.0 * math.pi * s * s * v * wsin
        V = float(np.sum(2.0 * math.pi * (s * c - u) / (2.0 * a**2) * wsin))
        Htilde = H - 2.0 * a
        lt1 = lam_m - a
        lt2 = lam_p - a
        Ktilde = lt1 * lt2
        with np.errstate(divide="ignore", invalid="ignore"):
            Qtilde = np.where(Htilde > 0, Ktilde / (Htilde * Htilde), np.nan)
            # same quantity as 1/4 - Qtilde, but exact near umbilic points
            f = np.where(Htilde > 0, (lt1 - lt2) ** 2 / (4.0 * Htilde * Htilde), np.nan)

    return GeometryFrame(v=v, lam=lam, H=H, A2=A2, Htilde=Htilde, Ktilde=Ktilde,
                         Qtilde=Qtilde, f=f, dmu=dmu, A=float(np.sum(dmu)), V=V, wp=wp)


def quadrature_weights(g: RadialGraph) -> np.ndarray:
    """Angular weights w_i with sum w_i = vol(S^n): dth for n=1, the exact
    cell integrals 2 pi * 2 sin(dth/2) sin(theta_i) for n=2."""
    dth = (2.0 * math.pi if g.space.n == 1 else math.pi) / g.N
    if g.space.n == 1:
        return np.full(g.N, dth)
    return 2.0 * math.pi * 2.0 * math.sin(dth / 2.0) * np.sin(g.theta)


def embed_nodes(g: RadialGraph) -> np.ndarray:
    """Hyperboloid coordinates of all nodes; for n=2 the phi=0 meridian
    represents the axisymmetric orbit."""
    if g.space.n == 1:
        D = np.stack([np.cos(g.theta), np.sin(g.theta)], axis=1)
    else:
        D = np.stack([np.sin(g.theta), np.zeros(g.N), np.cos(g.theta)], axis=1)
    return embed_polar(g.space.a, g.u, D)


def outward_normals(g: RadialGraph, frame: GeometryFrame | None = None) -> np.ndarray:
    """Outward unit normals at all nodes in hyperboloid coordinates.

    nu = (d_r - (w'/s_a) d_theta)/v; satisfies <nu,nu>_M = 1, <nu,X>_M = 0
    and <nu, d_r> = 1/v > 0.
    """
    if frame is None:
        frame = geometry(g)
    a = g.space.a
    au = a * g.u
    sh = np.sinh(au)
    ch = np.cosh(au)
    if g.space.n == 1:
        D = np.stack([np.cos(g.theta), np.sin(g.theta)], axis=1)
        Dt = np.stack([-np.sin(g.theta), np.cos(g.theta)], axis=1)
    else:
        D = np.stack([np.sin(g.theta), np.zeros(g.N), np.cos(g.theta)], axis=1)
        Dt = np.stack([np.cos(g.theta), np.zeros(g.N), -np.sin(g.theta)], axis=1)
    spatial = ch[:, None] * D - frame.wp[:, None] * Dt
    nu = np.concatenate([sh[:, None], spatial], axis=1)
    return nu / frame.v[:, None]


def outward_normal(g: RadialGraph, i: int, frame: GeometryFrame | None = None) -> np.ndarray:
    """Outward unit normal at node i."""
    return outward_normals(g, frame)[int(i)]


def support_components(g: RadialGraph, p: HPoint,
                       frame: GeometryFrame | None = None):
    """Per-node inner products <nu, d_{r_p}> and distances from the probe p.

    p must be strictly inside the enclosed region (checked against the
    interpolated radial profile in p's direction).
    """
    if p.n != g.space.n:
        raise ValueError("probe dimension does not match the graph")
    _require_interior(g, p)
    P = embed(g.space.a, p)
    X = embed_nodes(g)
    T, d = radial_tangents_from(g.space.a, P, X)
    nu = outward_normals(g, frame)
    return minkowski_dot(nu, T), d


def support_sigma(g: RadialGraph, p: HPoint,
                  frame: GeometryFrame | None = None) -> np.ndarray:
    """Support-type quantity sigma = s_a(d(p, x)) <nu(x), d_{r_p}> per node."""
    inner, d = support_components(g, p, frame)
    return s_a(g.space.a, d) * inner


def support_lower_bound(g: RadialGraph, p: HPoint) -> float:
    """Lower bound a * ta_a(dist(p, boundary)) that <nu, d_{r_p}> must clear;
    the boundary distance is the minimum over nodes."""
    P = embed(g.space.a, p)
    X = embed_nodes(g)
    from .hypmath import distances_from
    rho = float(np.min(distances_from(g.space.a, P, X)))
    return float(g.space.a * ta_a(g.space.a, rho))


def _require_interior(g: RadialGraph, p: HPoint):
    if p.r == 0.0:
        return
    th = p.dir[0] % (2.0 * math.pi) if g.space.n == 1 else p.dir[0]
    if g.space.n == 1:
        pos = th / (2.0 * math.pi / g.N)
        i0 = int(math.floor(pos)) % g.N
        i1 = (i0 + 1) % g.N
        frac = pos - math.floor(pos)
    else:
        th = min(max(th, 0.0), math.pi)
        pos = th / (math.pi / g.N) - 0.5
        pos = min(max(pos, 0.0), g.N - 1.0)
        i0 = int(math.floor(pos))
        i1 = min(i0 + 1, g.N - 1)
        frac = pos - i0
    u_here = (1.0 - frac) * g.u[i0] + frac * g.u[i1]
    if p.r >= u_here:
        raise ValueError("probe point must lie strictly inside the enclosed region")


def hconvexity_margin(frame: GeometryFrame, a: float) -> float:
    """min over nodes and principal directions of (lambda - a); the surface
    is h-convex exactly when this is nonnegative."""
    return float(np.min(frame.lam) - a)


def snapshot_dict(g: RadialGraph, t: float) -> dict:
    """Surface snapshot: {"meta": {a, n, N, t}, "theta": [...], "u": [...]}"""
    return {
        "meta": {"a": g.space.a, "n": g.space.n, "N": g.N, "t": float(t)},
        "theta": [float(x) for x in g.theta],
        "u": [float(x) for x in g.u],
    }


def graph_from_snapshot(d: dict) -> tuple[RadialGraph, float]:
    """Rebuild (graph, t) from a snapshot dictionary."""
    meta = d["meta"]
    space = SpaceParams(a=float(meta["a"]), n=int(meta["n"]))
    g = RadialGraph(space, np.asarray(d["theta"], dtype=float),
                    np.asarray(d["u"], dtype=float))
    if g.N != int(meta["N"]):
        raise ValueError("snapshot meta.N does not match the node arrays")
    return g, float(meta["t"])
