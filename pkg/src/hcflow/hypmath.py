"""Primitives for hyperbolic space of sectional curvature -a^2.

Points live in geodesic polar coordinates (r, direction) about a fixed base
point; computations that need an ambient model use the hyperboloid
{<X,X>_M = -1/a^2} in Minkowski R^{n+2}.  The generalized trigonometric
functions s_a, c_a, ta_a, co_a carry the curvature dependence everywhere else:

    s_a(t) = sinh(a t)/a      c_a(t) = cosh(a t)
    ta_a   = s_a/c_a          co_a   = c_a/s_a

They satisfy c_a^2 - a^2 s_a^2 = 1 and are numerically safe for |a t| <= 50;
beyond that they raise rather than overflow silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RANGE_LIMIT = 50.0
LN2 = math.log(2.0)


@dataclass(frozen=True)
class SpaceParams:
    """Ambient space: curvature -a^2, hypersurface dimension n (1 or 2)."""

    a: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"curvature parameter a must be finite and positive, got {self.a!r}")
        if self.n not in (1, 2):
            raise ValueError(f"hypersurface dimension n must be 1 or 2, got {self.n!r}")
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True)
class HPoint:
    """Point in polar coordinates: geodesic distance r from the base point and
    a unit direction (angle theta for n=1, polar pair (theta, phi) for n=2)."""

    r: float
    dir: tuple

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"radial coordinate must be finite and >= 0, got {self.r!r}")
        d = self.dir
        if isinstance(d, (int, float)):
            d = (float(d),)
        else:
            d = tuple(float(x) for x in d)
        if len(d) not in (1, 2):
            raise ValueError("direction must be an angle (n=1) or a polar pair (n=2)")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "dir", d)

    @property
    def n(self) -> int:
        return len(self.dir)

    def direction_vector(self) -> np.ndarray:
        """Unit vector in R^{n+1} for this direction."""
        if len(self.dir) == 1:
            t = self.dir[0]
            return np.array([math.cos(t), math.sin(t)])
        t, p = self.dir
        return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])


def _check_range(a, t):
    at = np.asarray(a * np.asarray(t, dtype=float))
    if np.any(np.abs(at) > RANGE_LIMIT):
        bad = np.max(np.abs(at))
        raise ValueError(f"|a*t| = {bad:.3g} exceeds the supported range {RANGE_LIMIT}")


def s_a(a: float, t):
    """Generalized sine sinh(a t)/a."""
    _check_range(a, t)
    return np.sinh(a * np.asarray(t, dtype=float)) / a


def c_a(a: float, t):
    """Generalized cosine cosh(a t)."""
    _check_range(a, t)
    return np.cosh(a * np.asarray(t, dtype=float))


def ta_a(a: float, t):
    """Generalized tangent s_a/c_a = tanh(a t)/a."""
    _check_range(a, t)
    return np.tanh(a * np.asarray(t, dtype=float)) / a


def co_a(a: float, t):
    """Generalized cotangent c_a/s_a; has a pole at t = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t == 0.0):
        raise ValueError("co_a has a pole at t = 0")
    _check_range(a, t)
    return a / np.tanh(a * t)


def minkowski_dot(X, Y):
    """Lorentzian inner product -x0 y0 + x.y over the last axis."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return -X[..., 0] * Y[..., 0] + np.sum(X[..., 1:] * Y[..., 1:], axis=-1)


def embed_polar(a: float, r, D):
    """Hyperboloid embedding of polar points: X = (c_a(r), a s_a(r) D)/a.

    r has shape (...,), D shape (..., n+1) of unit directions; result has
    shape (..., n+2) and satisfies <X,X>_M = -1/a^2.
    """
    r = np.asarray(r, dtype=float)
    D = np.asarray(D, dtype=float)
    _check_range(a, r)
    ch = np.cosh(a * r)
    sh = np.sinh(a * r)
    return np.concatenate([ch[..., None], sh[..., None] * D], axis=-1) / a


def embed(a: float, p: HPoint) -> np.ndarray:
    """Hyperboloid coordinates of a single point."""
    return embed_polar(a, p.r, p.direction_vector())


def distance(a: float, p: HPoint, q: HPoint) -> float:
    """Geodesic distance via the hyperbolic law of cosines.

    cosh(a d) = cosh(a r_p) cosh(a r_q) - sinh(a r_p) sinh(a r_q) cos(gamma),
    gamma the angle between the two directions.
    """
    if p.n != q.n:
        raise ValueError("points have different direction dimensions")
    _check_range(a, p.r)
    _check_range(a, q.r)
    cg = float(np.dot(p.direction_vector(), q.direction_vector()))
    chp, chq = math.cosh(a * p.r), math.cosh(a * q.r)
    ch = chp * chq - math.sinh(a * p.r) * math.sinh(a * q.r) * cg
    # the subtraction loses ~eps*chp*chq absolutely; separations below that
    # resolution are indistinguishable from zero
    if ch <= 1.0 + 8.0 * np.finfo(float).eps * chp * chq:
        return 0.0
    return math.acosh(ch) / a


def distances_from(a: float, P: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Distances from one embedded point P (shape (d,)) to embedded points X (..., d)."""
    ch = -(a * a) * minkowski_dot(P, X)
    # snap separations below the cancellation resolution to zero; the time
    # components carry cosh(a r)/a
    slack = 8.0 * np.finfo(float).eps * (a * P[0]) * (a * X[..., 0])
    return np.arccosh(np.maximum(ch, 1.0)) / a * (ch > 1.0 + slack)


def radial_tangent(a: float, p: HPoint, q: HPoint) -> np.ndarray:
    """Unit tangent at q of the geodesic from p through q, pointing away from p.

    In hyperboloid coordinates T = (cosh(a d) Q - P)/s_a(d); it is spacelike
    with <T,T>_M = 1 and Minkowski-orthogonal to Q.
    """
    d = distance(a, p, q)
    if d < 1e-12:
        raise ValueError("radial tangent is undefined at the probe point itself")
    P = embed(a, p)
    Q = embed(a, q)
    return (math.cosh(a * d) * Q - P) / s_a(a, d)


def radial_tangents_from(a: float, P: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized radial tangents from embedded probe P at embedded points X.

    Returns (T, d) with T shape (..., dim) and the distances d.  All target
    points must be distinct from the probe.
    """
    d = distances_from(a, P, X)
    if np.any(d < 1e-12):
        raise ValueError("radial tangent is undefined at the probe point itself")
    sd = np.sinh(a * d) / a
    return (np.cosh(a * d)[..., None] * X - P) / sd[..., None], d


def newton_bracketed(f, lo: float, hi: float, df=None, xtol: float = 1e-14,
                     max_iter: int = 200) -> float:
    """Root of f on [lo, hi] with f(lo) <= 0 <= f(hi): bisection safeguarding
    Newton steps when a derivative is supplied."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0 or fhi < 0:
        raise ValueError(f"root not bracketed on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step_ok = False
        if df is not None:
            dfx = df(x)
            if dfx > 0:
                xn = x - fx / dfx
                if lo < xn < hi:
                    x = xn
                    step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
        if hi - lo <= xtol * (1.0 + abs(x)):
            return x
    return x


def ball_volume(a: float, n: int, s, integrand_power: int | None = None):
    """Volume of the geodesic ball of radius s: vol(S^n) * int_0^s s_a(l)^p dl.

    The integrand power p defaults to n (the geometric ball volume); p = 1 is
    available as a variant for n = 2.
    """
    p = n if integrand_power is None else integrand_power
    if p not in (1, 2):
        raise ValueError(f"integrand power must be 1 or 2, got {p!r}")
    s = np.asarray(s, dtype=float)
    _check_range(a, s)
    pref = 2.0 * math.pi if n == 1 else 4.0 * math.pi
    if p == 1:
        integral = (np.cosh(a * s) - 1.0) / a**2
    else:
        integral = (np.sinh(a * s) / a * np.cosh(a * s) - s) / (2.0 * a**2)
    return pref * integral


def psi(a: float, n: int, vol: float, integrand_power: int | None = None) -> float:
    """Radius of the geodesic ball with the given volume (inverse of ball_volume)."""
    if not (math.isfinite(vol) and vol > 0):
        raise ValueError(f"volume must be finite and positive, got {vol!r}")
    p = n if integrand_power is None else integrand_power
    hi = 1.0 / a
    while ball_volume(a, n, hi, integrand_power=p) < vol:
        hi *= 2.0
        if a * hi > RANGE_LIMIT:
            raise ValueError("volume exceeds the supported radius range")

    def f(s):
        return float(ball_volume(a, n, s, integrand_power=p)) - vol

    def df(s):
        return float((2.0 * math.pi if n == 1 else 4.0 * math.pi) * s_a(a, s) ** p)

    return newton_bracketed(f, 0.0, hi, df=df)


def xi_forward(a: float, s) -> np.ndarray:
    """Outer-radius map s + a ln((1 + sqrt(ta_a(s/2)))^2 / (1 + ta_a(s/2))).

    Strictly increasing, fixes 0, and exceeds s by less than a ln 2.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("xi_forward needs s >= 0")
    x = ta_a(a, s / 2.0)
    return s + a * np.log((1.0 + np.sqrt(x)) ** 2 / (1.0 + x))


def xi_forward_rescaled(a: float, s) -> np.ndarray:
    """Variant of xi_forward with the curvature-scaled log term (1/a) ln(...)
    and plain tanh(a s/2) inside; identical to xi_forward at a = 1."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("xi_forward_rescaled needs s >= 0")
    x = np.tanh(a * s / 2.0)
    return s + np.log((1.0 + np.sqrt(x)) ** 2 / (1.0 + x)) / a


def xi(a: float, y: float) -> float:
    """Inverse of xi_forward: the radius whose outer-radius map equals y."""
    if not (math.isfinite(y) and y >= 0):
        raise ValueError(f"xi needs a finite y >= 0, got {y!r}")
    if y == 0.0:
        return 0.0
    # xi_forward(s) > s, so s = y brackets from above; 0 from below
    return newton_bracketed(lambda s: float(xi_forward(a, s)) - y, 0.0, y)
