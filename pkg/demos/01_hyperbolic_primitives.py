"""Tour of the hyperbolic-space primitives everything else is built on.

Distances and spheres live in the hyperboloid model with curvature -a^2.
The script checks the identities the package leans on: the trig identity
behind the model, enclosed volume as an integral of the area profile, and
the invertible pair psi (volume -> sphere radius) and xi (the inradius
floor matched to an outradius ceiling).
"""

import math

import numpy as np

from hcflow import (HPoint, SpaceParams, ball_volume, co_a, distance, embed,
                    psi, s_a, sphere_quantities, xi, xi_forward)


def main():
    a = 1.0
    print("== model identities ==")
    for t in (0.3, 1.0, 2.5):
        lhs = a * a * math.cosh(a * t) ** 2 / a ** 2 - (a * s_a(a, t)) ** 2 / a ** 2
        print(f"  c_a^2 - a^2 s_a^2 at t={t}: {lhs:.15f}  (exactly 1)")

    p = HPoint(0.8, (0.3,))
    q = HPoint(1.4, (2.1,))
    X, Y = embed(a, p), embed(a, q)
    mink = X[0] * Y[0] - X[1] * Y[1] - X[2] * Y[2]
    print(f"\n== distance via the hyperboloid ==")
    print(f"  <X, Y>_L           = {mink:.12f}")
    print(f"  d(p, q)            = {distance(a, p, q):.12f}")
    print(f"  acosh(a^2 <X,Y>)/a = {math.acosh(a * a * mink) / a:.12f}")

    print("\n== spheres: area, volume, mean curvature ==")
    for n in (1, 2):
        sp = SpaceParams(a, n)
        st = sphere_quantities(sp, 1.2)
        print(f"  n={n} R=1.2: A={st.A:.10f}  V={st.V:.10f}  H={st.H:.10f} "
              f"(= n co_a = {n * co_a(a, 1.2):.10f})")
        # dV/dR = A: enclosed volume is the integral of the area profile
        dV = (ball_volume(a, n, 1.2 + 1e-6) - ball_volume(a, n, 1.2 - 1e-6)) / 2e-6
        print(f"        dV/dR = {dV:.8f} vs A = {st.A:.8f}")

    print("\n== psi and xi: radius from volume, inradius floor ==")
    sp = SpaceParams(a, 2)
    V = sphere_quantities(sp, 0.9).V
    r = psi(a, 2, V)
    print(f"  psi inverts the ball volume: psi(V(0.9)) = {r:.12f}")
    y = 1.1
    s = xi(a, y)
    print(f"  xi({y}) = {s:.12f}, and xi_forward(xi) recovers y: "
          f"{float(xi_forward(a, s)):.12f}")
    print(f"  gap y - xi(y) = {y - s:.6f} stays below a ln 2 = {math.log(2):.6f}")


if __name__ == "__main__":
    main()
