"""Geodesic spheres under the flow: the exact scalar picture.

On a sphere the whole PDE collapses to one ODE for the radius,
r' = -phi(n co_a(r)) + h.  That gives three clean stories: unforced
spheres shrink to a point in finite time (with a closed-form collapse
time for phi = H, n = 1), the right constant forcing freezes the radius,
and the constraint value determines the radius invertibly.
"""

import math

from hcflow import (SpaceParams, co_a, parse_speed, radius_from_constraint,
                    sphere_quantities, standard_flow_ode)


def main():
    a = 1.0
    sp1 = SpaceParams(a, 1)
    speed = parse_speed("H")

    print("== unforced collapse, n=1, phi = H ==")
    R0 = 0.5
    res = standard_flow_ode(sp1, speed, R0, t_end=1.0, dt=1e-5)
    exact = math.log(math.cosh(a * R0)) / a
    print(f"  collapse detected at t = {res.t_collapse:.6f}")
    print(f"  closed form ln(cosh R0) = {exact:.6f}")

    print("\n== constant forcing that freezes the sphere ==")
    R = 1.3
    h_eq = float(speed(1 * co_a(a, R)))
    res = standard_flow_ode(sp1, speed, R, t_end=5.0, dt=1e-4, forcing=h_eq)
    print(f"  h = phi(co_a({R})) = {h_eq:.8f}")
    print(f"  radius after t=5:    {res.R[-1]:.12f}  (started at {R})")
    res = standard_flow_ode(sp1, speed, R, t_end=5.0, dt=1e-4,
                            forcing=1.05 * h_eq)
    print(f"  with 5% extra forcing the sphere grows to {res.R[-1]:.6f}")

    print("\n== the constraint pins down the limit radius ==")
    for n in (1, 2):
        sp = SpaceParams(a, n)
        st = sphere_quantities(sp, 1.7)
        for constraint, value in (("volume", st.V), ("area", st.A)):
            r = radius_from_constraint(sp, constraint, value)
            print(f"  n={n} {constraint:6s} {value:12.6f} -> R = {r:.12f}")


if __name__ == "__main__":
    main()
