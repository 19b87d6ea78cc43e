"""The diagnostic toolbox: what the flow monitors actually measure.

On a frozen perturbed surface this walks through the inradius search, the
volume-matched sandwich xi(psi(V)) <= rho <= psi(V), the diameter ceiling,
the support-function floor, the curvature pinching quantity f, and the
h-convexity margin as the perturbation amplitude grows.
"""

import numpy as np

from hcflow import (SpaceParams, check_inradius_sandwich, diameter_bounds,
                    diameter_estimate, estimate_inradius, geometry,
                    hconvexity_margin, perturbed_graph, tilde_diagnostics)
from hcflow.surface import support_lower_bound, support_sigma


def main():
    sp = SpaceParams(1.0, 2)
    g = perturbed_graph(sp, 256, 1.2, 2, 0.1)
    fr = geometry(g)

    print("== inradius sandwich ==")
    inr = estimate_inradius(g, fr)
    sw = check_inradius_sandwich(sp, inr.rho, fr.V)
    print(f"  largest inscribed sphere: rho = {inr.rho:.6f} at "
          f"r = {inr.center.r:.4f}")
    print(f"  volume-matched sphere radius psi(V) = {sw.upper:.6f}")
    print(f"  floor xi(psi(V))                    = {sw.lower:.6f}")
    print(f"  lower <= rho <= upper: {sw.ok}")

    print("\n== diameter ==")
    diam = diameter_estimate(g)
    ceil, _ = diameter_bounds(sp, fr.V)
    print(f"  measured diameter {diam:.6f}, h-convex ceiling "
          f"2 (psi(V) + a ln 2) = {ceil:.6f}")

    print("\n== support function at the inradius center ==")
    sigma = support_sigma(g, inr.center, fr)
    floor = support_lower_bound(g, inr.center)
    print(f"  min sigma = {float(np.min(sigma)):.8f}, floor a ta_a(d_min) "
          f"= {floor:.8f}, ratio = {float(np.min(sigma)) / floor:.6f}")

    print("\n== pinching quantity and h-convexity margin ==")
    rep = tilde_diagnostics(fr, sp.n)
    print(f"  max f = {rep.f_max:.6f} (0 on spheres, must stay below "
          f"{1.0 / sp.n ** sp.n:.2f})")
    for amp in (0.05, 0.10, 0.20, 0.35):
        margin = hconvexity_margin(geometry(perturbed_graph(sp, 256, 1.2,
                                                            2, amp)), sp.a)
        verdict = "h-convex" if margin >= 0 else "NOT h-convex"
        print(f"  amplitude {amp:.2f}: min(lambda) - a = {margin:+.6f}  "
              f"({verdict})")


if __name__ == "__main__":
    main()
