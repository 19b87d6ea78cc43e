"""Verification laboratory for constrained curvature flows of h-convex
hypersurfaces in hyperbolic space.

Closed curves (n=1) and axisymmetric surfaces (n=2) are evolved as radial
graphs under dF/dt = (h(t) - phi(H)) nu, where the nonlocal forcing h keeps
the enclosed volume or the boundary area fixed.  The package provides the
hyperbolic primitives, a checked grammar for speed functions phi, the
discrete geometry of radial graphs, the constrained integrator, geodesic
sphere references, run diagnostics, and a scenario runner that grades every
run against the checkable claims of the underlying theory.
"""

from .hypmath import (SpaceParams, HPoint, s_a, c_a, ta_a, co_a, ball_volume,
                      distance, embed, embed_polar, psi, xi, xi_forward)
from .speed import (AdmissibilityReport, SpeedDomainError, SpeedFunction,
                    SpeedParseError, check_admissibility, parse_speed)
from .surface import (GeometryFrame, RadialGraph, geometry, hconvexity_margin,
                      offset_sphere_graph, perturbed_graph, sphere_graph,
                      support_sigma, uniform_grid)
from .sphere import (SphereState, sphere_area, sphere_quantities,
                     standard_flow_ode, radius_from_constraint)
from .diag import (DecayFit, FlowRecord, check_inradius_sandwich,
                   diameter_bounds, diameter_estimate, estimate_inradius,
                   fit_decay, tilde_diagnostics)
from .flow import (FlowAbort, FlowConfig, FlowMonitors, FlowResult, FlowState,
                   LimitReport, forcing_value, run_flow)
from .config import (ConfigError, Scenario, load_config, load_scenario,
                     load_scenario_with_override, scenario_from_dict)
from .runner import RunOutcome, compute_verdicts, run_scenario, verify_run
from .outputs import build_manifest, write_run_outputs

try:
    from importlib import metadata as _metadata
    __version__ = _metadata.version("hcflow")
except Exception:
    __version__ = "0.1.0"

__all__ = [
    "SpaceParams", "HPoint", "s_a", "c_a", "ta_a", "co_a", "ball_volume",
    "distance", "embed", "embed_polar", "psi", "xi", "xi_forward",
    "AdmissibilityReport", "SpeedDomainError", "SpeedFunction",
    "SpeedParseError", "check_admissibility", "parse_speed",
    "GeometryFrame", "RadialGraph", "geometry", "hconvexity_margin",
    "offset_sphere_graph", "perturbed_graph", "sphere_graph", "support_sigma",
    "uniform_grid",
    "SphereState", "sphere_area", "sphere_quantities", "standard_flow_ode",
    "radius_from_constraint",
    "DecayFit", "FlowRecord", "check_inradius_sandwich", "diameter_bounds",
    "diameter_estimate", "estimate_inradius", "fit_decay", "tilde_diagnostics",
    "FlowAbort", "FlowConfig", "FlowMonitors", "FlowResult", "FlowState",
    "LimitReport", "forcing_value", "run_flow",
    "ConfigError", "Scenario", "load_config", "load_scenario",
    "load_scenario_with_override", "scenario_from_dict",
    "RunOutcome", "compute_verdicts", "run_scenario", "verify_run",
    "build_manifest", "write_run_outputs",
    "__version__",
]
