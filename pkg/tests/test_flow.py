"""Integrator behavior: forcing, conservation, projection, stopping,
aborts, and monitor bookkeeping."""

import math

import numpy as np
import pytest

from hcflow.flow import (FlowAbort, FlowConfig, FlowResult, _project,
                         forcing_value, run_flow)
from hcflow.hypmath import SpaceParams
from hcflow.speed import parse_speed
from hcflow.surface import geometry, perturbed_graph, sphere_graph


def test_forcing_formulas():
    g = perturbed_graph(SpaceParams(1.0, 2), 48, 1.2, 2, 0.1)
    fr = geometry(g)
    phi = fr.H**2
    h_vol = forcing_value(fr, phi, "volume")
    assert h_vol == pytest.approx(float(np.sum(phi * fr.dmu) / fr.A), rel=1e-15)
    h_area = forcing_value(fr, phi, "area")
    assert h_area == pytest.approx(
        float(np.sum(fr.H * phi * fr.dmu) / np.sum(fr.H * fr.dmu)), rel=1e-15)
    assert forcing_value(fr, phi, "none") == 0.0
    with pytest.raises(ValueError):
        forcing_value(fr, phi, "perimeter")
    # the averages straddle each other between min and max of phi
    for h in (h_vol, h_area):
        assert float(np.min(phi)) < h < float(np.max(phi))


def test_config_validation():
    with pytest.raises(ValueError, match="constraint"):
        FlowConfig(speed="H", constraint="bogus")
    with pytest.raises(ValueError, match="cfl"):
        FlowConfig(speed="H", cfl=0.0)
    with pytest.raises(ValueError, match="t_end"):
        FlowConfig(speed="H", t_end=-1.0)
    with pytest.raises(ValueError, match="dt"):
        FlowConfig(speed="H", dt=0.0)
    with pytest.raises(ValueError, match="stop_eps"):
        FlowConfig(speed="H", stop_eps=0.0)
    with pytest.raises(ValueError, match="record_every"):
        FlowConfig(speed="H", record_every=0)
    with pytest.raises(ValueError, match="max_steps"):
        FlowConfig(speed="H", max_steps=0)


def test_string_speed_is_parsed():
    cfg = FlowConfig(speed="H^2")
    phi, d1, _ = cfg.speed.eval(2.0)
    assert float(phi) == 4.0 and float(d1) == 4.0


def test_sphere_is_stationary_short_run():
    # constrained sphere: phi - h = 0 identically, zero velocity, converges
    # on the first record
    g = sphere_graph(SpaceParams(1.0, 1), 64, 1.5)
    res = run_flow(g, FlowConfig(speed="H", constraint="volume", t_end=1.0))
    assert res.stop_reason == "converged"
    assert res.state.t == 0.0
    assert np.max(np.abs(res.state.graph.u - 1.5)) == 0.0


def test_sphere_stationarity_under_forced_steps():
    # with stop_eps below roundoff the run either detects the exact fixed
    # point (phi - h == 0 bitwise) or steps; the radii hold either way
    for n, N in ((1, 64), (2, 32)):
        g = sphere_graph(SpaceParams(1.0, n), N, 1.5)
        cfg = FlowConfig(speed="H", constraint="volume", stop_eps=1e-300,
                         max_steps=200, t_end=1e9)
        res = run_flow(g, cfg)
        assert res.stop_reason in ("converged", "max_steps")
        assert np.max(np.abs(res.state.graph.u - 1.5)) < 1e-12
        assert res.monitors.max_constraint_drift < 1e-13


def test_volume_conserved_and_area_monotone():
    g = perturbed_graph(SpaceParams(1.0, 1), 128, 1.2, 2, 0.1)
    cfg = FlowConfig(speed="H", constraint="volume", t_end=0.5)
    res = run_flow(g, cfg)
    assert res.monitors.steps > 50
    assert res.monitors.max_constraint_drift < 1e-12
    assert res.monitors.max_area_increase < 1e-10
    V0 = geometry(g).V
    assert res.state.frame.V == pytest.approx(V0, rel=1e-13)


def test_area_mode_conserves_area_and_grows_volume():
    g = perturbed_graph(SpaceParams(1.0, 1), 128, 1.2, 2, 0.1)
    cfg = FlowConfig(speed="H", constraint="area", t_end=0.5)
    res = run_flow(g, cfg)
    assert res.monitors.max_constraint_drift < 1e-12
    assert res.monitors.max_volume_decrease < 1e-10
    A0 = geometry(g).A
    assert res.state.frame.A == pytest.approx(A0, rel=1e-13)


def test_projection_restores_inflated_volume_exactly():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.1)
    V0 = geometry(g).V
    bumped = g.with_u(g.u * (1.0 + 1e-3))
    g2, eps, frame = _project(bumped, V0, "volume")
    assert frame.V == pytest.approx(V0, rel=1e-14)
    assert eps < 0  # shift back down
    np.testing.assert_allclose(g2.u, bumped.u + eps, rtol=0, atol=0)


def test_projection_off_lets_volume_drift():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.1)
    cfg = FlowConfig(speed="H", constraint="volume", t_end=0.2,
                     projection=False)
    res = run_flow(g, cfg)
    drift = res.monitors.max_constraint_drift
    assert 0 < drift < 1e-5  # Heun keeps it small, projection would kill it
    res_p = run_flow(g, FlowConfig(speed="H", constraint="volume", t_end=0.2))
    assert res_p.monitors.max_constraint_drift < 1e-13


def test_unconstrained_collapse_aborts_with_partial_result():
    g = sphere_graph(SpaceParams(1.0, 1), 64, 0.5)
    cfg = FlowConfig(speed="H", constraint="none", t_end=1.0, record_every=5)
    with pytest.raises(FlowAbort) as e:
        run_flow(g, cfg)
    partial = e.value.partial
    assert isinstance(partial, FlowResult)
    assert partial.stop_reason == "aborted"
    assert len(partial.records) > 3
    assert partial.limit is None
    # the sphere stayed a sphere while it lasted
    assert partial.records[-1].maxH == pytest.approx(partial.records[-1].minH,
                                                     rel=1e-6)
    # collapse happened near the closed-form time ln cosh(1/2)
    assert e.value.state.t == pytest.approx(0.12011450695827752, abs=2e-3)


def test_fixed_dt_override():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.05)
    cfg = FlowConfig(speed="H", constraint="volume", t_end=0.01, dt=1e-4)
    res = run_flow(g, cfg)
    assert res.monitors.steps == 100
    assert res.monitors.min_dt == pytest.approx(1e-4, rel=1e-9)
    assert res.state.t == pytest.approx(0.01, rel=1e-12)


def test_t_end_stop_is_exact():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.1)
    res = run_flow(g, FlowConfig(speed="H", constraint="volume", t_end=0.05))
    assert res.stop_reason == "t_end"
    assert res.state.t == pytest.approx(0.05, rel=1e-12)


def test_max_steps_stop():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.1)
    res = run_flow(g, FlowConfig(speed="H", constraint="volume", t_end=10.0,
                                 max_steps=7))
    assert res.stop_reason == "max_steps"
    assert res.monitors.steps == 7


def test_snapshots_follow_records():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.1)
    cfg = FlowConfig(speed="H", constraint="volume", t_end=0.02,
                     record_every=10, keep_snapshots=True)
    res = run_flow(g, cfg)
    assert len(res.snapshots) == len(res.records) >= 2
    assert res.snapshots[0]["meta"]["t"] == res.records[0].t == 0.0
    assert res.snapshots[-1]["meta"]["t"] == pytest.approx(res.records[-1].t)


def test_convergence_produces_limit_report():
    g = perturbed_graph(SpaceParams(1.0, 1), 64, 1.2, 2, 0.05)
    cfg = FlowConfig(speed="H", constraint="volume", t_end=100.0,
                     stop_eps=1e-8, record_every=50)
    res = run_flow(g, cfg)
    assert res.stop_reason == "converged"
    lim = res.limit
    assert lim is not None
    assert lim.constraint == "volume"
    assert lim.radius_rel_err < 1e-6
    assert lim.radius_spread / lim.radius_mean < 1e-6
    assert res.records[-1].sup_phi_minus_h < 1e-8
    # forcing at the limit matches the closed-form sphere value
    from hcflow.hypmath import co_a
    assert res.state.h == pytest.approx(co_a(1.0, lim.radius_closed_form),
                                        rel=1e-6)


def test_maxphi_monotone_after_transient():
    g = perturbed_graph(SpaceParams(1.0, 1), 128, 1.2, 2, 0.1)
    res = run_flow(g, FlowConfig(speed="H", constraint="volume", t_end=2.0))
    assert res.monitors.max_maxphi_increase < 1e-9


def test_domain_error_on_initial_data_aborts():
    g = sphere_graph(SpaceParams(1.0, 1), 64, 1.5)  # H = coth(1.5) < 2
    cfg = FlowConfig(speed="sqrt(H - 2)", constraint="volume", t_end=1.0)
    with pytest.raises(FlowAbort, match="initial data"):
        run_flow(g, cfg)


def test_nonmonotone_speed_aborts():
    # phi'(H) < 0 at H = coth(1.2) ~ 1.2: derivative guard trips immediately
    g = sphere_graph(SpaceParams(1.0, 1), 64, 1.2)
    cfg = FlowConfig(speed="1/H", constraint="volume", t_end=1.0,
                     stop_eps=1e-300)
    with pytest.raises(FlowAbort, match="derivative"):
        run_flow(g, cfg)
