import math

import numpy as np
import pytest

from simforge.dsl import Connection, Endpoint, make_entity as E, make_scene
from simforge.errors import CompileError, DSLError, ProbeError
from simforge.prune import PruneConfig, prune_trace
from simforge.sim import compile_scene, simulate
from simforge.sim.entities import G_NEWTON, kepler_period

G = 9.81
M_SUN = 1.989e30


def run(entities, connections=(), dt=None, horizon=None, **kw):
    model = compile_scene(make_scene("t", entities, connections, **kw), dt=dt, horizon=horizon)
    return model, simulate(model)


def ball(**params):
    return E("ball", "EMEntity", (0, 0, 0), {"mass": 1.0, **params})


def test_free_fall_velocity():
    _, tr = run([ball()])
    assert tr.probe("ball.particle", "velocity_z", 3.0) == pytest.approx(-29.43, rel=1e-9)
    assert tr.probe("ball.particle", "velocity_norm", 3.0) == pytest.approx(29.43, rel=1e-9)


def test_probe_at_zero_is_initial_position():
    _, tr = run([E("ball", "EMEntity", (1.5, -2.0, 7.0), {"mass": 1.0})])
    for axis, x0 in zip("xyz", (1.5, -2.0, 7.0)):
        assert tr.probe("ball.particle", f"displacement_{axis}", 0.0) == x0


def test_probe_errors():
    _, tr = run([ball()], horizon=1.0)
    with pytest.raises(ProbeError):
        tr.probe("ball.particle", "velocity_z", 1.5)
    with pytest.raises(ProbeError):
        tr.probe("ghost", "velocity_z", 0.5)
    with pytest.raises(ProbeError):
        tr.probe("ball.particle", "colour", 0.5)
    cut = tr.truncated(200)
    assert cut.truncated_at == 200
    with pytest.raises(ProbeError, match="truncation"):
        cut.probe("ball.particle", "velocity_z", 0.5)


def test_atwood():
    model, tr = run([E("e", "MassWithFixedPulley", (0, 0, 5), {"mass_type": "Atwood", "mass_values": [10, 5]})])
    assert model.n == 2 and model.dof == 1
    a = (10 - 5) * G / 15
    assert tr.probe("e.mass0", "acceleration_z", 0.5) == pytest.approx(-a, rel=1e-9)
    assert tr.probe("e.mass1", "acceleration_z", 0.5) == pytest.approx(a, rel=1e-9)
    assert round(abs(tr.probe("e.mass0", "acceleration_z", 0.5)), 2) == 3.27
    assert tr.probe("e.rope", "force", 0.5) == pytest.approx(2 * 10 * 5 * G / 15, rel=1e-9)


def test_two_body_model_has_no_constraints():
    model, _ = run([E("s", "SolarSystem", (0, 0, 0), {"star_mass": M_SUN, "planet_masses": [6e24],
                                                       "planet_radii": [6e6], "orbit_radii": [1.5e11]})],
                   horizon=1e5)
    assert model.n == 3 and model.dof == 3
    assert not model.joints and not model.strings


def test_circular_orbit_period_matches_kepler():
    a = 3.3275e11
    _, tr = run([E("s", "SolarSystem", (0, 0, 0), {"star_mass": M_SUN, "planet_masses": [6e24],
                                                    "planet_radii": [6e6], "orbit_radii": [a]})])
    y = tr.series("s.planet0", "displacement_y")
    i = np.flatnonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    t_cross = tr.times[i] - y[i] * (tr.times[i + 1] - tr.times[i]) / (y[i + 1] - y[i])
    T = kepler_period(a, G_NEWTON * (M_SUN + 6e24))
    assert t_cross == pytest.approx(T, rel=1e-4)


def test_elastic_head_on_exchange():
    objs = [{"type": "sphere", "m": 2.0, "r": 0.1, "x": 0.0, "v": 1.5},
            {"type": "sphere", "m": 2.0, "r": 0.1, "x": 1.0, "v": 0.0}]
    _, tr = run([E("c", "ComplexCollisionPlane", (0, 0, 0), {"objects": objs, "restitution": 1.0})], horizon=2.0)
    assert tr.probe("c.obj0", "velocity_x", 1.5) == pytest.approx(0.0, abs=1e-9)
    assert tr.probe("c.obj1", "velocity_x", 1.5) == pytest.approx(1.5, rel=1e-9)


@pytest.mark.parametrize("e", [0.0, 0.4, 1.0])
def test_1d_collision_closed_form(e):
    m1, m2, v1, v2 = 1.0, 3.0, 2.0, -0.5
    objs = [{"type": "block", "m": m1, "size": 0.2, "x": 0.0, "v": v1},
            {"type": "block", "m": m2, "size": 0.2, "x": 1.0, "v": v2}]
    _, tr = run([E("c", "ComplexCollisionPlane", (0, 0, 0), {"objects": objs, "restitution": e})], horizon=1.0)
    u1 = (m1 * v1 + m2 * v2 - e * m2 * (v1 - v2)) / (m1 + m2)
    u2 = (m1 * v1 + m2 * v2 + e * m1 * (v1 - v2)) / (m1 + m2)
    assert tr.probe("c.obj0", "velocity_x", 0.9) == pytest.approx(u1, rel=1e-9, abs=1e-12)
    assert tr.probe("c.obj1", "velocity_x", 0.9) == pytest.approx(u2, rel=1e-9, abs=1e-12)


def test_rocket_delta_v_gravity_free():
    m0, md, mu, u = 300.0, 100.0, 2.0, 3000.0
    _, tr = run([E("r", "RocketEntity", (0, 0, 0), {"m_dry": md, "m0": m0, "burn_rate": mu, "exhaust_speed": u,
                                                     "gravity_model": "uniform"})], gravity=(0, 0, 0))
    t_burn = (m0 - md) / mu
    assert tr.probe("r.rocket", "velocity_z", t_burn) == pytest.approx(u * math.log(m0 / md), rel=1e-6)
    assert tr.probe("r.rocket", "mass", t_burn / 2) == pytest.approx(m0 - mu * t_burn / 2)
    # thrust stops at burnout
    v_end = tr.probe("r.rocket", "velocity_z", tr.last_time)
    assert v_end == pytest.approx(u * math.log(m0 / md), rel=1e-6)


def test_rocket_bad_masses_rejected_upstream():
    with pytest.raises(DSLError):
        make_scene("r", [E("r", "RocketEntity", (0, 0, 0), {"m_dry": 400.0, "m0": 300.0})])


def test_incline_with_friction():
    theta, mu = 0.5, 0.2
    _, tr = run([E("p", "TwoSideMassPlane", (0, 0, 0), {"mass": 2.0, "incline_angle": theta, "friction": mu})])
    a = G * (math.sin(theta) - mu * math.cos(theta))
    assert abs(tr.probe("p.mass0", "acceleration_x", 0.5)) / math.cos(theta) == pytest.approx(a, rel=1e-9)
    assert tr.probe("p.contact", "friction_force", 0.5) == pytest.approx(mu * 2 * G * math.cos(theta), rel=1e-9)


def test_incline_sticks_below_friction_angle():
    _, tr = run([E("p", "TwoSideMassPlane", (0, 0, 0), {"mass": 2.0, "incline_angle": 0.1, "friction": 0.5})])
    assert tr.probe("p.mass0", "velocity_x", 1.0) == pytest.approx(0.0, abs=1e-12)
    assert abs(tr.probe("p.contact", "friction_force", 1.0)) == pytest.approx(2 * G * math.sin(0.1), rel=1e-9)


def test_rolling_cylinder():
    theta = 0.3
    _, tr = run([E("r", "RollingEntity", (0, 0, 5), {"shape": {"kind": "cylinder", "r": 0.2, "h": 0.3, "m": 2.0},
                                                      "incline_angle": theta})])
    a = tr.probe("r.roller", "acceleration_x", 0.5) / math.cos(theta)
    assert abs(a) == pytest.approx(2 * G * math.sin(theta) / 3, rel=1e-9)


def test_small_angle_pendulum_period():
    _, tr = run([E("p", "RotationEntity", (0, 0, 5), {"shapes": [{"kind": "mass", "m": 1.0, "offset": 1.0}],
                                                       "initial_angle": 0.01})])
    x = tr.series("p.shape0", "displacement_x")
    i = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    periods = np.diff(tr.times[i])
    assert periods.mean() == pytest.approx(2 * math.pi * math.sqrt(1.0 / G), rel=1e-3)


def test_lorentz_circle():
    _, tr = run([ball(charge=1.0, velocity=[1.0, 0.0, 0.0], magnetic_field=[0.0, 0.0, 2.0])], gravity=(0, 0, 0))
    assert np.ptp(tr.series("ball.particle", "velocity_norm")) < 1e-9
    # radius m v / (q B) = 0.5, centre at y = -0.5 for this sense of rotation
    y = tr.series("ball.particle", "displacement_y")
    assert y.min() == pytest.approx(-1.0, rel=1e-6)


def pulley_chain():
    return [E("entity1", "MassWithFixedPulley", (0, 2, 0), {"mass_type": "Mass", "mass_values": [10]}),
            E("entity2", "MassWithMovablePulley", (0, 1, 0), {"mass_values": [1], "pulley_mass": 0.5})], \
        [Connection(Endpoint("entity1", "outer"), Endpoint("entity2", "top"))]


def test_pulley_chain_accelerations():
    _, tr = run(*pulley_chain())
    m1, m2 = 10.0, 1.5
    a2 = (2 * m1 - m2) * G / (4 * m1 + m2)
    assert tr.probe("entity2.pulley", "acceleration_z", 0.3) == pytest.approx(a2, rel=1e-9)
    assert tr.probe("entity1.mass0", "acceleration_z", 0.3) == pytest.approx(-2 * a2, rel=1e-9)


def test_string_residual():
    _, tr = run(*pulley_chain())
    strings = [t for t, k in tr.kinds.items() if k == "string"]
    assert strings == ["entity1.outer~entity2.top"]
    for s in strings:
        L = tr.series(s, "length")
        assert np.max(np.abs(L - L[0])) < 1e-6
    _, tr = run([E("e", "MassWithFixedPulley", (0, 0, 5), {"mass_type": "Atwood", "mass_values": [3, 5]})])
    L = tr.series("e.rope", "length")
    assert np.max(np.abs(L - L[0])) < 1e-6


def total_energy(tr):
    ents = [t for t, k in tr.kinds.items() if k == "entity"]
    return sum(tr.series(e, "total_energy") for e in ents)


def before_stops(tr):
    """Samples before the first unmodelled limit stop (those are inelastic)."""
    stops = tr.meta.get("stops") or []
    return stops[0][0] - 1 if stops else len(tr)


@pytest.mark.parametrize("name, entities, kw", [
    ("atwood", [E("e", "MassWithFixedPulley", (0, 0, 5), {"mass_type": "Atwood", "mass_values": [7, 5]})], {}),
    ("wedge", [E("w", "MassPrismPlane", (0, 0, 0), {"prism_mass": 5, "mass_values": [1, 2], "alpha_L": 0.6,
                                                     "alpha_R": 0.9})], {}),
    ("springs", [E("c", "ComplexCollisionPlane", (0, 0, 0), {"objects": [
        {"type": "wall", "x": -1.0}, {"type": "sphere", "m": 1.0, "r": 0.1, "x": 0.0, "v": 1.0},
        {"type": "spring_block", "m": [1.0, 1.0], "k": [50.0], "l0": [0.5], "x": [1.0, 1.6], "v": [0.0, 0.0],
         "size": 0.2},
        {"type": "wall", "x": 4.0}], "restitution": 1.0})], {}),
    ("billiards", [E("c", "TwoDCollisionPlane", (0, 0, 0), {"masses": [1, 2], "radii": [0.2, 0.3],
                                                           "positions": [[0, 0], [2, 0.1]],
                                                           "velocities": [[1, 0], [0, 0]], "restitution": 1.0})], {}),
    ("orbit", [E("s", "SolarSystem", (0, 0, 0), {"star_mass": M_SUN, "planet_masses": [6e24, 3e25],
                                                  "planet_radii": [6e6, 2e7], "orbit_radii": [1.5e11, 2.2e11],
                                                  "speed_factors": [1.05, 0.95]})], {}),
    ("pendulum", [E("p", "RotationEntity", (0, 0, 5), {"shapes": [{"kind": "bar", "m": 1.0, "w": 0.05, "l": 1.0,
                                                                   "h": 0.05, "offset": 0.5}],
                                                       "initial_angle": 0.8})], {}),
    ("rolling", [E("r", "RollingEntity", (0, 0, 5), {"shape": {"kind": "sphere", "r": 0.2, "m": 2.0},
                                                      "incline_angle": 0.4})], {}),
    ("em", [ball(charge=0.5, velocity=[1.0, 2.0, 0.5], electric_field=[0.3, 0.0, 0.0],
                 magnetic_field=[0.0, 0.5, 1.0])], {"gravity": (0, 0, 0)}),
])
def test_energy_conservation(name, entities, kw):
    _, tr = run(entities, **kw)
    Et = total_energy(tr)[:before_stops(tr)]
    assert len(Et) > 100
    scale = max(np.abs(Et).max(), 1e-300)
    assert np.ptp(Et) / scale < 1e-3, name


def test_momentum_across_collisions():
    _, tr = run([E("c", "TwoDCollisionPlane", (0, 0, 0), {"masses": [1, 2, 1.5], "radii": [0.2, 0.3, 0.25],
                                                         "positions": [[0, 0], [2, 0.1], [3.5, -0.3]],
                                                         "velocities": [[1, 0], [0, 0], [-0.5, 0.1]],
                                                         "restitution": 0.7})], horizon=6.0)
    bodies = [b for b in tr.bodies() if b.startswith("c.sphere")]
    for axis in "xy":
        p = sum(tr.series(b, f"momentum_{axis}") for b in bodies)
        assert np.max(np.abs(p - p[0])) <= 1e-6 * max(abs(p[0]), 1.0)
    v = tr.series(bodies[0], "velocity_x")
    assert v[-1] != v[0]  # the first ball was struck


def test_recorded_field_identities():
    _, tr = run(*pulley_chain())
    end = before_stops(tr)
    for b in tr.bodies():
        m = tr.series(b, "mass")
        v2 = sum(tr.series(b, f"velocity_{c}") ** 2 for c in "xyz")
        assert np.array_equal(tr.series(b, "kinetic_energy_linear"), 0.5 * m * v2)
        for c in "xyz":
            dp = np.gradient(tr.series(b, f"momentum_{c}"), tr.times)[1:end - 1]
            F = tr.series(b, f"net_force_{c}")[1:end - 1]
            assert np.max(np.abs(dp - F)) <= 1e-6 * max(np.abs(F).max(), 1.0)


def test_all_series_share_times():
    _, tr = run(*pulley_chain())
    n = len(tr.times)
    assert np.all(np.diff(tr.times) > 0)
    for arr in tr.data.values():
        assert arr.shape[0] == n


def test_timestep_convergence():
    # position after one period of a circular orbit against the exact start
    a, T = 1.5e11, kepler_period(1.5e11, G_NEWTON * (M_SUN + 6e24))
    ent = [E("s", "SolarSystem", (0, 0, 0), {"star_mass": M_SUN, "planet_masses": [6e24], "planet_radii": [6e6],
                                              "orbit_radii": [a]})]
    errs = []
    for steps in (100, 200):
        _, tr = run(ent, dt=T / steps, horizon=T)
        errs.append(abs(tr.series("s.planet0", "displacement_x")[-1] - a))
    # fourth-order scheme, one decade of slack
    assert errs[0] / errs[1] >= 2 ** 4 / 10


def test_zero_horizon_rejected():
    with pytest.raises(CompileError):
        compile_scene(make_scene("t", [ball()]), horizon=0.0)


def test_spike_from_unmodelled_contact_is_pruned():
    # the light block rises into the pulley; the limit stop leaves a spike
    _, tr = run([E("e", "MassWithFixedPulley", (0, 0, 5), {"mass_type": "Atwood", "mass_values": [10, 5]})])
    assert tr.meta["stops"]
    spike = tr.meta["stops"][0][0]
    cut = prune_trace(tr, PruneConfig())
    assert cut.truncated_at is not None and spike - 50 <= cut.truncated_at <= spike


def test_trace_save_load(tmp_path):
    _, tr = run(*pulley_chain())
    cut = prune_trace(tr, PruneConfig())
    cut.save(tmp_path / "t.npz")
    back = type(cut).load(tmp_path / "t.npz")
    assert back.truncated_at == cut.truncated_at and back.meta == cut.meta
    assert back.kinds == cut.kinds
    assert np.array_equal(back.times, cut.times)
    for key, arr in cut.data.items():
        assert np.array_equal(back.data[key], arr)
