"""Closed-form answers for the scene families that have one.

Each entry names the entity kind it covers, a predicate deciding whether
a concrete scene is in its regime, the symbols of its answer (with their
values in the scene), the parameters varied when it is checked against
the simulator, and how to read the same quantity off a trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..dsl import SceneSpec, get_param
from ..sim.entities import G_NEWTON
from ..sim.trace import Trace


@dataclass(frozen=True)
class ClosedForm:
    name: str
    kind: str
    quantity: str
    target: Callable  # entity -> target name
    applies: Callable  # (scene, entity) -> bool
    expression: Callable  # entity -> expression text
    symbols: Callable  # (scene, entity) -> {name: (value, unit, meaning)}
    perturb: Callable  # entity -> parameter paths varied during validation
    observe: Callable  # (trace, entity, values) -> float
    question: Callable  # entity -> question text
    free: tuple = ()  # symbols drawn from the trace time window


def _g(scene: SceneSpec) -> float:
    return math.sqrt(sum(v * v for v in scene.gravity))


def _down_only(scene: SceneSpec) -> bool:
    gx, gy, gz = scene.gravity
    return gx == 0 and gy == 0 and gz < 0


def _alone(scene: SceneSpec) -> bool:
    return len(scene.entities) == 1


def _first_sample(trace: Trace, target: str, quantity: str) -> float:
    return float(trace.series(target, quantity)[1])


def _crossing_times(x: np.ndarray, times: np.ndarray, upward: bool) -> np.ndarray:
    s = np.sign(x)
    idx = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0)) if upward else np.flatnonzero((s[:-1] > 0) & (s[1:] <= 0))
    frac = x[idx] / (x[idx] - x[idx + 1])
    return times[idx] + frac * (times[idx + 1] - times[idx])


def _em_free(e) -> bool:
    p = e.parameters
    field = any(p["electric_field"]) or any(p["magnetic_field"])
    return p["charge"] == 0 or not field


# -- free fall and projectiles ------------------------------------------------


def _ff_applies(scene, e):
    return _alone(scene) and _em_free(e) and not any(e.parameters["velocity"]) and _g(scene) > 0


def _ff_observe(trace, e, values):
    return trace.probe(f"{e.name}.particle", "velocity_norm", values["t"])


FREE_FALL = ClosedForm(
    name="free_fall_speed",
    kind="em_entity",
    quantity="speed",
    target=lambda e: f"{e.name}.particle",
    applies=_ff_applies,
    expression=lambda e: "g*t",
    symbols=lambda scene, e: {"g": (_g(scene), "m/s^2", "strength of the uniform gravitational field")},
    perturb=lambda e: ["scene.g"],
    observe=_ff_observe,
    question=lambda e: ("A particle is released from rest in a uniform gravitational field of strength g. "
                        "What is its speed a time t after release?"),
    free=(("t", "s", "time since release"),),
)


def _vertical(e) -> bool:
    vx, vy, _ = e.parameters["velocity"]
    return vx == 0 and vy == 0


def _proj_applies(scene, e):
    vz = e.parameters["velocity"][2]
    if not (_alone(scene) and _em_free(e) and _down_only(scene) and vz > 0):
        return False
    # the apex must lie well inside the default 10 s run
    return vz / _g(scene) < 7.0


def _proj_symbols(scene, e):
    v = e.parameters["velocity"]
    g = (_g(scene), "m/s^2", "strength of the uniform gravitational field")
    if _vertical(e):
        return {"v_0": (v[2], "m/s", "launch speed"), "g": g}
    speed = math.sqrt(sum(x * x for x in v))
    return {"v_0": (speed, "m/s", "launch speed"), "theta": (math.asin(v[2] / speed), "rad", "launch elevation angle"),
            "g": g}


def _proj_observe(trace, e, values):
    z = trace.series(f"{e.name}.particle", "displacement_z")
    return float(z.max() - z[0])


def _proj_question(e):
    if _vertical(e):
        return ("A ball is thrown straight up with speed v_0 in a uniform gravitational field g pointing down. "
                "How high above the launch point does it rise?")
    return ("A ball is thrown with speed v_0 at elevation angle theta above the horizontal in a uniform "
            "gravitational field g pointing down. How high above the launch point does it rise?")


PROJECTILE = ClosedForm(
    name="projectile_max_height",
    kind="em_entity",
    quantity="max_height",
    target=lambda e: f"{e.name}.particle",
    applies=_proj_applies,
    expression=lambda e: "v_0^2/(2*g)" if _vertical(e) else "v_0^2*sin(theta)^2/(2*g)",
    symbols=_proj_symbols,
    perturb=lambda e: ["scene.g"] + [f"{e.name}.velocity[{i}]" for i, x in enumerate(e.parameters["velocity"]) if x],
    observe=_proj_observe,
    question=_proj_question,
)


# -- pulleys and inclines -------------------------------------------------------


def _atwood_applies(scene, e):
    return _alone(scene) and e.parameters["mass_type"] == "Atwood" and _down_only(scene)


def _atwood_symbols(scene, e):
    m1, m2 = e.parameters["mass_values"]
    return {"m_1": (m1, "kg", "mass of the first block"), "m_2": (m2, "kg", "mass of the second block"),
            "g": (_g(scene), "m/s^2", "strength of the uniform gravitational field")}


def _atwood_paths(e):
    return [f"{e.name}.mass_values[0]", f"{e.name}.mass_values[1]", "scene.g"]


_ATWOOD_Q = ("Two blocks of masses m_1 and m_2 hang from the ends of a light string passing over a fixed "
             "frictionless pulley, in a uniform gravitational field g. ")

ATWOOD_ACCEL = ClosedForm(
    name="atwood_acceleration",
    kind="mass_with_fixed_pulley",
    quantity="downward_acceleration",
    target=lambda e: f"{e.name}.mass0",
    applies=_atwood_applies,
    expression=lambda e: "(m_1 - m_2)*g/(m_1 + m_2)",
    symbols=_atwood_symbols,
    perturb=_atwood_paths,
    observe=lambda trace, e, values: -_first_sample(trace, f"{e.name}.mass0", "acceleration_z"),
    question=lambda e: _ATWOOD_Q + "What is the downward acceleration of the block of mass m_1 after release?",
)

ATWOOD_TENSION = ClosedForm(
    name="atwood_tension",
    kind="mass_with_fixed_pulley",
    quantity="tension",
    target=lambda e: f"{e.name}.rope",
    applies=_atwood_applies,
    expression=lambda e: "2*m_1*m_2*g/(m_1 + m_2)",
    symbols=_atwood_symbols,
    perturb=_atwood_paths,
    observe=lambda trace, e, values: _first_sample(trace, f"{e.name}.rope", "force"),
    question=lambda e: _ATWOOD_Q + "What is the tension in the string after release?",
)


def _incline_applies(scene, e):
    p = e.parameters
    a = p["incline_angle"]
    return (_alone(scene) and not scene.connections and _down_only(scene) and a > 0
            and math.tan(a) > 1.05 * p["friction"])


def _incline_symbols(scene, e):
    p = e.parameters
    out = {"theta": (p["incline_angle"], "rad", "incline angle"),
           "g": (_g(scene), "m/s^2", "strength of the uniform gravitational field")}
    if p["friction"] > 0:
        out["mu"] = (p["friction"], "", "coefficient of kinetic friction")
    return out


INCLINE = ClosedForm(
    name="incline_acceleration",
    kind="two_side_mass_plane",
    quantity="acceleration_magnitude",
    target=lambda e: f"{e.name}.mass0",
    applies=_incline_applies,
    expression=lambda e: "g*(sin(theta) - mu*cos(theta))" if e.parameters["friction"] > 0 else "g*sin(theta)",
    symbols=_incline_symbols,
    perturb=lambda e: [f"{e.name}.incline_angle", f"{e.name}.friction", "scene.g"],
    observe=lambda trace, e, values: _first_sample(trace, f"{e.name}.mass0", "acceleration_norm"),
    question=lambda e: ("A block is released from rest on a fixed plane inclined at angle theta in a uniform "
                        "gravitational field g" + (", with coefficient of friction mu between block and plane"
                                                   if e.parameters["friction"] > 0 else ", without friction")
                        + ". What is the magnitude of its acceleration?"),
)


_ROLL_FACTOR = {"sphere": "5*g*sin(theta)/7", "cylinder": "2*g*sin(theta)/3", "disc": "2*g*sin(theta)/3"}
_ROLL_NAME = {"sphere": "a uniform solid sphere", "cylinder": "a uniform solid cylinder", "disc": "a uniform thin disc"}


def _roll_applies(scene, e):
    return _alone(scene) and _down_only(scene) and e.parameters["shape"]["kind"] in _ROLL_FACTOR


ROLLING = ClosedForm(
    name="rolling_acceleration",
    kind="rolling_entity",
    quantity="acceleration_magnitude",
    target=lambda e: f"{e.name}.roller",
    applies=_roll_applies,
    expression=lambda e: _ROLL_FACTOR[e.parameters["shape"]["kind"]],
    symbols=lambda scene, e: {"theta": (e.parameters["incline_angle"], "rad", "incline angle"),
                              "g": (_g(scene), "m/s^2", "strength of the uniform gravitational field")},
    perturb=lambda e: [f"{e.name}.incline_angle", "scene.g"],
    observe=lambda trace, e, values: _first_sample(trace, f"{e.name}.roller", "acceleration_norm"),
    question=lambda e: (f"{_ROLL_NAME[e.parameters['shape']['kind']].capitalize()} rolls without slipping down a "
                        "fixed plane inclined at angle theta in a uniform gravitational field g. "
                        "What is the magnitude of the acceleration of its centre?"),
)


# -- oscillation and orbits ----------------------------------------------------


def _pend_applies(scene, e):
    p = e.parameters
    shapes = p["shapes"]
    if not (_alone(scene) and _down_only(scene) and len(shapes) == 1 and shapes[0]["kind"] == "mass"):
        return False
    period = 2 * math.pi * math.sqrt(shapes[0]["offset"] / _g(scene))
    return abs(p["initial_angle"]) <= 0.2 and 2.5 * period < 10.0


def _pend_observe(trace, e, values):
    x = trace.series(f"{e.name}.shape0", "displacement_x") - e.position[0]
    ups = _crossing_times(x, trace.times, upward=True)
    downs = _crossing_times(x, trace.times, upward=False)
    cross = np.sort(np.concatenate([ups, downs]))
    if len(cross) < 3:
        return math.nan
    return float(2 * np.mean(np.diff(cross)))


PENDULUM = ClosedForm(
    name="pendulum_period",
    kind="rotation_entity",
    quantity="period",
    target=lambda e: f"{e.name}.shape0",
    applies=_pend_applies,
    expression=lambda e: "2*pi*sqrt(L/g)",
    symbols=lambda scene, e: {"L": (e.parameters["shapes"][0]["offset"], "m", "length of the pendulum"),
                              "g": (_g(scene), "m/s^2", "strength of the uniform gravitational field")},
    perturb=lambda e: [f"{e.name}.shapes[0].offset", "scene.g"],
    observe=_pend_observe,
    question=lambda e: ("A small bob hangs from a fixed pivot on a light rigid rod of length L in a uniform "
                        "gravitational field g and swings with a small amplitude. What is its period?"),
)


def _orbit_factor(e) -> float:
    f = e.parameters.get("speed_factors")
    return 1.0 if f is None else f[0]


def _orbit_applies(scene, e):
    p = e.parameters
    return len(p["planet_masses"]) == 1 and _orbit_factor(e) < 1.3


def _orbit_symbols(scene, e):
    p = e.parameters
    out = {"M": (p["star_mass"], "kg", "mass of the star"),
           "r": (p["orbit_radii"][0], "m", "initial distance of the planet from the star"),
           "G": (G_NEWTON, "m^3/(kg*s^2)", "gravitational constant")}
    if "speed_factors" in p:
        out["f"] = (_orbit_factor(e), "", "launch speed as a multiple of the circular orbit speed at distance r")
    return out


def _orbit_observe(trace, e, values):
    y = trace.series(f"{e.name}.planet0", "displacement_y") - e.position[1]
    ups = _crossing_times(y, trace.times, upward=True)
    ups = ups[ups > trace.times[1]]
    return float(ups[0]) if len(ups) else math.nan


def _orbit_question(e):
    if "speed_factors" in e.parameters:
        return ("A planet starts at distance r from a fixed star of mass M, moving perpendicular to the line "
                "joining them at f times the circular orbit speed at that distance. With gravitational "
                "constant G, what is its orbital period?")
    return ("A planet moves on a circular orbit of radius r around a fixed star of mass M. With "
            "gravitational constant G, what is its orbital period?")


ORBIT = ClosedForm(
    name="orbit_period",
    kind="solar_system",
    quantity="period",
    target=lambda e: f"{e.name}.planet0",
    applies=_orbit_applies,
    expression=lambda e: ("2*pi*sqrt((r/(2 - f^2))^3/(G*M))" if "speed_factors" in e.parameters
                          else "2*pi*sqrt(r^3/(G*M))"),
    symbols=_orbit_symbols,
    perturb=lambda e: [f"{e.name}.star_mass", f"{e.name}.orbit_radii[0]"]
    + ([f"{e.name}.speed_factors[0]"] if "speed_factors" in e.parameters else []),
    observe=_orbit_observe,
    question=_orbit_question,
)


# -- rockets and collisions ------------------------------------------------------


def _rocket_applies(scene, e):
    return e.parameters["gravity_model"] == "uniform" and _down_only(scene)


ROCKET = ClosedForm(
    name="rocket_burnout_speed",
    kind="rocket_entity",
    quantity="burnout_speed",
    target=lambda e: f"{e.name}.rocket",
    applies=_rocket_applies,
    expression=lambda e: "u*log(m_0/m_d) - g*(m_0 - m_d)/b",
    symbols=lambda scene, e: {
        "u": (e.parameters["exhaust_speed"], "m/s", "exhaust speed relative to the rocket"),
        "m_0": (e.parameters["m0"], "kg", "initial mass"),
        "m_d": (e.parameters["m_dry"], "kg", "dry mass"),
        "b": (e.parameters["burn_rate"], "kg/s", "fuel burn rate"),
        "g": (_g(scene), "m/s^2", "strength of the uniform gravitational field"),
    },
    perturb=lambda e: [f"{e.name}.exhaust_speed", f"{e.name}.m0", f"{e.name}.burn_rate", "scene.g"],
    observe=lambda trace, e, values: trace.probe(
        f"{e.name}.rocket", "velocity_z", (e.parameters["m0"] - e.parameters["m_dry"]) / e.parameters["burn_rate"]),
    question=lambda e: ("A rocket of initial mass m_0 and dry mass m_d stands on the ground in a uniform "
                        "gravitational field g. It burns fuel at a constant rate b, ejecting it straight down at "
                        "speed u relative to the rocket. What is its upward speed when the fuel runs out?"),
)


def _collide_applies(scene, e):
    objs = e.parameters["objects"]
    if len(objs) != 2 or any(o["type"] not in ("sphere", "block") for o in objs):
        return False
    a, b = objs
    closing = a["v"] - b["v"]
    if closing <= 0:
        return False
    half = lambda o: o["r"] if o["type"] == "sphere" else o["size"] / 2  # noqa: E731
    gap = (b["x"] - half(b)) - (a["x"] + half(a))
    return gap / closing < 6.0


def _collide_symbols(scene, e):
    a, b = e.parameters["objects"]
    return {"m_1": (a["m"], "kg", "mass of the left object"), "m_2": (b["m"], "kg", "mass of the right object"),
            "v_1": (a["v"], "m/s", "initial velocity of the left object"),
            "v_2": (b["v"], "m/s", "initial velocity of the right object"),
            "e": (e.parameters["restitution"], "", "coefficient of restitution")}


COLLISION = ClosedForm(
    name="collision_final_velocity",
    kind="complex_collision_plane",
    quantity="final_velocity",
    target=lambda e: f"{e.name}.obj0",
    applies=_collide_applies,
    expression=lambda e: "(m_1*v_1 + m_2*v_2 - e*m_2*(v_1 - v_2))/(m_1 + m_2)",
    symbols=_collide_symbols,
    perturb=lambda e: [f"{e.name}.objects[0].m", f"{e.name}.objects[1].m", f"{e.name}.objects[0].v",
                       f"{e.name}.restitution"],
    observe=lambda trace, e, values: float(trace.series(f"{e.name}.obj0", "velocity_x")[-1]),
    question=lambda e: ("Two objects of masses m_1 and m_2 slide along a frictionless straight track with "
                        "velocities v_1 and v_2, the first behind the second and catching up. They collide "
                        "with coefficient of restitution e. What is the velocity of the first object after the collision?"),
)


CLOSED_FORMS = (FREE_FALL, PROJECTILE, ATWOOD_ACCEL, ATWOOD_TENSION, INCLINE, ROLLING, PENDULUM, ORBIT, ROCKET, COLLISION)


def options(scene: SceneSpec) -> list[tuple[ClosedForm, object]]:
    """Every (closed form, entity) pair that applies to ``scene``."""
    out = []
    for e in scene.entities:
        for cf in CLOSED_FORMS:
            if cf.kind == e.kind and cf.applies(scene, e):
                out.append((cf, e))
    return out


def find(scene: SceneSpec, body: str, quantity: str):
    for cf, e in options(scene):
        if cf.target(e) == body and cf.quantity == quantity:
            return cf, e
    return None


def param_value(scene: SceneSpec, path: str) -> float:
    return float(get_param(scene, path))
