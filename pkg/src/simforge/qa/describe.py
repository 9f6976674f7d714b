"""Templated natural-language scene descriptions.

A description is built from one sentence per entity (its setup and any
entity-level parameters), one phrase per body, one sentence per string
connection and one per welded joint. Every number is printed with
``fmt_number`` so tests can look for it verbatim.
"""
from __future__ import annotations

import math

from ..dsl import SceneSpec, _split_path, _set_in
from ..errors import QAError
from ..registry import ENTITY_KINDS

UNKNOWN = "[unknown]"


class _Masked:
    """Placeholder for the hidden parameter of a reverse question."""

    def __repr__(self):
        return UNKNOWN


MASK = _Masked()


def fmt_number(v) -> str:
    if v is MASK:
        return UNKNOWN
    v = float(v)
    if v.is_integer() and abs(v) < 1e6:
        return str(int(v))
    return repr(v)


def _join(items: list[str]) -> str:
    items = list(items)
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def _nums(values, unit: str = "") -> str:
    tail = f" {unit}" if unit else ""
    return _join([fmt_number(v) + tail for v in values])


def _vec(v, unit: str = "") -> str:
    tail = f" {unit}" if unit else ""
    return "(" + ", ".join(fmt_number(x) for x in v) + ")" + tail


# -- bodies -----------------------------------------------------------------

BODY_TEMPLATES = {
    "mass": "a block {name} of mass {m} kg",
    "sphere": "a sphere {name} of radius {r} m and mass {m} kg",
    "pulley": "a pulley {name} of mass {m} kg",
    "plane": "a fixed plane {name} tilted at {alpha} rad",
    "triangular_prism": "a wedge {name} of mass {m} kg with base angles {alpha_L} rad on the left and {alpha_R} rad on the right",
    "bar": "a rectangular box {name} of width {w} m, depth {l} m, height {h} m and mass {m} kg",
    "cylinder": "a solid cylinder {name} of radius {r} m, height {h} m and mass {m} kg",
    "disc": "a thin disc {name} of radius {r} m and mass {m} kg",
    "hemisphere": "a solid hemisphere {name} of radius {r} m and mass {m} kg",
    "polygonal_prism": "a regular {n}-sided prism {name} of circumradius {r} m, height {h} m and mass {m} kg",
    "bowl": "a bowl {name} of radius {r} m, cut height {h_c} m, wall thickness {t} m and mass {m} kg",
    "sphere_with_hole": "a hollowed sphere {name} of radius {r} m with a hole of radius {r_h} m at offset {p_h} m, "
                        "wall thickness {t} m and mass {m} kg",
    "rocket": "a rocket {name} with dry mass {m_dry} kg and initial mass {m0} kg",
    "spring_mass_system": "two blocks {name} of masses {m} kg at positions {x} m joined by a spring of "
                          "stiffness {k} N/m and natural length {l0} m",
}


def describe_body(name: str, kind: str, params: dict) -> str:
    template = BODY_TEMPLATES.get(kind)
    if template is None:
        raise QAError(f"no description template for body kind {kind!r}")
    values = {}
    for key, v in params.items():
        if isinstance(v, tuple):
            unit = ""
            values[key] = _nums(v, unit)
        elif key == "n" and v is not MASK:
            values[key] = str(int(v))
        else:
            values[key] = fmt_number(v)
    return template.format(name=name, **values)


# -- entities ---------------------------------------------------------------


def _bodies_text(ename: str, bodies, skip=()) -> str:
    return _join([describe_body(f"{ename}.{n}", k, p) for n, k, p in bodies if n not in skip])


def _fixed_pulley(name, p, bodies):
    pulley = describe_body(f"{name}.pulley", "pulley", {"m": p["pulley_mass"]})
    masses = _bodies_text(name, bodies, skip=("pulley",))
    t = p["mass_type"]
    if t == "Atwood":
        return f"Entity {name} is an Atwood machine: {masses} hang from the two ends of one string passing over {pulley}, which is fixed in place."
    if t == "Mass":
        return f"Entity {name} is {pulley} fixed in place, with {masses} hanging from a string over it; the free end of the string is the outer port."
    return (f"Entity {name} is {pulley} fixed in place, with a hanging stack of {masses} "
            f"linked one below the other by short strings; the top block hangs from a string over the pulley whose free end is the outer port.")


def _movable(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=('mass0',))} that can move freely, "
            f"carrying {_bodies_text(name, bodies, skip=('pulley',))} hanging below it; a string to its top port supports it.")


def _reverse_movable(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=('mass0',))} that can move freely, "
            f"carrying {_bodies_text(name, bodies, skip=('pulley',))}; it is held up by two strings leaving its left and right ports.")


def _two_side(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=('mass0',))} of length {fmt_number(p['plane_length'])} m "
            f"carrying {_bodies_text(name, bodies, skip=('plane',))} with friction coefficient {fmt_number(p['friction'])}; "
            f"strings may pull the block from its left and right ports.")


def _stacked(name, p, bodies):
    mu = _nums(p["friction_coefficients"])
    return (f"Entity {name} is a stack on {_bodies_text(name, bodies, skip=[b[0] for b in bodies if b[0] != 'plane'])}: "
            f"{_bodies_text(name, bodies, skip=('plane',))} from bottom to top, each of length {fmt_number(p['block_length'])} m. "
            f"The friction coefficients below each block, from the bottom up, are {mu}.")


def _directed(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=('pulley_left', 'pulley_right', ))} hanging between "
            f"{_bodies_text(name, bodies, skip=('mass0',))}, both fixed, with strings over each pulley ending at its left and right ports.")


def _prism(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=[b[0] for b in bodies if b[0] != 'prism'])} of height "
            f"{fmt_number(p['prism_height'])} m resting on a frictionless level floor, with "
            f"{_bodies_text(name, bodies, skip=('plane', 'prism'))} on its sloped faces. When there are two blocks, a string over the apex joins them. All surfaces are frictionless.")


def _box(name, p, bodies):
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=[b[0] for b in bodies if b[0] != 'box'])} on a frictionless level floor "
            f"with {_bodies_text(name, bodies, skip=('plane', 'box'))}; the first block rests on its top face and the second hangs against its left face, "
            f"joined by a string over the top edge. All surfaces are frictionless.")


def _twod(name, p, bodies):
    spheres = []
    for i, (_, kind, bp) in enumerate(b for b in bodies if b[0] != "plane"):
        spheres.append(f"{describe_body(f'{name}.sphere{i}', kind, bp)} starting at {_vec(p['positions'][i], 'm')} "
                       f"with velocity {_vec(p['velocities'][i], 'm/s')}")
    return (f"Entity {name} is a frictionless level plane with {_join(spheres)}. "
            f"Collisions have coefficient of restitution {fmt_number(p['restitution'])}.")


def _complex(name, p, bodies):
    parts = []
    for i, o in enumerate(p["objects"]):
        t = o["type"]
        if t == "wall":
            parts.append(f"a fixed wall {name}.obj{i} at x = {fmt_number(o['x'])} m")
        elif t == "sphere":
            parts.append(f"a sphere {name}.obj{i} of radius {fmt_number(o['r'])} m and mass {fmt_number(o['m'])} kg "
                         f"at x = {fmt_number(o['x'])} m moving at {fmt_number(o['v'])} m/s")
        elif t == "block":
            parts.append(f"a block {name}.obj{i} of size {fmt_number(o['size'])} m and mass {fmt_number(o['m'])} kg "
                         f"at x = {fmt_number(o['x'])} m moving at {fmt_number(o['v'])} m/s")
        else:
            parts.append(f"two blocks {name}.obj{i}_0 and {name}.obj{i}_1 of size {fmt_number(o['size'])} m, masses "
                         f"{_nums(o['m'], 'kg')}, at x = {_nums(o['x'], 'm')} and moving at {_nums(o['v'], 'm/s')}, "
                         f"joined by a spring of stiffness {_nums(o['k'], 'N/m')} and natural length {_nums(o['l0'], 'm')}")
    return (f"Entity {name} is a frictionless track along x holding, from left to right, {_join(parts)}. "
            f"Collisions have coefficient of restitution {fmt_number(p['restitution'])}.")


def _solar(name, p, bodies):
    n = len(p["planet_masses"])
    speeds = p.get("speed_factors")
    phases = p.get("phases")
    planets = []
    for i in range(n):
        s = (f"{describe_body(f'{name}.planet{i}', 'sphere', {'r': p['planet_radii'][i], 'm': p['planet_masses'][i]})} "
             f"at distance {fmt_number(p['orbit_radii'][i])} m")
        if phases is not None:
            s += f" and phase angle {fmt_number(phases[i])} rad"
        if speeds is not None:
            s += f", launched at {fmt_number(speeds[i])} times the circular orbit speed"
        planets.append(s)
    star = describe_body(f"{name}.star", "sphere", {"r": p["star_radius"], "m": p["star_mass"]})
    tail = "" if speeds is not None else " Each planet starts at the circular orbit speed."
    return (f"Entity {name} is a planetary system: {star} held fixed, orbited by {_join(planets)}. "
            f"All bodies attract by Newtonian gravity.{tail}")


def _rocket(name, p, bodies):
    planet = describe_body(f"{name}.planet", "sphere", {"r": p["planet_radius"], "m": p["planet_mass"]})
    model = ("Newtonian gravity of the planet" if p["gravity_model"] == "newtonian"
             else "the uniform gravity field of the scene")
    return (f"Entity {name} is {describe_body(f'{name}.rocket', 'rocket', {'m_dry': p['m_dry'], 'm0': p['m0']})} "
            f"standing on {planet}, which is held fixed. It burns fuel at {fmt_number(p['burn_rate'])} kg/s with "
            f"exhaust speed {fmt_number(p['exhaust_speed'])} m/s, straight up, until the fuel runs out; it feels {model}.")


def _rotation(name, p, bodies):
    parts = []
    for (bname, kind, bp), o in zip(bodies, p["shapes"]):
        parts.append(f"{describe_body(f'{name}.{bname}', kind, bp)} with its centre {fmt_number(o['offset'])} m below the pivot")
    return (f"Entity {name} is a rigid assembly swinging freely about a fixed horizontal pivot, made of {_join(parts)}. "
            f"It is released from rest at an angle of {fmt_number(p['initial_angle'])} rad from the hanging position.")


def _rolling(name, p, bodies):
    plane = describe_body(f"{name}.plane", "plane", {"alpha": p["incline_angle"]})
    return (f"Entity {name} is {_bodies_text(name, bodies, skip=('plane',))} released from rest on {plane}, "
            f"of length {fmt_number(p['plane_length'])} m; it rolls without slipping.")


def _em(name, p, bodies):
    s = (f"Entity {name} is a point particle {name}.particle of mass {fmt_number(p['mass'])} kg and charge "
         f"{fmt_number(p['charge'])} C with initial velocity {_vec(p['velocity'], 'm/s')}. "
         f"It moves in an electric field {_vec(p['electric_field'], 'V/m')} and a magnetic field {_vec(p['magnetic_field'], 'T')}")
    if p["field_mode"] == "oscillating":
        s += f", both oscillating as cos of {fmt_number(p['omega'])} rad/s times t"
    else:
        s += f", both constant (angular frequency setting {fmt_number(p['omega'])} rad/s unused)"
    return s + "."


ENTITY_TEMPLATES = {
    "mass_with_fixed_pulley": _fixed_pulley,
    "mass_with_movable_pulley": _movable,
    "mass_with_reverse_movable_pulley": _reverse_movable,
    "two_side_mass_plane": _two_side,
    "stacked_mass_plane": _stacked,
    "directed_mass": _directed,
    "mass_prism_plane": _prism,
    "mass_box_plane": _box,
    "twoD_collision_plane": _twod,
    "complex_collision_plane": _complex,
    "solar_system": _solar,
    "rocket_entity": _rocket,
    "rotation_entity": _rotation,
    "rolling_entity": _rolling,
    "em_entity": _em,
}

CONNECTION_TEMPLATES = {
    "tendon": "A taut inextensible string joins port {a} of entity {ea} to port {b} of entity {eb}.",
}


def _entity_text(e, params) -> str:
    fn = ENTITY_TEMPLATES.get(e.kind)
    if fn is None:
        raise QAError(f"no description template for entity kind {e.kind!r}")
    bodies = ENTITY_KINDS[e.kind].bodies(params)
    text = fn(e.name, params, bodies)
    if "string_length" in params:
        text += f" Its string is {fmt_number(params['string_length'])} m long."
    if any(e.position):
        text += f" It is placed at {_vec(e.position, 'm')}."
    return text


def _gravity_text(scene: SceneSpec, masked: str | None) -> str:
    g = scene.gravity
    mag = math.sqrt(sum(v * v for v in g))
    if mag == 0:
        return "There is no gravity."
    shown = MASK if masked == "scene.g" else mag
    axes = [i for i, v in enumerate(g) if v != 0]
    if len(axes) == 1:
        sign = "-" if g[axes[0]] < 0 else "+"
        return f"Uniform gravity of {fmt_number(shown)} m/s^2 points along {sign}{'xyz'[axes[0]]}."
    return f"Uniform gravity of {fmt_number(shown)} m/s^2 points along {_vec([v / mag for v in g])}."


def describe_scene(scene: SceneSpec, masked: str | None = None) -> str:
    """Deterministic description; the parameter at path ``masked`` is hidden."""
    mask_entity, toks = None, None
    if masked is not None and masked != "scene.g":
        toks = _split_path(masked)
        mask_entity = toks[0]
    parts = []
    for e in scene.entities:
        params = e.parameters
        if e.name == mask_entity:
            try:
                params = _set_in(params, toks[1:], MASK)
            except (KeyError, IndexError, TypeError):
                raise QAError(f"parameter path {masked!r} does not resolve") from None
        parts.append(_entity_text(e, params))
    for c in scene.connections:
        template = CONNECTION_TEMPLATES.get(c.kind)
        if template is None:
            raise QAError(f"no description template for connection kind {c.kind!r}")
        text = template.format(a=c.a.port, ea=c.a.entity, b=c.b.port, eb=c.b.entity)
        if c.length is not None:
            text = text[:-1] + f", {fmt_number(c.length)} m long."
        parts.append(text)
    for w in scene.welds:
        parts.append(f"Joint {w} is glued rigid, so the parts it connects move as one body.")
    parts.append(_gravity_text(scene, masked))
    return " ".join(parts)
