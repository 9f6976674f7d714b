"""Per-entity dynamics templates.

Each builder adds coordinates, bodies, strings, contacts, travel limits,
weldable joints and open string ports for one entity. Geometry that the
scene does not parameterize (hanging room, clearances) is fixed here.
"""
from __future__ import annotations

import math

import numpy as np

from ..dsl import EntitySpec
from ..errors import CompileError
from ..inertia import mass_properties
from .model import (
    Affine,
    Builder,
    CollisionModel,
    ContactModel,
    ForceTerm,
    JointModel,
    LimitModel,
    Pivot,
    StringModel,
)

G_NEWTON = 6.6743e-11

HANG_ROOM = 6.0  # pulley height above the floor below it
CLEAR = 0.1  # closest approach of a block to a pulley
LINK = 0.5  # spacing of stacked hanging masses and pulley-to-load hooks
SIDE = 0.2  # pulley radius
PLANE_HALF = 5.0  # half-length of level planes with edge pulleys

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
ZERO = np.zeros(3)


def _props(e: EntitySpec, role: str, **geometry):
    spec = e.body(role)
    return mass_properties(spec.kind, spec.params, **geometry)


def _add_body(b: Builder, e: EntitySpec, role: str, kin, mass=None, **kw):
    """Add a body whose frame origin sits at ``kin.p0`` when q = 0."""
    spec = e.body(role)
    com, inertia = _props(e, role, **kw.pop("geometry", {}))
    m = spec.params.get("m", 0.0) if mass is None else mass
    if isinstance(kin, Affine):
        kin.p0 = kin.p0 + kin.R0 @ com
    return b.body(f"{e.name}.{role}", e.name, spec.kind, float(m), inertia, com, kin, **kw)


def _fixed(b: Builder, e: EntitySpec, role: str, where, **kw):
    return _add_body(b, e, role, Affine(np.asarray(where, dtype=float), {}), **kw)


def _contact(b, e, name, supported, normal, tangent, terms, mode="none", mu=0.0, g=None):
    load = 0.0
    if mode == "coulomb":
        load = -sum(b_.mass for b_ in b.bodies if b_.id in supported) * float(np.dot(g, normal))
    b.contacts.append(ContactModel(f"{e.name}.{name}", e.name, list(supported), np.asarray(normal, float),
                                   np.asarray(tangent, float), dict(terms), mode, float(mu), load))


def _joint(b, e, name, kind, *rows):
    b.joints.append(JointModel(f"{e.name}.{name}", e.name, kind, [dict(r) for r in rows]))


def _limit(b, e, name, terms, lo, hi):
    b.limits.append(LimitModel(f"{e.name}.{name}", dict(terms), float(lo), float(hi)))


def _string(b, e, name, terms, offset, stiffness=None, rest=0.0):
    b.strings.append(StringModel(f"{e.name}.{name}", e.name, dict(terms), float(offset), stiffness, float(rest)))


# ---------------------------------------------------------------------------
# pulley systems


def fixed_pulley(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    top, floor = P[2], P[2] - HANG_ROOM
    _fixed(b, e, "pulley", P)
    masses = p["mass_values"]
    if p["mass_type"] == "Atwood":
        zs = [b.coord(f"{e.name}.z{i}", top - HANG_ROOM / 2) for i in range(2)]
        for i, (z, dx) in enumerate(zip(zs, (-SIDE, SIDE))):
            _add_body(b, e, f"mass{i}", Affine(P * (1, 1, 0) + dx * X, {z: Z}))
            _limit(b, e, f"travel{i}", {z: 1.0}, floor, top - CLEAR)
        _string(b, e, "rope", {zs[0]: -1.0, zs[1]: -1.0}, 2 * top + math.pi * SIDE)
        _joint(b, e, "bearing", "pulley_bearing", {zs[0]: 1.0})
        return
    zs = [b.coord(f"{e.name}.z{i}", top - HANG_ROOM / 2 - i * LINK) for i in range(len(masses))]
    for i, z in enumerate(zs):
        _add_body(b, e, f"mass{i}", Affine(P * (1, 1, 0) - SIDE * X, {z: Z}))
    for i in range(len(zs) - 1):
        _string(b, e, f"link{i}", {zs[i]: 1.0, zs[i + 1]: -1.0}, 0.0)
    _limit(b, e, "travel_top", {zs[0]: 1.0}, -math.inf, top - CLEAR)
    _limit(b, e, "travel_floor", {zs[-1]: 1.0}, floor, math.inf)
    b.port(e.name, "outer", {zs[0]: -1.0}, top + math.pi * SIDE, P + SIDE * X)
    _joint(b, e, "bearing", "pulley_bearing", {zs[0]: 1.0})


def _movable(b: Builder, e: EntitySpec):
    P = np.asarray(e.position)
    ceiling, floor = P[2] + HANG_ROOM / 2, P[2] - HANG_ROOM / 2
    zp = b.coord(f"{e.name}.zp", P[2])
    _add_body(b, e, "pulley", Affine(P * (1, 1, 0), {zp: Z}))
    _add_body(b, e, "mass0", Affine(P * (1, 1, 0) - LINK * Z, {zp: Z}))
    _limit(b, e, "travel", {zp: 1.0}, floor + LINK, ceiling - CLEAR)
    _joint(b, e, "bearing", "pulley_bearing", {zp: 1.0})
    return P, zp, ceiling


def movable_pulley(b: Builder, e: EntitySpec, g):
    P, zp, ceiling = _movable(b, e)
    # rope anchored at the ceiling, under the pulley, back up to the port
    b.port(e.name, "top", {zp: -2.0}, 2 * ceiling + math.pi * SIDE, P * (1, 1, 0) + SIDE * X + ceiling * Z)


def reverse_movable_pulley(b: Builder, e: EntitySpec, g):
    P, zp, ceiling = _movable(b, e)
    for name, dx in (("left", -SIDE), ("right", SIDE)):
        b.port(e.name, name, {zp: -1.0}, ceiling, P * (1, 1, 0) + dx * X + ceiling * Z)


def directed_mass(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    top, floor = P[2], P[2] - HANG_ROOM
    _fixed(b, e, "pulley_left", P - 0.5 * X)
    _fixed(b, e, "pulley_right", P + 0.5 * X)
    z = b.coord(f"{e.name}.z", top - HANG_ROOM / 2)
    _add_body(b, e, "mass0", Affine(P * (1, 1, 0), {z: Z}))
    _limit(b, e, "travel", {z: 1.0}, floor, top - CLEAR)
    for name, dx in (("left", -0.5), ("right", 0.5)):
        b.port(e.name, name, {z: -1.0}, top + math.pi * SIDE / 2, P + dx * X)
    _joint(b, e, "bearing", "pulley_bearing", {z: 1.0})


# ---------------------------------------------------------------------------
# planes


def two_side_mass_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    a, L = p["incline_angle"], p["plane_length"]
    d = np.array([math.cos(a), 0.0, math.sin(a)])
    n = np.array([-math.sin(a), 0.0, math.cos(a)])
    _fixed(b, e, "plane", P)
    s = b.coord(f"{e.name}.s", 0.0)
    _add_body(b, e, "mass0", Affine(P + 0.1 * n, {s: d}))
    _contact(b, e, "contact", [f"{e.name}.mass0"], n, d, {s: 1.0}, "coulomb", p["friction"], g)
    _limit(b, e, "travel", {s: 1.0}, -L / 2 + 0.2, L / 2 - 0.2)
    b.port(e.name, "right", {s: -1.0}, L / 2, P + (L / 2) * d)
    b.port(e.name, "left", {s: 1.0}, L / 2, P - (L / 2) * d)
    _joint(b, e, "slide", "plane_contact", {s: 1.0})


def stacked_mass_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    Lb = p["block_length"]
    _fixed(b, e, "plane", P)
    xs = [b.coord(f"{e.name}.x{i}", 0.0) for i in range(len(p["mass_values"]))]
    for i, x in enumerate(xs):
        _add_body(b, e, f"mass{i}", Affine(P + (0.25 + 0.5 * i) * Z, {x: X}))
    ids = [f"{e.name}.mass{i}" for i in range(len(xs))]
    for i, (x, mu) in enumerate(zip(xs, p["friction_coefficients"])):
        terms = {x: 1.0} if i == 0 else {x: 1.0, xs[i - 1]: -1.0}
        name = "ground" if i == 0 else f"interface{i}"
        _contact(b, e, name, ids[i:], Z, X, terms, "coulomb", mu, g)
        if i == 0:
            _limit(b, e, "travel0", terms, -PLANE_HALF + Lb / 2, PLANE_HALF - Lb / 2)
        else:
            _limit(b, e, f"overhang{i}", terms, -Lb / 2, Lb / 2)
        _joint(b, e, f"slide{i}", "plane_contact", terms)
        h = (0.25 + 0.5 * i) * Z
        b.port(e.name, f"left{i}", {x: 1.0}, PLANE_HALF, P - PLANE_HALF * X + h)
        b.port(e.name, f"right{i}", {x: -1.0}, PLANE_HALF, P + PLANE_HALF * X + h)


def mass_prism_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    h = p["prism_height"]
    aL, aR = p["alpha_L"], p["alpha_R"]
    _fixed(b, e, "plane", P)
    X0 = b.coord(f"{e.name}.X", 0.0)
    _add_body(b, e, "prism", Affine(P, {X0: X}), geometry={"height": h})
    apex = P + h * Z
    faces = [
        (np.array([-math.cos(aL), 0.0, -math.sin(aL)]), np.array([-math.sin(aL), 0.0, math.cos(aL)]), h / math.sin(aL)),
        (np.array([math.cos(aR), 0.0, -math.sin(aR)]), np.array([math.sin(aR), 0.0, math.cos(aR)]), h / math.sin(aR)),
    ]
    ss = []
    for i, (d, n, length) in enumerate(faces[: len(p["mass_values"])]):
        s = b.coord(f"{e.name}.s{i}", length / 2)
        ss.append(s)
        _add_body(b, e, f"mass{i}", Affine(apex + 0.05 * n, {X0: X, s: d}))
        _contact(b, e, f"face{i}", [f"{e.name}.mass{i}"], n, d, {s: 1.0})
        _limit(b, e, f"travel{i}", {s: 1.0}, 0.1, length - 0.1)
        _joint(b, e, f"slide{i}", "prism_contact", {s: 1.0})
    if len(ss) == 2:
        _string(b, e, "rope", {ss[0]: 1.0, ss[1]: 1.0}, 0.0)
    everything = [f"{e.name}.prism"] + [f"{e.name}.mass{i}" for i in range(len(ss))]
    _contact(b, e, "ground", everything, Z, X, {X0: 1.0})
    _joint(b, e, "ground", "plane_contact", {X0: 1.0})


def mass_box_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    W, H = p["box_width"], p["box_height"]
    _fixed(b, e, "plane", P)
    X0 = b.coord(f"{e.name}.X", 0.0)
    _add_body(b, e, "box", Affine(P + (H / 2) * Z, {X0: X}))
    u = b.coord(f"{e.name}.u", 0.0)
    _add_body(b, e, "mass0", Affine(P + (H + 0.1) * Z, {X0: X, u: X}))
    _contact(b, e, "top", [f"{e.name}.mass0"], Z, X, {u: 1.0})
    _limit(b, e, "travel_top", {u: 1.0}, -W / 2 + 0.2, W / 2 - 0.1)
    _joint(b, e, "slide_top", "box_contact", {u: 1.0})
    members = [f"{e.name}.box", f"{e.name}.mass0"]
    if len(p["mass_values"]) == 2:
        v = b.coord(f"{e.name}.v", H / 2)
        _add_body(b, e, "mass1", Affine(P + (-W / 2 - 0.1) * X + H * Z, {X0: X, v: -Z}))
        # string from the top block over the corner pulley down the left face
        _string(b, e, "rope", {u: 1.0, v: 1.0}, W / 2 + math.pi * SIDE / 2)
        _contact(b, e, "side", [f"{e.name}.mass1"], X, -Z, {v: 1.0})
        _limit(b, e, "travel_side", {v: 1.0}, 0.2, H - 0.05)
        _joint(b, e, "slide_side", "box_contact", {v: 1.0})
        members.append(f"{e.name}.mass1")
    _contact(b, e, "ground", members, Z, X, {X0: 1.0})
    _joint(b, e, "ground", "plane_contact", {X0: 1.0})


# ---------------------------------------------------------------------------
# collisions


def twod_collision_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    _fixed(b, e, "plane", P)
    n = len(p["masses"])
    for i in range(n):
        (x0, y0), (vx, vy), r = p["positions"][i], p["velocities"][i], p["radii"][i]
        x = b.coord(f"{e.name}.x{i}", x0, vx)
        y = b.coord(f"{e.name}.y{i}", y0, vy)
        _add_body(b, e, f"sphere{i}", Affine(P + r * Z, {x: X, y: Y}))
        _contact(b, e, f"floor{i}", [f"{e.name}.sphere{i}"], Z, X, {x: 1.0})
        _joint(b, e, f"floor{i}", "plane_contact", {x: 1.0}, {y: 1.0})
    for i in range(n):
        for j in range(i + 1, n):
            b.collisions.append(CollisionModel(
                f"{e.name}.hit{i}_{j}", f"{e.name}.sphere{i}", f"{e.name}.sphere{j}", "sphere",
                p["restitution"], p["radii"][i], p["radii"][j]))


def complex_collision_plane(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    _fixed(b, e, "plane", P)
    units = []  # (left body, left half-width, right body, right half-width, wall x)
    for i, o in enumerate(p["objects"]):
        t = o["type"]
        if t == "wall":
            units.append((None, 0.0, None, 0.0, P[0] + o["x"]))
            continue
        if t in ("sphere", "block"):
            hw = o["r"] if t == "sphere" else o["size"] / 2
            x = b.coord(f"{e.name}.x{i}", o["x"], o["v"])
            bid = f"{e.name}.obj{i}"
            if t == "sphere":
                com, inertia = mass_properties("sphere", {"r": o["r"], "m": o["m"]})
            else:
                com, inertia = np.zeros(3), np.zeros((3, 3))
            b.body(bid, e.name, t, o["m"], inertia, com, Affine(P * (0, 1, 1) + hw * Z, {x: X}))
            _contact(b, e, f"floor{i}", [bid], Z, X, {x: 1.0})
            _joint(b, e, f"floor{i}", "plane_contact", {x: 1.0})
            units.append((bid, hw, bid, hw, None))
            continue
        hw = o["size"] / 2
        xa = b.coord(f"{e.name}.x{i}_0", o["x"][0], o["v"][0])
        xb = b.coord(f"{e.name}.x{i}_1", o["x"][1], o["v"][1])
        ids = []
        for k, xc in enumerate((xa, xb)):
            bid = f"{e.name}.obj{i}_{k}"
            ids.append(bid)
            b.body(bid, e.name, "block", o["m"][k], np.zeros((3, 3)), np.zeros(3),
                   Affine(P * (0, 1, 1) + hw * Z, {xc: X}))
            _contact(b, e, f"floor{i}_{k}", [bid], Z, X, {xc: 1.0})
        _string(b, e, f"spring{i}", {xb: 1.0, xa: -1.0}, -o["size"], o["k"][0], o["l0"][0])
        _joint(b, e, f"spring{i}", "spring", {xb: 1.0, xa: -1.0})
        _joint(b, e, f"floor{i}", "plane_contact", {xa: 1.0}, {xb: 1.0})
        b.collisions.append(CollisionModel(f"{e.name}.hit{i}", ids[0], ids[1], "axial", p["restitution"], hw, hw))
        units.append((ids[0], hw, ids[1], hw, None))
    for k, (left, right) in enumerate(zip(units, units[1:])):
        a, ha, wall_a = left[2], left[3], left[4]
        c, hc, wall_c = right[0], right[1], right[4]
        if a is None and c is None:
            continue
        b.collisions.append(CollisionModel(f"{e.name}.gap{k}", a, c, "axial", p["restitution"], ha, hc,
                                           wall_a if wall_a is not None else wall_c))


# ---------------------------------------------------------------------------
# gravitation and variable mass


def kepler_period(a: float, mu: float) -> float:
    return 2 * math.pi * math.sqrt(a**3 / mu)


def solar_system(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    M = p["star_mass"]
    GM = G_NEWTON * M
    _fixed(b, e, "star", P, uniform_gravity=False)
    n = len(p["planet_masses"])
    speeds = p.get("speed_factors") or (1.0,) * n
    phases = p.get("phases") or tuple(2 * math.pi * i / n for i in range(n))
    masses = np.array(p["planet_masses"], dtype=float)
    idx = []
    periods = []
    for i in range(n):
        R, ph = p["orbit_radii"][i], phases[i]
        v = speeds[i] * math.sqrt(GM / R)
        r0 = R * np.array([math.cos(ph), math.sin(ph), 0.0])
        v0 = v * np.array([-math.sin(ph), math.cos(ph), 0.0])
        c = [b.coord(f"{e.name}.p{i}{ax}", r0[k], v0[k]) for k, ax in enumerate("xyz")]
        idx.append(c)
        body = _add_body(b, e, f"planet{i}", Affine(P.copy(), {c[0]: X, c[1]: Y, c[2]: Z}), uniform_gravity=False)
        energy = v * v / 2 - GM / R
        periods.append(kepler_period(-GM / (2 * energy), GM) if energy < 0 else 2 * math.pi * R / v)
        body.potential = _planet_potential(i, idx, masses, GM)
    idx = np.array(idx)

    def force(t, q, v, phase):
        r = q[idx]  # (n, 3)
        d = np.linalg.norm(r, axis=1)
        F = -(GM * masses / d**3)[:, None] * r
        if n > 1:
            diff = r[None, :, :] - r[:, None, :]  # r_j - r_i
            dist = np.linalg.norm(diff, axis=2)
            np.fill_diagonal(dist, np.inf)
            coef = G_NEWTON * masses[:, None] * masses[None, :] / dist**3
            F += (coef[:, :, None] * diff).sum(axis=1)
        Q = np.zeros_like(q)
        Q[idx] = F
        return Q

    b.forces.append(ForceTerm(f"{e.name}.gravitation", fn=force))
    T_min, T_max = min(periods), max(periods)
    b.time_hints.append((4e-4 * T_min, 1.2 * T_max))


def _planet_potential(i, idx, masses, GM):
    def pe(Q, t):
        r = Q[:, idx[i]]
        out = -GM * masses[i] / np.linalg.norm(r, axis=1)
        for j in range(len(idx)):
            if j != i:
                rj = Q[:, idx[j]]
                out = out - 0.5 * G_NEWTON * masses[i] * masses[j] / np.linalg.norm(r - rj, axis=1)
        return out

    return pe


def rocket(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    R, Mp = p["planet_radius"], p["planet_mass"]
    m0, md, mu, u = p["m0"], p["m_dry"], p["burn_rate"], p["exhaust_speed"]
    t_burn = (m0 - md) / mu
    newtonian = p["gravity_model"] == "newtonian"
    GM = G_NEWTON * Mp
    g_surface = GM / R**2 if newtonian else -float(g[2])
    if mu * u <= m0 * g_surface:
        raise CompileError(f"{e.name}: thrust {mu * u:.4g} N cannot lift {m0} kg off the ground")
    _fixed(b, e, "planet", P, uniform_gravity=False)
    h = b.coord(f"{e.name}.h", 0.0)
    base = P + R * Z

    def mass(t):
        return np.maximum(m0 - mu * np.asarray(t, dtype=float), md)

    body = _add_body(b, e, "rocket", Affine(base, {h: Z}), mass=m0, uniform_gravity=False, mass_fn=mass)

    def force(t, q, v, phase):
        m = max(m0 - mu * t, md)
        thrust = mu * u if phase == 0 else 0.0  # phase 1 starts at burnout
        grav = -GM * m / (R + q[h]) ** 2 if newtonian else m * float(g[2])
        Q = np.zeros_like(q)
        Q[h] = thrust + grav
        return Q

    if newtonian:
        body.potential = lambda Q, t: -GM * mass(t) / (R + Q[:, h])
    else:
        body.potential = lambda Q, t: -mass(t) * float(g[2]) * (base[2] + Q[:, h])
    b.forces.append(ForceTerm(f"{e.name}.propulsion", fn=force, time_varying=True))
    b.events.append((t_burn, f"{e.name}.burnout"))
    b.variable_mass = True
    _limit(b, e, "ground", {h: 1.0}, 0.0, math.inf)
    horizon = max(10.0, 1.25 * t_burn)
    b.time_hints.append((horizon / 4000, horizon))


# ---------------------------------------------------------------------------
# rigid rotation and rolling


def rotation(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    th = b.coord(f"{e.name}.theta", p["initial_angle"])
    for i, o in enumerate(p["shapes"]):
        _add_body(b, e, f"shape{i}", Pivot(P.copy(), th, -o["offset"] * Z))
    _joint(b, e, "pivot", "pivot", {th: 1.0})


def rolling(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    a, L = p["incline_angle"], p["plane_length"]
    r = p["shape"]["r"]
    down = np.array([math.cos(a), 0.0, -math.sin(a)])
    n = np.array([math.sin(a), 0.0, math.cos(a)])
    _fixed(b, e, "plane", P)
    s = b.coord(f"{e.name}.s", 0.0)
    kind = p["shape"]["kind"]
    # cylinders and discs roll about their symmetry axis, laid along +y
    R0 = np.array([[1.0, 0, 0], [0, 0, 1.0], [0, -1.0, 0]]) if kind in ("cylinder", "disc") else np.eye(3)
    _add_body(b, e, "roller", Affine(P + r * n, {s: down}, R0, Y.copy(), {s: 1.0 / r}))
    _contact(b, e, "contact", [f"{e.name}.roller"], n, down, {s: 1.0}, "rolling")
    _limit(b, e, "travel", {s: 1.0}, -math.inf, L)
    _joint(b, e, "rolling", "rolling_contact", {s: 1.0})


# ---------------------------------------------------------------------------
# charged particle


def _cross_matrix(w):
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def em_particle(b: Builder, e: EntitySpec, g):
    P = np.asarray(e.position)
    p = e.parameters
    v0 = p["velocity"]
    c = [b.coord(f"{e.name}.{ax}", 0.0, v0[k]) for k, ax in enumerate("xyz")]
    body = _add_body(b, e, "particle", Affine(P.copy(), {c[0]: X, c[1]: Y, c[2]: Z}))
    q = p["charge"]
    E = np.array(p["electric_field"])
    B = np.array(p["magnetic_field"])
    if q == 0 or (not E.any() and not B.any()):
        return
    if p["field_mode"] == "static":
        # v x B = -[B]x v, linear in the velocity
        b.forces.append(ForceTerm(f"{e.name}.lorentz", coords=c, Kv=-q * _cross_matrix(B), f=q * E))
        body.em_potential = lambda Q, t: -q * (Q[:, c] + P) @ E
        return
    w = p["omega"]

    def force(t, qq, v, phase):
        s = math.cos(w * t)
        Q = np.zeros_like(qq)
        Q[c] = q * s * (E + np.cross(v[c], B))
        return Q

    b.forces.append(ForceTerm(f"{e.name}.lorentz", fn=force, time_varying=True))


BUILDERS = {
    "mass_with_fixed_pulley": fixed_pulley,
    "mass_with_movable_pulley": movable_pulley,
    "mass_with_reverse_movable_pulley": reverse_movable_pulley,
    "two_side_mass_plane": two_side_mass_plane,
    "stacked_mass_plane": stacked_mass_plane,
    "directed_mass": directed_mass,
    "mass_prism_plane": mass_prism_plane,
    "mass_box_plane": mass_box_plane,
    "twoD_collision_plane": twod_collision_plane,
    "complex_collision_plane": complex_collision_plane,
    "solar_system": solar_system,
    "rocket_entity": rocket,
    "rotation_entity": rotation,
    "rolling_entity": rolling,
    "em_entity": em_particle,
}
