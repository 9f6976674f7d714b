"""Body and entity catalogs.

The catalog is the single source of truth for what a scene may contain:
which parameters each body and entity takes, how an entity expands into
bodies, which connection ports it exposes and which parameters may be
masked in reverse questions.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import DSLError

# ---------------------------------------------------------------------------
# bodies

BODY_PARAMS: dict[str, tuple[str, ...]] = {
    "mass": ("m",),
    "sphere": ("r", "m"),
    "polygonal_prism": ("n", "r", "h", "m"),
    "cylinder": ("r", "h", "m"),
    "disc": ("r", "m"),
    "bar": ("w", "l", "h", "m"),
    "hemisphere": ("r", "m"),
    "bowl": ("r", "h_c", "t", "m"),
    "sphere_with_hole": ("r", "r_h", "p_h", "t", "m"),
    "rocket": ("m_dry", "m0"),
    "triangular_prism": ("alpha_L", "alpha_R", "m"),
    "plane": ("alpha",),
    "pulley": ("m",),
    "spring_mass_system": ("k", "l0", "x", "m"),
}

# bodies that never move under any scene dynamics
IMMOBILE_BODIES = frozenset({"plane"})

PARAM_UNITS = {
    "m": "kg", "m_dry": "kg", "m0": "kg",
    "r": "m", "h": "m", "w": "m", "l": "m", "h_c": "m", "t": "m", "r_h": "m", "p_h": "m",
    "x": "m", "l0": "m", "k": "N/m", "n": "",
    "alpha": "rad", "alpha_L": "rad", "alpha_R": "rad",
}

_LENGTHS = ("r", "h", "w", "l", "r_h")
_ANGLES = ("alpha_L", "alpha_R")


def validate_body(kind: str, params: dict[str, Any]) -> None:
    """Raise DSLError when a body's parameters break the catalog invariants."""
    if kind not in BODY_PARAMS:
        raise DSLError(f"unknown body kind {kind!r}")
    expected = set(BODY_PARAMS[kind])
    got = set(params)
    if got != expected:
        missing, extra = expected - got, got - expected
        raise DSLError(f"body {kind}: missing {sorted(missing)} unexpected {sorted(extra)}")
    p = params
    if kind == "spring_mass_system":
        ms, xs, ks, l0s = p["m"], p["x"], p["k"], p["l0"]
        if len(ms) < 1 or len(xs) != len(ms) or len(ks) != len(ms) - 1 or len(l0s) != len(ks):
            raise DSLError("spring_mass_system needs len(x)=len(m) and len(k)=len(l0)=len(m)-1")
        if any(v <= 0 for v in list(ms) + list(ks) + list(l0s)):
            raise DSLError("spring_mass_system masses, stiffnesses and natural lengths must be > 0")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DSLError("spring_mass_system positions must be strictly increasing")
        return
    for name in ("m", "m_dry", "m0"):
        if name in p and not p[name] > 0:
            raise DSLError(f"body {kind}: {name} must be > 0, got {p[name]}")
    for name in _LENGTHS:
        if name in p and not p[name] > 0:
            raise DSLError(f"body {kind}: {name} must be > 0, got {p[name]}")
    for name in _ANGLES:
        if name in p and not 0 < p[name] < math.pi / 2:
            raise DSLError(f"body {kind}: {name} must lie in (0, pi/2), got {p[name]}")
    if kind == "plane" and not 0 <= p["alpha"] < math.pi / 2:
        raise DSLError(f"plane slope must lie in [0, pi/2), got {p['alpha']}")
    if kind == "rocket" and p["m0"] < p["m_dry"]:
        raise DSLError(f"rocket initial mass {p['m0']} below dry mass {p['m_dry']}")
    if kind == "polygonal_prism" and (int(p["n"]) != p["n"] or p["n"] < 3):
        raise DSLError("polygonal prism needs an integer number of sides >= 3")
    if kind == "bowl":
        if not -p["r"] < p["h_c"] <= p["r"]:
            raise DSLError("bowl cutting height must lie in (-r, r]")
        if not 0 <= p["t"] < p["r"]:
            raise DSLError("bowl thickness must lie in [0, r)")
    if kind == "sphere_with_hole":
        if abs(p["p_h"]) + p["r_h"] >= p["r"]:
            raise DSLError("spherical hole must lie strictly inside the sphere")
        if not 0 <= p["t"] < p["r"]:
            raise DSLError("shell thickness must lie in [0, r)")


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # float | int | floats | vec3 | vec2s | vec3s | enum | str | object | objects
    default: Any = None
    required: bool = False
    check: str | None = None  # positive | nonneg | angle | incline | unit | positive_all
    unit: str = ""
    choices: tuple[str, ...] = ()
    invertible: bool = False
    ignored: bool = False  # accepted but has no effect on dynamics


def _coerce(param: Param, value: Any, where: str) -> Any:
    def num(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DSLError(f"{where}: expected a number, got {v!r}")
        return float(v)

    def seq(v):
        if not isinstance(v, (list, tuple)):
            raise DSLError(f"{where}: expected a list, got {v!r}")
        return v

    k = param.kind
    if k == "float":
        return num(value)
    if k == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise DSLError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if k == "floats":
        return tuple(num(v) for v in seq(value))
    if k == "vec3":
        v = tuple(num(x) for x in seq(value))
        if len(v) != 3:
            raise DSLError(f"{where}: expected 3 components, got {len(v)}")
        return v
    if k in ("vec2s", "vec3s"):
        dim = 2 if k == "vec2s" else 3
        out = []
        for item in seq(value):
            v = tuple(num(x) for x in seq(item))
            if len(v) != dim:
                raise DSLError(f"{where}: expected {dim} components per entry")
            out.append(v)
        return tuple(out)
    if k == "enum":
        if value not in param.choices:
            raise DSLError(f"{where}: {value!r} not one of {list(param.choices)}")
        return value
    if k == "str":
        if not isinstance(value, str):
            raise DSLError(f"{where}: expected a string")
        return value
    if k == "object":
        if not isinstance(value, dict):
            raise DSLError(f"{where}: expected a mapping")
        return _freeze(value)
    if k == "objects":
        if not isinstance(value, (list, tuple)) or not all(isinstance(o, dict) for o in value):
            raise DSLError(f"{where}: expected a list of mappings")
        return tuple(_freeze(o) for o in value)
    raise AssertionError(k)


def _freeze(obj):
    if isinstance(obj, dict):
        return {str(k): _freeze(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int):
        return float(obj)
    return obj


def _check(param: Param, value: Any, where: str) -> None:
    c = param.check
    if c is None:
        return
    vals = value if isinstance(value, tuple) else (value,)
    flat = []
    for v in vals:
        flat.extend(v if isinstance(v, tuple) else (v,))
    if c == "positive" and not all(v > 0 for v in flat):
        raise DSLError(f"{where}: must be > 0, got {value}")
    if c == "nonneg" and not all(v >= 0 for v in flat):
        raise DSLError(f"{where}: must be >= 0, got {value}")
    if c == "angle" and not all(0 < v < math.pi / 2 for v in flat):
        raise DSLError(f"{where}: angle must lie in (0, pi/2) rad, got {value}")
    if c == "incline" and not all(0 <= v < math.pi / 2 for v in flat):
        raise DSLError(f"{where}: slope must lie in [0, pi/2) rad, got {value}")
    if c == "unit" and not all(0 <= v <= 1 for v in flat):
        raise DSLError(f"{where}: must lie in [0, 1], got {value}")


# ---------------------------------------------------------------------------
# ports


@dataclass(frozen=True)
class Port:
    """An open string end exposed by an entity.

    ``direction`` is ``None`` for undirected ends; directed ends must be
    paired with the opposite direction.
    """

    name: str
    direction: str | None = None
    carrier: str = ""  # body the string end is tied to


OPPOSITE = {"inner_to_outer": "outer_to_inner", "outer_to_inner": "inner_to_outer"}


def ports_compatible(a: Port, b: Port) -> tuple[bool, str]:
    if a.direction is None or b.direction is None:
        return True, ""
    if OPPOSITE[a.direction] == b.direction:
        return True, ""
    return False, f"directed ports must oppose: {a.direction} vs {b.direction}"


# ---------------------------------------------------------------------------
# entities


@dataclass(frozen=True)
class EntityKind:
    name: str
    camel: str
    params: tuple[Param, ...]
    bodies: Callable[[dict], list[tuple[str, str, dict]]]
    ports: Callable[[dict], list[Port]]
    validate: Callable[[dict], None] = lambda p: None
    connectable: bool = True
    summary: str = ""

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def normalize(self, raw: dict | None, where: str) -> dict:
        raw = dict(raw or {})
        known = {p.name for p in self.params}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise DSLError(f"{where}: unknown parameter(s) {unknown} for {self.name}")
        out = {}
        for p in self.params:
            w = f"{where}.{p.name}"
            if p.name in raw:
                value = _coerce(p, raw[p.name], w)
            elif p.required:
                raise DSLError(f"{where}: missing required parameter {p.name!r} for {self.name}")
            elif p.default is None:
                continue
            else:
                value = _coerce(p, p.default, w)
            _check(p, value, w)
            out[p.name] = value
        self.validate(out)
        return out


def _mass_list(p, key="mass_values"):
    return list(p[key])


def _fixed_pulley_bodies(p):
    out = [("pulley", "pulley", {"m": p["pulley_mass"]})]
    for i, m in enumerate(p["mass_values"]):
        out.append((f"mass{i}", "mass", {"m": m}))
    return out


def _fixed_pulley_ports(p):
    if p["mass_type"] == "Atwood":
        return []
    return [Port("outer", "inner_to_outer", "mass0")]


def _fixed_pulley_validate(p):
    n = len(p["mass_values"])
    t = p["mass_type"]
    if t == "Mass" and n != 1:
        raise DSLError("mass_type Mass takes exactly one mass value")
    if t == "MassStack" and not 2 <= n <= 4:
        raise DSLError("mass_type MassStack takes 2 to 4 mass values")
    if t == "Atwood" and n != 2:
        raise DSLError("mass_type Atwood takes exactly two mass values")


def _movable_bodies(p):
    return [("pulley", "pulley", {"m": p["pulley_mass"]}), ("mass0", "mass", {"m": p["mass_values"][0]})]


def _single_mass_validate(p):
    if len(p["mass_values"]) != 1:
        raise DSLError("this entity takes exactly one mass value")


def _plane_bodies(p):
    return [("plane", "plane", {"alpha": p["incline_angle"]}), ("mass0", "mass", {"m": p["mass"]})]


def _stacked_bodies(p):
    out = [("plane", "plane", {"alpha": 0.0})]
    out += [(f"mass{i}", "mass", {"m": m}) for i, m in enumerate(p["mass_values"])]
    return out


def _stacked_ports(p):
    out = []
    for i in range(len(p["mass_values"])):
        out += [Port(f"left{i}", None, f"mass{i}"), Port(f"right{i}", None, f"mass{i}")]
    return out


def _stacked_validate(p):
    n = len(p["mass_values"])
    if not 2 <= n <= 3:
        raise DSLError("stacked_mass_plane takes 2 or 3 blocks")
    if len(p["friction_coefficients"]) != n:
        raise DSLError("stacked_mass_plane needs one friction coefficient per block")


def _directed_bodies(p):
    return [
        ("pulley_left", "pulley", {"m": p["pulley_mass"]}),
        ("pulley_right", "pulley", {"m": p["pulley_mass"]}),
        ("mass0", "mass", {"m": p["mass_values"][0]}),
    ]


def _prism_bodies(p):
    out = [
        ("plane", "plane", {"alpha": 0.0}),
        ("prism", "triangular_prism", {"alpha_L": p["alpha_L"], "alpha_R": p["alpha_R"], "m": p["prism_mass"]}),
    ]
    out += [(f"mass{i}", "mass", {"m": m}) for i, m in enumerate(p["mass_values"])]
    return out


def _one_or_two(p):
    if not 1 <= len(p["mass_values"]) <= 2:
        raise DSLError("this entity takes one or two mass values")


def _box_bodies(p):
    out = [
        ("plane", "plane", {"alpha": 0.0}),
        ("box", "bar", {"w": p["box_width"], "l": 1.0, "h": p["box_height"], "m": p["box_mass"]}),
    ]
    out += [(f"mass{i}", "mass", {"m": m}) for i, m in enumerate(p["mass_values"])]
    return out


def _twod_bodies(p):
    out = [("plane", "plane", {"alpha": 0.0})]
    for i, (m, r) in enumerate(zip(p["masses"], p["radii"])):
        out.append((f"sphere{i}", "sphere", {"r": r, "m": m}))
    return out


def _twod_validate(p):
    n = len(p["masses"])
    if n < 2 or not (len(p["radii"]) == len(p["positions"]) == len(p["velocities"]) == n):
        raise DSLError("twoD_collision_plane needs >= 2 spheres with matching radii/positions/velocities")
    for i in range(n):
        for j in range(i + 1, n):
            dx = p["positions"][i][0] - p["positions"][j][0]
            dy = p["positions"][i][1] - p["positions"][j][1]
            if math.hypot(dx, dy) <= p["radii"][i] + p["radii"][j]:
                raise DSLError(f"spheres {i} and {j} overlap initially")


COLLISION_OBJECTS = {
    "sphere": ("m", "r", "x", "v"),
    "block": ("m", "size", "x", "v"),
    "wall": ("x",),
    "spring_block": ("m", "k", "l0", "x", "v", "size"),
}


def _complex_objects(p):
    """Expand collision objects into (index, type, fields) with list fields for spring blocks."""
    return list(enumerate(p["objects"]))


def _complex_bodies(p):
    out = [("plane", "plane", {"alpha": 0.0})]
    for i, o in _complex_objects(p):
        t = o["type"]
        if t == "sphere":
            out.append((f"obj{i}", "sphere", {"r": o["r"], "m": o["m"]}))
        elif t == "block":
            out.append((f"obj{i}", "mass", {"m": o["m"]}))
        elif t == "spring_block":
            out.append(
                (f"obj{i}", "spring_mass_system",
                 {"k": tuple(o["k"]), "l0": tuple(o["l0"]), "x": tuple(o["x"]), "m": tuple(o["m"])})
            )
    return out


def _object_extent(o):
    """(left, right) x-extent of a collision object at t=0."""
    t = o["type"]
    if t == "wall":
        return o["x"], o["x"]
    if t == "sphere":
        return o["x"] - o["r"], o["x"] + o["r"]
    if t == "block":
        return o["x"] - o["size"] / 2, o["x"] + o["size"] / 2
    return o["x"][0] - o["size"] / 2, o["x"][-1] + o["size"] / 2


def _complex_validate(p):
    objs = p["objects"]
    if len(objs) < 2:
        raise DSLError("complex_collision_plane needs at least two objects")
    for i, o in enumerate(objs):
        t = o.get("type")
        if t not in COLLISION_OBJECTS:
            raise DSLError(f"collision object {i}: unknown type {t!r}")
        need = set(COLLISION_OBJECTS[t]) | {"type"}
        if set(o) != need:
            raise DSLError(f"collision object {i} ({t}): expected fields {sorted(need)}, got {sorted(o)}")
        if t == "spring_block":
            n = len(o["m"])
            if n != 2 or len(o["x"]) != 2 or len(o["v"]) != 2 or len(o["k"]) != 1 or len(o["l0"]) != 1:
                raise DSLError(f"collision object {i}: spring_block joins exactly two masses with one spring")
            validate_body("spring_mass_system", {"k": o["k"], "l0": o["l0"], "x": o["x"], "m": o["m"]})
            if o["x"][1] - o["x"][0] <= o["size"]:
                raise DSLError(f"collision object {i}: spring block masses overlap")
        else:
            for key in ("m", "r", "size"):
                if key in o and not o[key] > 0:
                    raise DSLError(f"collision object {i}: {key} must be > 0")
    ext = [_object_extent(o) for o in objs]
    for a, b in zip(ext, ext[1:]):
        if b[0] <= a[1]:
            raise DSLError("collision objects must be listed left to right without overlap")
    if sum(o["type"] != "wall" for o in objs) < 1:
        raise DSLError("complex_collision_plane needs at least one movable object")


def _solar_bodies(p):
    out = [("star", "sphere", {"r": p["star_radius"], "m": p["star_mass"]})]
    for i, (m, r) in enumerate(zip(p["planet_masses"], p["planet_radii"])):
        out.append((f"planet{i}", "sphere", {"r": r, "m": m}))
    return out


def _solar_validate(p):
    n = len(p["planet_masses"])
    if n < 1 or len(p["planet_radii"]) != n or len(p["orbit_radii"]) != n:
        raise DSLError("solar_system needs matching planet_masses, planet_radii and orbit_radii")
    if "speed_factors" in p and len(p["speed_factors"]) != n:
        raise DSLError("solar_system speed_factors must match the planet count")
    if "phases" in p and len(p["phases"]) != n:
        raise DSLError("solar_system phases must match the planet count")
    if min(p["orbit_radii"]) <= p["star_radius"]:
        raise DSLError("planet orbit inside the star")


def _rocket_bodies(p):
    return [
        ("planet", "sphere", {"r": p["planet_radius"], "m": p["planet_mass"]}),
        ("rocket", "rocket", {"m_dry": p["m_dry"], "m0": p["m0"]}),
    ]


def _rocket_validate(p):
    if p["m0"] < p["m_dry"]:
        raise DSLError(f"rocket initial mass {p['m0']} below dry mass {p['m_dry']}")


SHAPE_KINDS = ("sphere", "cylinder", "disc", "bar", "hemisphere", "polygonal_prism", "bowl", "sphere_with_hole", "mass")
ROLLING_SHAPES = ("sphere", "cylinder", "disc", "sphere_with_hole")


def _shape_params(o):
    kind = o["kind"]
    params = {k: o[k] for k in BODY_PARAMS[kind] if k in o}
    if kind == "polygonal_prism" and "n" in params:
        params["n"] = int(params["n"])
    return kind, params


def _rotation_bodies(p):
    out = []
    for i, o in enumerate(p["shapes"]):
        kind, params = _shape_params(o)
        out.append((f"shape{i}", kind, params))
    return out


def _rotation_validate(p):
    if not p["shapes"]:
        raise DSLError("rotation_entity needs at least one shape")
    for i, o in enumerate(p["shapes"]):
        kind = o.get("kind")
        if kind not in SHAPE_KINDS:
            raise DSLError(f"shape {i}: unsupported kind {kind!r}")
        extra = set(o) - set(BODY_PARAMS[kind]) - {"kind", "offset"}
        if extra:
            raise DSLError(f"shape {i}: unknown fields {sorted(extra)}")
        if "offset" not in o or not o["offset"] > 0:
            raise DSLError(f"shape {i}: offset from the pivot must be > 0")
        validate_body(kind, _shape_params(o)[1])
    if abs(p["initial_angle"]) >= math.pi:
        raise DSLError("initial_angle must lie in (-pi, pi)")


def _rolling_bodies(p):
    kind, params = _shape_params(p["shape"])
    return [("plane", "plane", {"alpha": p["incline_angle"]}), ("roller", kind, params)]


def _rolling_validate(p):
    o = p["shape"]
    kind = o.get("kind")
    if kind not in ROLLING_SHAPES:
        raise DSLError(f"rolling_entity supports {list(ROLLING_SHAPES)}, got {kind!r}")
    extra = set(o) - set(BODY_PARAMS[kind]) - {"kind"}
    if extra:
        raise DSLError(f"rolling shape: unknown fields {sorted(extra)}")
    validate_body(kind, _shape_params(o)[1])
    if kind == "sphere_with_hole" and o["p_h"] != 0:
        raise DSLError("rolling sphere_with_hole needs a concentric hole (p_h = 0)")
    if p["incline_angle"] <= 0:
        raise DSLError("rolling_entity needs a positive incline angle")


def _em_bodies(p):
    return [("particle", "mass", {"m": p["mass"]})]


def _no_ports(p):
    return []


_POS = "positive"

ENTITY_KINDS: dict[str, EntityKind] = {}


def _register(kind: EntityKind) -> None:
    ENTITY_KINDS[kind.name] = kind


_register(EntityKind(
    "mass_with_fixed_pulley", "MassWithFixedPulley",
    (
        Param("mass_type", "enum", "Mass", choices=("Mass", "MassStack", "Atwood")),
        Param("mass_values", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("pulley_mass", "float", 0.5, check=_POS, unit="kg"),
        Param("string_length", "float", None, check=_POS, unit="m", ignored=True, invertible=True),
    ),
    _fixed_pulley_bodies, _fixed_pulley_ports, _fixed_pulley_validate,
    summary="fixed pulley with hanging masses",
))
_register(EntityKind(
    "mass_with_movable_pulley", "MassWithMovablePulley",
    (
        Param("mass_values", "floats", (1.0,), check=_POS, unit="kg", invertible=True),
        Param("pulley_mass", "float", 0.5, check=_POS, unit="kg", invertible=True),
        Param("string_length", "float", None, check=_POS, unit="m", ignored=True, invertible=True),
    ),
    _movable_bodies, lambda p: [Port("top", "outer_to_inner", "pulley")], _single_mass_validate,
    summary="movable pulley carrying a load",
))
_register(EntityKind(
    "mass_with_reverse_movable_pulley", "MassWithReverseMovablePulley",
    (
        Param("mass_values", "floats", (1.0,), check=_POS, unit="kg", invertible=True),
        Param("pulley_mass", "float", 0.5, check=_POS, unit="kg", invertible=True),
        Param("string_length", "float", None, check=_POS, unit="m", ignored=True, invertible=True),
    ),
    _movable_bodies,
    lambda p: [Port("left", "outer_to_inner", "pulley"), Port("right", "outer_to_inner", "pulley")],
    _single_mass_validate,
    summary="movable pulley held up by two strings",
))
_register(EntityKind(
    "two_side_mass_plane", "TwoSideMassPlane",
    (
        Param("mass", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("incline_angle", "float", 0.0, check="incline", unit="rad", invertible=True),
        Param("friction", "float", 0.0, check="nonneg", invertible=True),
        Param("plane_length", "float", 10.0, check=_POS, unit="m"),
    ),
    _plane_bodies,
    lambda p: [Port("left", None, "mass0"), Port("right", None, "mass0")],
    summary="block on a plane with strings on both sides",
))
_register(EntityKind(
    "stacked_mass_plane", "StackedMassPlane",
    (
        Param("mass_values", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("friction_coefficients", "floats", required=True, check="nonneg", invertible=True),
        Param("block_length", "float", 2.0, check=_POS, unit="m"),
    ),
    _stacked_bodies, _stacked_ports, _stacked_validate,
    summary="stack of long blocks on a level plane",
))
_register(EntityKind(
    "directed_mass", "DirectedMass",
    (
        Param("mass_values", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("pulley_mass", "float", 0.5, check=_POS, unit="kg"),
        Param("string_length", "float", None, check=_POS, unit="m", ignored=True, invertible=True),
    ),
    _directed_bodies,
    lambda p: [Port("left", "inner_to_outer", "mass0"), Port("right", "inner_to_outer", "mass0")],
    _single_mass_validate,
    summary="block suspended from two fixed pulleys",
))
_register(EntityKind(
    "mass_prism_plane", "MassPrismPlane",
    (
        Param("prism_mass", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("alpha_L", "float", math.pi / 6, check="angle", unit="rad", invertible=True),
        Param("alpha_R", "float", math.pi / 6, check="angle", unit="rad", invertible=True),
        Param("mass_values", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("prism_height", "float", 1.0, check=_POS, unit="m"),
    ),
    _prism_bodies, _no_ports, _one_or_two, connectable=False,
    summary="movable wedge with blocks on its faces",
))
_register(EntityKind(
    "mass_box_plane", "MassBoxPlane",
    (
        Param("box_mass", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("mass_values", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("box_width", "float", 2.0, check=_POS, unit="m"),
        Param("box_height", "float", 1.0, check=_POS, unit="m"),
    ),
    _box_bodies, _no_ports, _one_or_two, connectable=False,
    summary="movable box with blocks on its top and side faces",
))
_register(EntityKind(
    "twoD_collision_plane", "TwoDCollisionPlane",
    (
        Param("masses", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("radii", "floats", required=True, check=_POS, unit="m"),
        Param("positions", "vec2s", required=True, unit="m"),
        Param("velocities", "vec2s", required=True, unit="m/s", invertible=True),
        Param("restitution", "float", 1.0, check="unit", invertible=True),
    ),
    _twod_bodies, _no_ports, _twod_validate, connectable=False,
    summary="spheres sliding and colliding on a frictionless plane",
))
_register(EntityKind(
    "complex_collision_plane", "ComplexCollisionPlane",
    (
        Param("objects", "objects", required=True),
        Param("restitution", "float", 1.0, check="unit", invertible=True),
    ),
    _complex_bodies, _no_ports, _complex_validate, connectable=False,
    summary="one-dimensional collisions between spheres, blocks, walls and spring blocks",
))
_register(EntityKind(
    "solar_system", "SolarSystem",
    (
        Param("star_mass", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("star_radius", "float", 7.0e8, check=_POS, unit="m"),
        Param("planet_masses", "floats", required=True, check=_POS, unit="kg", invertible=True),
        Param("planet_radii", "floats", required=True, check=_POS, unit="m"),
        Param("orbit_radii", "floats", required=True, check=_POS, unit="m", invertible=True),
        Param("speed_factors", "floats", None, check=_POS, invertible=True),
        Param("phases", "floats", None, unit="rad"),
    ),
    _solar_bodies, _no_ports, _solar_validate, connectable=False,
    summary="stationary star with orbiting planets",
))
_register(EntityKind(
    "rocket_entity", "RocketEntity",
    (
        Param("m_dry", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("m0", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("burn_rate", "float", required=True, check=_POS, unit="kg/s", invertible=True),
        Param("exhaust_speed", "float", required=True, check=_POS, unit="m/s", invertible=True),
        Param("planet_mass", "float", 5.972e24, check=_POS, unit="kg", invertible=True),
        Param("planet_radius", "float", 6.371e6, check=_POS, unit="m"),
        Param("gravity_model", "enum", "newtonian", choices=("newtonian", "uniform")),
    ),
    _rocket_bodies, _no_ports, _rocket_validate, connectable=False,
    summary="rocket lifting off a stationary planet",
))
_register(EntityKind(
    "rotation_entity", "RotationEntity",
    (
        Param("shapes", "objects", required=True),
        Param("initial_angle", "float", 0.3, unit="rad", invertible=True),
    ),
    _rotation_bodies, _no_ports, _rotation_validate, connectable=False,
    summary="rigid assembly swinging about a pivot",
))
_register(EntityKind(
    "rolling_entity", "RollingEntity",
    (
        Param("shape", "object", required=True),
        Param("incline_angle", "float", required=True, check="incline", unit="rad", invertible=True),
        Param("plane_length", "float", 20.0, check=_POS, unit="m"),
    ),
    _rolling_bodies, _no_ports, _rolling_validate, connectable=False,
    summary="body rolling without slipping down an incline",
))
_register(EntityKind(
    "em_entity", "EMEntity",
    (
        Param("mass", "float", required=True, check=_POS, unit="kg", invertible=True),
        Param("charge", "float", 0.0, unit="C", invertible=True),
        Param("velocity", "vec3", (0.0, 0.0, 0.0), unit="m/s", invertible=True),
        Param("electric_field", "vec3", (0.0, 0.0, 0.0), unit="V/m", invertible=True),
        Param("magnetic_field", "vec3", (0.0, 0.0, 0.0), unit="T", invertible=True),
        Param("field_mode", "enum", "static", choices=("static", "oscillating")),
        Param("omega", "float", 1.0, check=_POS, unit="rad/s", invertible=True),
    ),
    _em_bodies, _no_ports, connectable=False,
    summary="charged particle in electric and magnetic fields",
))


def _camel_to_snake(name: str) -> str:
    s = re.sub(r"(?<=[a-z0-9])([A-Z])", r"_\1", name)
    return s.lower()


_ALIASES = {k.camel: k.name for k in ENTITY_KINDS.values()}
_ALIASES.update({k.camel.lower(): k.name for k in ENTITY_KINDS.values()})
_ALIASES.update({k: k for k in ENTITY_KINDS})
_ALIASES.update({k.lower(): k for k in ENTITY_KINDS})


def resolve_entity_kind(name: str) -> EntityKind:
    if not isinstance(name, str):
        raise DSLError(f"entity type must be a string, got {name!r}")
    key = _ALIASES.get(name) or _ALIASES.get(name.lower()) or _ALIASES.get(_camel_to_snake(name))
    if key is None:
        raise DSLError(f"unknown entity kind {name!r}")
    return ENTITY_KINDS[key]
