"""Seeded procedural scene generation.

Parameters are drawn per family (``mass``, ``angle``, ``orbit_radius``
and so on), each with a ``(lo, hi, law)`` range where ``law`` is
``"uniform"`` or ``"log"``. Drawn values are rounded to three significant
figures, then clamped back into range, so descriptions stay readable.

Multi-entity scenes are joined by a random spanning tree of string
connections between compatible ports, plus the occasional extra string.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dsl import Connection, Endpoint, SceneSpec, canonical_hash, make_entity, make_scene, validate_connection
from .errors import CompileError, DSLError, GenerationError
from .registry import ENTITY_KINDS

DEG = math.pi / 180

DEFAULT_RANGES = {
    "mass": (0.1, 100.0, "log"),
    "pulley_mass": (0.1, 2.0, "log"),
    "angle": (10 * DEG, 80 * DEG, "uniform"),
    "friction": (0.0, 0.6, "uniform"),
    "size": (0.2, 2.0, "uniform"),
    "speed": (0.5, 10.0, "uniform"),
    "restitution": (0.5, 1.0, "uniform"),
    "stiffness": (5.0, 200.0, "log"),
    "star_mass": (1e29, 4e30, "log"),
    "planet_mass": (1e22, 1e27, "log"),
    "planet_radius": (2e6, 7e7, "log"),
    "orbit_radius": (5e10, 5e11, "log"),
    "speed_factor": (0.85, 1.15, "uniform"),
    "dry_mass": (100.0, 2000.0, "log"),
    "mass_ratio": (1.5, 4.0, "uniform"),
    "exhaust_speed": (1500.0, 4500.0, "uniform"),
    "thrust_ratio": (1.5, 3.0, "uniform"),
    "charge": (-2.0, 2.0, "uniform"),
    "electric_field": (-5.0, 5.0, "uniform"),
    "magnetic_field": (-2.0, 2.0, "uniform"),
    "omega": (0.5, 5.0, "uniform"),
}
POSITIVE_FAMILIES = {"mass", "pulley_mass", "angle", "size", "stiffness", "star_mass", "planet_mass",
                     "planet_radius", "orbit_radius", "speed_factor", "dry_mass", "mass_ratio", "exhaust_speed",
                     "thrust_ratio", "omega"}

SPACING = 4.0  # x distance between neighbouring entities, m
EXTRA_LINK_P = 0.1


@dataclass(frozen=True)
class GenConfig:
    rng_seed: int = 0
    entity_count_range: tuple[int, int] = (1, 3)
    allowed_entity_kinds: frozenset = frozenset(ENTITY_KINDS)
    parameter_ranges: dict = field(default_factory=dict)  # overrides of DEFAULT_RANGES
    max_attempts: int = 50

    def __post_init__(self):
        lo, hi = self.entity_count_range
        if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
            raise GenerationError(f"entity_count_range must satisfy 1 <= min <= max, got {self.entity_count_range}")
        kinds = frozenset(self.allowed_entity_kinds)
        object.__setattr__(self, "allowed_entity_kinds", kinds)
        if not kinds or not kinds <= set(ENTITY_KINDS):
            raise GenerationError(f"allowed_entity_kinds must be a nonempty subset of {sorted(ENTITY_KINDS)}")
        for name, spec in self.parameter_ranges.items():
            if name not in DEFAULT_RANGES:
                raise GenerationError(f"unknown parameter family {name!r}")
            a, b, law = spec
            if law not in ("uniform", "log"):
                raise GenerationError(f"{name}: sampling law must be uniform or log")
            if not a <= b:
                raise GenerationError(f"{name}: empty range [{a}, {b}]")
            if (law == "log" or name in POSITIVE_FAMILIES) and not a > 0:
                raise GenerationError(f"{name}: lower bound must be > 0")
        if not (isinstance(self.max_attempts, int) and self.max_attempts >= 1):
            raise GenerationError("max_attempts must be >= 1")

    def range(self, family: str) -> tuple[float, float, str]:
        return tuple(self.parameter_ranges.get(family, DEFAULT_RANGES[family]))


def round_sig(x: float, digits: int = 3) -> float:
    if x == 0 or not math.isfinite(x):
        return float(x)
    return float(f"{x:.{digits - 1}e}")


class Sampler:
    """Draws rounded parameter values from the configured families."""

    def __init__(self, cfg: GenConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng

    def __call__(self, family: str, n: int | None = None):
        if n is not None:
            return [self(family) for _ in range(n)]
        lo, hi, law = self.cfg.range(family)
        if law == "log":
            x = math.exp(self.rng.uniform(math.log(lo), math.log(hi)))
        else:
            x = self.rng.uniform(lo, hi)
        return min(max(round_sig(x), lo), hi)

    def choice(self, items):
        items = list(items)
        return items[int(self.rng.integers(len(items)))]

    def uniform(self, lo, hi):
        return round_sig(self.rng.uniform(lo, hi))


# -- per-kind parameter samplers ---------------------------------------------


def _fixed_pulley(s: Sampler, alone: bool):
    kinds = ["Atwood", "Mass", "MassStack"] if alone else ["Mass", "MassStack"]
    t = s.choice(kinds)
    n = {"Atwood": 2, "Mass": 1, "MassStack": int(s.rng.integers(2, 4))}[t]
    return {"mass_type": t, "mass_values": s("mass", n), "pulley_mass": s("pulley_mass")}


def _movable(s, alone):
    return {"mass_values": s("mass", 1), "pulley_mass": s("pulley_mass")}


def _two_side(s, alone):
    angle = 0.0 if s.rng.random() < 0.25 else s("angle")
    return {"mass": s("mass"), "incline_angle": angle, "friction": s("friction")}


def _stacked(s, alone):
    n = int(s.rng.integers(2, 4))
    return {"mass_values": s("mass", n), "friction_coefficients": s("friction", n)}


def _directed(s, alone):
    return {"mass_values": s("mass", 1), "pulley_mass": s("pulley_mass")}


def _prism(s, alone):
    n = int(s.rng.integers(1, 3))
    return {"prism_mass": s("mass"), "alpha_L": s("angle"), "alpha_R": s("angle"), "mass_values": s("mass", n)}


def _box(s, alone):
    n = int(s.rng.integers(1, 3))
    return {"box_mass": s("mass"), "mass_values": s("mass", n)}


def _twod(s, alone):
    n = int(s.rng.integers(2, 4))
    radii = [min(r, 0.8) for r in s("size", n)]
    positions, velocities = [], []
    for i in range(n):
        # spheres spread along x, aimed roughly at the centre
        x = round_sig(-4.0 + 8.0 * i / (n - 1) + s.rng.uniform(-0.3, 0.3)) if n > 1 else 0.0
        y = s.uniform(-0.5, 0.5)
        positions.append([x, y])
        speed = s("speed")
        velocities.append([round_sig(-speed * np.sign(x) if x else 0.0), s.uniform(-0.5, 0.5)])
    return {"masses": s("mass", n), "radii": radii, "positions": positions, "velocities": velocities,
            "restitution": 1.0 if s.rng.random() < 0.5 else s("restitution")}


def _complex(s, alone):
    objs = []
    x = -6.0
    n = int(s.rng.integers(2, 4))
    for i in range(n):
        t = s.choice(["sphere", "block", "wall", "spring_block"] if 0 < i < n - 1 else ["sphere", "block", "wall"])
        if t == "wall" and (i not in (0, n - 1)):
            t = "block"
        v = s.uniform(-3, 3) if i else s("speed")
        if t == "wall":
            objs.append({"type": "wall", "x": round_sig(x)})
            x += 3.0
        elif t == "sphere":
            r = min(s("size"), 0.6)
            objs.append({"type": "sphere", "m": s("mass"), "r": r, "x": round_sig(x + r), "v": v})
            x += 2 * r + 3.0
        elif t == "block":
            size = min(s("size"), 1.0)
            objs.append({"type": "block", "m": s("mass"), "size": size, "x": round_sig(x + size / 2), "v": v})
            x += size + 3.0
        else:
            size = 0.5
            l0 = s.uniform(1.0, 2.0)
            x0 = round_sig(x + size / 2)
            objs.append({"type": "spring_block", "m": s("mass", 2), "k": [s("stiffness")], "l0": [l0],
                         "x": [x0, round_sig(x0 + l0)], "v": [v, 0.0], "size": size})
            x = x0 + l0 + size / 2 + 3.0
    if all(o["type"] == "wall" for o in objs):
        objs[-1] = {"type": "block", "m": s("mass"), "size": 0.5, "x": objs[-1]["x"] + 0.5, "v": -1.0}
    return {"objects": objs, "restitution": 1.0 if s.rng.random() < 0.5 else s("restitution")}


def _solar(s, alone):
    n = 1 if s.rng.random() < 0.7 else 2
    r0 = s("orbit_radius")
    radii = [r0] + [round_sig(r0 * s.rng.uniform(1.2, 1.5)) for _ in range(n - 1)]
    return {"star_mass": s("star_mass"), "planet_masses": s("planet_mass", n), "planet_radii": s("planet_radius", n),
            "orbit_radii": radii, "speed_factors": s("speed_factor", n)}


def _rocket(s, alone):
    md = s("dry_mass")
    m0 = round_sig(md * s("mass_ratio"))
    u = s("exhaust_speed")
    g0 = 9.82  # surface gravity of the default planet, rounded up
    rate = round_sig(m0 * g0 * s("thrust_ratio") / u)
    return {"m_dry": md, "m0": m0, "burn_rate": rate, "exhaust_speed": u,
            "gravity_model": s.choice(["newtonian", "uniform"])}


def _shape(s, kinds):
    kind = s.choice(kinds)
    r = min(s("size"), 1.0)
    m = s("mass")
    if kind == "mass":
        return {"kind": "mass", "m": m}
    if kind in ("sphere", "disc", "hemisphere"):
        return {"kind": kind, "r": r, "m": m}
    if kind == "cylinder":
        return {"kind": kind, "r": r, "h": s("size"), "m": m}
    if kind == "bar":
        return {"kind": kind, "w": s("size"), "l": s("size"), "h": s("size"), "m": m}
    return {"kind": "sphere_with_hole", "r": r, "r_h": round_sig(r * 0.4), "p_h": 0.0, "t": round_sig(r * 0.2), "m": m}


def _rotation(s, alone):
    shapes = []
    for _ in range(int(s.rng.integers(1, 3))):
        o = _shape(s, ["mass", "sphere", "disc", "cylinder", "bar"])
        o["offset"] = s("size")
        shapes.append(o)
    return {"shapes": shapes, "initial_angle": s.uniform(0.05, 1.0)}


def _rolling(s, alone):
    return {"shape": _shape(s, ["sphere", "cylinder", "disc", "sphere_with_hole"]), "incline_angle": s("angle")}


def _em(s, alone):
    p = {"mass": s("mass"), "charge": s("charge"), "velocity": [s.uniform(-5, 5), s.uniform(-5, 5), s.uniform(0, 10)]}
    if s.rng.random() < 0.7:
        p["electric_field"] = s("electric_field", 3)
        p["magnetic_field"] = s("magnetic_field", 3)
        if s.rng.random() < 0.3:
            p["field_mode"] = "oscillating"
            p["omega"] = s("omega")
    return p


SAMPLERS = {
    "mass_with_fixed_pulley": _fixed_pulley,
    "mass_with_movable_pulley": _movable,
    "mass_with_reverse_movable_pulley": _movable,
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


# -- assembly -----------------------------------------------------------------


def _free_pairs(a, b, occupied):
    out = []
    for pa in a.connection_points:
        for pb in b.connection_points:
            if validate_connection((a, pa.name), (b, pb.name), occupied):
                out.append((pa.name, pb.name))
    return out


def _attempt(cfg: GenConfig, rng: np.random.Generator) -> SceneSpec:
    s = Sampler(cfg, rng)
    lo, hi = cfg.entity_count_range
    count = int(rng.integers(lo, hi + 1))
    kinds = sorted(cfg.allowed_entity_kinds)
    if count > 1:
        kinds = [k for k in kinds if ENTITY_KINDS[k].connectable]
        if not kinds:
            raise GenerationError("no connectable entity kinds for a multi-entity scene")
    entities = []
    for i in range(count):
        kind = s.choice(kinds)
        params = SAMPLERS[kind](s, count == 1)
        entities.append(make_entity(f"e{i}", kind, (SPACING * i, 0.0, 0.0), params))
        if count > 1 and not entities[-1].connection_points:
            raise GenerationError(f"{kind} instance has no free ports")

    connections, occupied = [], set()
    for i in range(1, count):
        options = []
        for j in range(i):
            options += [(j, pa, pb) for pa, pb in _free_pairs(entities[j], entities[i], occupied)]
        if not options:
            raise GenerationError("no compatible ports to connect the scene")
        j, pa, pb = options[int(rng.integers(len(options)))]
        connections.append(Connection(Endpoint(entities[j].name, pa), Endpoint(entities[i].name, pb)))
        occupied |= {(entities[j].name, pa), (entities[i].name, pb)}
    for i in range(count):
        for j in range(i + 1, count):
            pairs = _free_pairs(entities[i], entities[j], occupied)
            if pairs and rng.random() < EXTRA_LINK_P:
                pa, pb = pairs[int(rng.integers(len(pairs)))]
                connections.append(Connection(Endpoint(entities[i].name, pa), Endpoint(entities[j].name, pb)))
                occupied |= {(entities[i].name, pa), (entities[j].name, pb)}
    return make_scene(f"scene_{cfg.rng_seed:016x}", entities, connections, rng_seed=cfg.rng_seed)


def generate_scene(cfg: GenConfig) -> SceneSpec:
    """Random valid scene; a pure function of ``cfg``.

    Every attempt draws from the same seeded stream, so the first accepted
    attempt is reproducible. A scene is accepted when it validates and
    compiles.
    """
    from .sim import compile_scene

    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
    last = None
    for _ in range(cfg.max_attempts):
        try:
            scene = _attempt(cfg, rng)
            compile_scene(scene)
            return scene
        except (DSLError, CompileError, GenerationError) as exc:
            last = exc
    raise GenerationError(f"no valid scene after {cfg.max_attempts} attempts: {last}")


def derive_seed(seed: int, *path: int) -> int:
    """64-bit child seed of ``seed`` at position ``path``."""
    ss = np.random.SeedSequence([seed, *path])
    return int(ss.generate_state(1, np.uint64)[0])


def generate_batch(cfg: GenConfig, n: int, retries: int = 20) -> list[SceneSpec]:
    """``n`` scenes with distinct canonical hashes; scene ``i`` uses child seed ``i``."""
    if not (isinstance(n, int) and n >= 1):
        raise GenerationError("n must be >= 1")
    out, seen = [], set()
    for i in range(n):
        for attempt in range(retries + 1):
            seed = derive_seed(cfg.rng_seed, i, attempt) if attempt else derive_seed(cfg.rng_seed, i)
            scene = generate_scene(replace(cfg, rng_seed=seed))
            h = canonical_hash(scene)
            if h not in seen:
                seen.add(h)
                out.append(scene)
                break
        else:
            raise GenerationError(f"could not find a new distinct scene for slot {i} after {retries} retries")
    return out
