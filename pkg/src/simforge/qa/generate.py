"""Numeric, reverse and symbolic question generation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dsl import SceneSpec, canonical_hash, get_param, replace_param
from ..errors import CompileError, DSLError, IdentifiabilityError, PruneError, QAError
from ..prune import PruneConfig
from ..registry import ENTITY_KINDS
from ..runner import run_scene
from ..sim.integrate import POST_STOP
from ..sim.trace import Trace, split_quantity, unit_of
from . import closed_forms, expr
from .describe import describe_scene
from .pairs import MaskedParam, Number, QAPair, Symbolic
from .templates import (NUMERIC_TEMPLATES, REVERSE_TEMPLATES, format_time, format_value, param_phrase, pick,
                        quantity_phrase, target_phrase)

REWARD_TOL = 0.05
SYMBOLIC_DRAWS = 5
SYMBOLIC_REL = 0.01
PERTURB = (0.8, 1.2)


def _provenance(trace_or_hash, body, quantity, t):
    h = trace_or_hash.meta["scene_hash"] if isinstance(trace_or_hash, Trace) else trace_or_hash
    return {"scene_hash": h, "body": body, "quantity": quantity, "t": t}


def _unit(trace: Trace, body: str, quantity: str) -> str:
    return unit_of(quantity, trace.kinds[body])


# -- numeric -------------------------------------------------------------------


def make_numeric(trace: Trace, scene: SceneSpec, body: str, quantity: str, t: float, seed: int = 0) -> QAPair:
    """Forward question: the value of ``quantity`` on ``body`` at time ``t``."""
    value = trace.probe(body, quantity, t)
    kind = trace.kinds[body]
    unit = _unit(trace, body, quantity)
    template_id, template = pick(NUMERIC_TEMPLATES, seed)
    ask = template.format(quantity=quantity_phrase(quantity, kind), target=target_phrase(body, kind), t=format_time(t))
    if unit:
        ask += f" Give the answer in {unit}."
    return QAPair(
        question=f"{describe_scene(scene)} {ask}",
        answer=Number(value, unit),
        mode="numeric",
        provenance=_provenance(trace, body, quantity, t),
        scene=scene,
        template=template_id,
    )


# -- reverse -------------------------------------------------------------------


def invertible_paths(scene: SceneSpec) -> list[str]:
    """Scalar parameter paths that reverse questions may hide."""
    out = []
    if any(scene.gravity):
        out.append("scene.g")
    for e in scene.entities:
        ek = ENTITY_KINDS[e.kind]
        for p in ek.params:
            if not p.invertible or p.name not in e.parameters:
                continue
            v = e.parameters[p.name]
            if isinstance(v, tuple):
                out += [f"{e.name}.{p.name}[{i}]" for i, x in enumerate(v) if isinstance(x, float)]
            elif isinstance(v, float):
                out.append(f"{e.name}.{p.name}")
    return out


def param_unit(scene: SceneSpec, path: str) -> str:
    if path == "scene.g":
        return "m/s^2"
    ent, rest = path.split(".", 1)
    name = rest.split("[", 1)[0]
    return ENTITY_KINDS[scene.entity(ent).kind].param(name).unit


def _is_invertible(scene: SceneSpec, path: str) -> bool:
    return path in invertible_paths(scene)


def probe_horizon(t: float, dt: float | None, horizon: float | None, prune: PruneConfig | None) -> float | None:
    """Shortest run that reproduces every sample, and every prune decision, up to ``t``.

    Windows starting at or before ``t`` end at most ``window`` samples
    later, and the run stops ``POST_STOP`` samples after a limit stop, so
    a margin covering both keeps the result identical to a full run.
    """
    if dt is None or horizon is None:
        return horizon
    w = prune.window if prune is not None else 0
    return min(horizon, t + (w + POST_STOP + 2) * dt)


def check_identifiability(scene: SceneSpec, path: str, observation, observed: float, tol: float = REWARD_TOL,
                          prune: PruneConfig | None = PruneConfig(), dt: float | None = None,
                          horizon: float | None = None) -> tuple[float, float]:
    """Re-simulate with the hidden parameter scaled by 0.9 and 1.1.

    The observation must move monotonically through the original value,
    and the spread between the two perturbed observations must exceed the
    width ``2 * tol * |observed|`` of the reward acceptance band. Returns
    the two perturbed observations.
    """
    body, quantity, t = observation
    value = float(get_param(scene, path))
    obs = []
    for factor in (0.9, 1.1):
        try:
            trace = run_scene(replace_param(scene, path, value * factor), prune, dt=dt,
                              horizon=probe_horizon(t, dt, horizon, prune))
            obs.append(trace.probe(body, quantity, t))
        except (DSLError, CompileError, PruneError) as exc:
            raise IdentifiabilityError(f"{path} x{factor}: {exc}") from None
        except LookupError as exc:
            raise IdentifiabilityError(f"{path} x{factor}: observation unavailable ({exc})") from None
    lo, hi = obs
    if not (lo < observed < hi or lo > observed > hi):
        raise IdentifiabilityError(f"observation is not monotonic in {path}: {lo:.6g}, {observed:.6g}, {hi:.6g}")
    if not abs(hi - lo) > 2 * tol * abs(observed):
        raise IdentifiabilityError(f"observation barely depends on {path}: spread {abs(hi - lo):.3g}")
    return lo, hi


def make_reverse(trace: Trace, scene: SceneSpec, masked_param: str, observation, seed: int = 0,
                 tol: float = REWARD_TOL, prune: PruneConfig | None = PruneConfig()) -> QAPair:
    """Inverse question: hide ``masked_param`` and state one observation."""
    if not _is_invertible(scene, masked_param):
        raise QAError(f"{masked_param!r} is not an invertible parameter of this scene")
    body, quantity, t = observation
    observed = trace.probe(body, quantity, t)
    check_identifiability(scene, masked_param, (body, quantity, t), observed, tol, prune,
                          trace.meta.get("dt"), trace.meta.get("horizon"))
    kind = trace.kinds[body]
    unit = param_unit(scene, masked_param)
    template_id, template = pick(REVERSE_TEMPLATES, seed)
    ask = template.format(quantity=quantity_phrase(quantity, kind), target=target_phrase(body, kind),
                          t=format_time(t), observed=format_value(observed, _unit(trace, body, quantity)),
                          param=param_phrase(masked_param, unit))
    return QAPair(
        question=f"{describe_scene(scene, masked=masked_param)} {ask}",
        answer=MaskedParam(masked_param, float(get_param(scene, masked_param)), unit),
        mode="reverse",
        provenance=_provenance(trace, body, quantity, t),
        scene=scene,
        template=template_id,
        observed=float(f"{observed:.6g}"),
    )


# -- symbolic ------------------------------------------------------------------


def _values(cf, scene, entity) -> dict:
    return {k: v[0] for k, v in cf.symbols(scene, entity).items()}


def _perturbed(cf, scene, entity, rng):
    """A nearby scene still inside the closed form's regime."""
    for _ in range(50):
        s = scene
        try:
            for path in cf.perturb(entity):
                v = float(get_param(s, path))
                if v != 0:
                    s = replace_param(s, path, v * rng.uniform(*PERTURB))
        except DSLError:
            continue
        e = s.entity(entity.name)
        if cf.applies(s, e):
            return s, e
    raise QAError(f"{cf.name}: no valid perturbed scene")


def validate_symbolic(cf, scene, entity, draws: int = SYMBOLIC_DRAWS, rel: float = SYMBOLIC_REL, seed: int = 0):
    """Compare the closed form with the simulator at random nearby scenes.

    Returns a list of ``(expected, simulated)`` pairs; raises QAError
    when any draw disagrees by more than ``rel``.
    """
    rng = np.random.default_rng(seed)
    tree = expr.parse(cf.expression(entity))
    out = []
    for _ in range(draws):
        s, e = _perturbed(cf, scene, entity, rng)
        try:
            trace = run_scene(s, prune=None)
        except CompileError:
            continue
        values = _values(cf, s, e)
        for name, _unit_, _meaning in cf.free:
            values[name] = float(rng.uniform(0.2, 1.0) * trace.last_time)
        expected = expr.evaluate(tree, values)
        simulated = cf.observe(trace, e, values)
        if not abs(simulated - expected) <= rel * abs(expected):
            raise QAError(f"{cf.name}: closed form {expected:.6g} disagrees with simulation {simulated:.6g}")
        out.append((expected, simulated))
    if len(out) < draws:
        raise QAError(f"{cf.name}: only {len(out)} of {draws} validation draws could be simulated")
    return out


def make_symbolic(scene: SceneSpec, body: str, quantity: str, seed: int = 0, validate: bool = True) -> QAPair:
    """Closed-form question whose answer is an expression in symbols."""
    found = closed_forms.find(scene, body, quantity)
    if found is None:
        raise QAError(f"no closed form registered for {body!r} / {quantity!r} in this scene")
    cf, entity = found
    if validate:
        validate_symbolic(cf, scene, entity, seed=seed)
    table = {k: {"meaning": m, "unit": u, "value": v} for k, (v, u, m) in cf.symbols(scene, entity).items()}
    for name, unit, meaning in cf.free:
        table[name] = {"meaning": meaning, "unit": unit, "value": None}
    expression = expr.canonical(cf.expression(entity))
    return QAPair(
        question=cf.question(entity) + " Express the answer in terms of " + ", ".join(sorted(table)) + ".",
        answer=Symbolic(expression, table),
        mode="symbolic",
        provenance=_provenance(canonical_hash(scene), body, quantity, None),
        scene=scene,
        template=f"symbolic.{cf.name}",
    )


# -- sampling ------------------------------------------------------------------


@dataclass(frozen=True)
class QAConfig:
    modes: tuple = ("numeric", "reverse", "symbolic")
    numeric_per_scene: int = 3
    reverse_per_scene: int = 1
    symbolic_per_scene: int = 1
    t_window: tuple = (0.2, 1.0)  # fraction of the trace duration
    reverse_tries: int = 3

    def __post_init__(self):
        if not self.modes or not set(self.modes) <= {"numeric", "reverse", "symbolic"}:
            raise QAError("at least one QA mode must be enabled")
        lo, hi = self.t_window
        if not 0 <= lo <= hi <= 1:
            raise QAError("t_window must satisfy 0 <= lo <= hi <= 1")


def _scene_scales(trace: Trace) -> dict:
    """Largest magnitude of each quantity over the whole trace.

    Linear and angular parts of 6-vectors are kept apart (their units differ).
    """
    scales = {}
    for (target, base), arr in trace.data.items():
        a = np.abs(arr[np.isfinite(arr)] if arr.ndim == 1 else arr)
        parts = {"": a} if arr.ndim != 2 or arr.shape[1] != 6 else {"": a[:, :3], "r": a[:, 3:]}
        for key, v in parts.items():
            m = float(np.nanmax(v)) if v.size else 0.0
            scales[(base, key)] = max(scales.get((base, key), 0.0), m)
    return scales


def varying_quantities(trace: Trace) -> list[tuple[str, str]]:
    """(target, quantity) pairs that change over time and are not roundoff.

    A component whose values stay below 1e-9 of the largest magnitude of the
    same quantity in the scene is numerical noise around an exact zero.
    """
    scales = _scene_scales(trace)
    out = []
    for target in trace.targets:
        for q in trace.scalar_names(target):
            y = trace.series(target, q)
            if not np.all(np.isfinite(y)):
                continue
            base, comp = split_quantity(q)
            ref = scales.get((base, "r" if comp and comp.startswith("r") else ""), 0.0)
            scale = float(np.max(np.abs(y)))
            if np.ptp(y) > 1e-9 * max(scale, 1e-300) and scale > 1e-9 * ref and scale > 1e-12:
                out.append((target, q))
    return out


def draw_time(trace: Trace, rng: np.random.Generator, window=(0.2, 1.0)) -> float:
    """Time in the window, rounded down to 4 significant figures."""
    T = trace.last_time
    t = rng.uniform(window[0] * T, window[1] * T)
    if t <= 0:
        return 0.0
    step = 10.0 ** (math.floor(math.log10(t)) - 3)
    return float(f"{math.floor(t / step) * step:.4g}")


def generate_for_scene(scene: SceneSpec, trace: Trace, cfg: QAConfig, rng: np.random.Generator,
                       prune: PruneConfig | None = PruneConfig()) -> tuple[list[QAPair], dict]:
    """Sample QA pairs of every enabled mode; returns (pairs, failure counts)."""
    pairs, fails = [], {}
    choices = varying_quantities(trace)

    def draw():
        target, q = choices[int(rng.integers(len(choices)))]
        return target, q, draw_time(trace, rng, cfg.t_window)

    if "numeric" in cfg.modes and choices:
        for _ in range(cfg.numeric_per_scene):
            body, q, t = draw()
            pairs.append(make_numeric(trace, scene, body, q, t, seed=int(rng.integers(1 << 30))))
    if "reverse" in cfg.modes and choices:
        paths = invertible_paths(scene)
        for _ in range(cfg.reverse_per_scene if paths else 0):
            for attempt in range(cfg.reverse_tries):
                path = paths[int(rng.integers(len(paths)))]
                obs = draw()
                try:
                    pairs.append(make_reverse(trace, scene, path, obs, seed=int(rng.integers(1 << 30)), prune=prune))
                    break
                except IdentifiabilityError:
                    fails["not_identifiable"] = fails.get("not_identifiable", 0) + 1
    if "symbolic" in cfg.modes:
        opts = closed_forms.options(scene)
        for cf, e in opts[:cfg.symbolic_per_scene]:
            try:
                pairs.append(make_symbolic(scene, cf.target(e), cf.quantity, seed=int(rng.integers(1 << 30))))
            except QAError:
                fails["symbolic_invalid"] = fails.get("symbolic_invalid", 0) + 1
    return pairs, fails
