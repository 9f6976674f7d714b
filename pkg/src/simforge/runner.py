"""Compile, simulate and prune a scene in one call, with a small cache."""
from __future__ import annotations

from collections import OrderedDict

from .dsl import SceneSpec, canonical_hash
from .prune import PruneConfig, prune_trace
from .sim import compile_scene, simulate
from .sim.trace import Trace

CACHE_SIZE = 64
_cache: OrderedDict = OrderedDict()


def run_scene(scene: SceneSpec, prune: PruneConfig | None = PruneConfig(), dt: float | None = None,
              horizon: float | None = None) -> Trace:
    """Trace of ``scene``, cut by ``prune`` unless it is None.

    Raises CompileError, and PruneError when the trace is rejected. A
    trace that ends in a numerical failure is returned truncated, with
    ``meta["diagnostic"]`` set.
    """
    key = (canonical_hash(scene), prune, dt, horizon)
    hit = _cache.get(key)
    if hit is not None:
        _cache.move_to_end(key)
        return hit
    trace = simulate(compile_scene(scene, dt=dt, horizon=horizon))
    if prune is not None:
        trace = prune_trace(trace, prune)
    _cache[key] = trace
    if len(_cache) > CACHE_SIZE:
        _cache.popitem(last=False)
    return trace


def clear_cache() -> None:
    _cache.clear()
