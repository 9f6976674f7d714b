"""Spike detection and truncation of recorded traces.

A window ``a[t..t+w]`` (``w + 1`` samples) is flagged when its largest
absolute deviation from the window mean reaches ``k`` population standard
deviations and also exceeds an absolute floor ``epsilon``. A trace is cut
at the start of the earliest flagged window over all bodies.

Note that ``max|a_i - mean| <= sqrt(w) * std`` for any window of ``w + 1``
samples, so nothing can be flagged unless ``k < sqrt(w)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import PruneError
from .sim.trace import Trace


@dataclass(frozen=True)
class PruneConfig:
    window: int = 50
    k: float = 5.0
    min_keep: int = 100
    epsilon: float = 1e-9

    def __post_init__(self):
        if not (isinstance(self.window, int) and self.window >= 2):
            raise ValueError("window must be an integer >= 2")
        if not self.k > 0:
            raise ValueError("k must be > 0")
        if not (isinstance(self.min_keep, int) and self.min_keep >= 1):
            raise ValueError("min_keep must be an integer >= 1")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def can_flag(self) -> bool:
        """False when the threshold is out of reach for this window size."""
        return self.k <= math.sqrt(self.window)


def window_scores(signal: np.ndarray, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-window maximum absolute deviation and population std."""
    win = sliding_window_view(np.asarray(signal, dtype=float), w + 1)
    mu = win.mean(axis=1)
    dev = np.abs(win - mu[:, None])
    sd = np.sqrt((dev * dev).mean(axis=1))
    return dev.max(axis=1), sd


def find_truncation(signal, cfg: PruneConfig = PruneConfig()) -> int | None:
    """Smallest window start ``t`` that is flagged, or None."""
    a = np.asarray(signal, dtype=float)
    w = cfg.window
    if a.ndim != 1 or len(a) < w:
        raise PruneError(f"signal of length {a.size} is shorter than the window {w}")
    if len(a) < w + 1:
        return None
    dmax, sd = window_scores(a, w)
    hit = np.flatnonzero((dmax >= cfg.k * sd) & (dmax > cfg.epsilon))
    return int(hit[0]) if hit.size else None


def spike_index(signal, start: int, w: int) -> int:
    """Sample with the largest deviation inside the window starting at ``start``."""
    seg = np.asarray(signal[start:start + w + 1], dtype=float)
    return start + int(np.argmax(np.abs(seg - seg.mean())))


def body_signals(trace: Trace) -> dict[str, np.ndarray]:
    """Linear-acceleration magnitude of every body."""
    return {b: trace.series(b, "acceleration_norm") for b in trace.bodies()}


def prune_trace(trace: Trace, cfg: PruneConfig = PruneConfig()) -> Trace:
    """Cut every series at the earliest flagged window over all bodies.

    Returns the trace untouched when nothing is flagged. Raises PruneError
    when the first window is flagged or the kept prefix is shorter than
    ``cfg.min_keep`` samples.
    """
    if len(trace) == 0:
        raise PruneError("empty trace")
    if len(trace) < cfg.window + 1:
        return trace
    best, who = None, None
    for body, sig in body_signals(trace).items():
        t = find_truncation(sig, cfg)
        if t is not None and (best is None or t < best):
            best, who = t, body
    if best is None:
        return trace
    if best == 0:
        raise PruneError(f"fully unstable trace: {who} flagged in the first window")
    if best < cfg.min_keep:
        raise PruneError(f"stable prefix of {best} samples is shorter than min_keep={cfg.min_keep}")
    spike = spike_index(trace.series(who, "acceleration_norm"), best, cfg.window)
    return trace.truncated(best, spike_index=spike, spike_body=who, window_start=best)
