"""Verifiable rewards, group-relative advantages and the clipped sequence objective.

Everything here works on caller-supplied numbers: rewards from answer
checking, and per-sequence log probability ratios from whatever policy
the caller trains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import QAError
from .qa import expr

REL_TOL = 0.05
ABS_FLOOR = 1e-9


def verify_answer(predicted, truth: float, rel_tol: float = REL_TOL, abs_floor: float = ABS_FLOOR) -> int:
    """1 if ``predicted`` lies within ``rel_tol`` of ``truth``, else 0.

    Near-zero truths (``|truth| < abs_floor``) use the absolute band
    ``abs_floor`` instead. Non-numeric or non-finite predictions score 0.
    """
    if not math.isfinite(truth):
        raise ValueError("truth must be finite")
    try:
        p = float(predicted)
    except (TypeError, ValueError):
        return 0
    if not math.isfinite(p):
        return 0
    err = abs(p - truth)
    if abs(truth) < abs_floor:
        return int(err <= abs_floor)
    return int(err <= rel_tol * abs(truth))


def verify_symbolic(predicted, truth: str, symbols: dict, draws: int = 8, rel: float = 1e-6, seed: int = 0) -> int:
    """1 if expression ``predicted`` equals ``truth`` at several symbol draws.

    ``symbols`` maps names to ``{"value": ...}``; declared values are
    scaled by U(0.8, 1.2) and free ones (value None) drawn from U(0.5, 2),
    which keeps both expressions inside their physical domain.
    """
    try:
        node = expr.parse(str(predicted))
    except QAError:
        return 0
    if not expr.symbols(node) <= set(symbols):
        return 0
    rng = np.random.default_rng(seed)
    names = sorted(symbols)
    for _ in range(draws):
        vals = {}
        for k in names:
            v = symbols[k].get("value")
            vals[k] = float(v) * rng.uniform(0.8, 1.2) if v is not None else rng.uniform(0.5, 2.0)
        try:
            x, y = expr.evaluate(node, vals), expr.evaluate(truth, vals)
        except (QAError, ValueError, ZeroDivisionError, OverflowError):
            return 0
        if not (math.isfinite(x) and abs(x - y) <= rel * max(abs(y), 1e-300)):
            return 0
    return 1


def group_advantages(rewards) -> tuple[np.ndarray, bool]:
    """Rewards standardized within the group (population std).

    A zero-variance group is degenerate and gets all-zero advantages.
    """
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or len(r) < 2:
        raise ValueError("a group needs at least two rewards")
    sd = r.std()
    if sd == 0:
        return np.zeros_like(r), True
    return (r - r.mean()) / sd, False


@dataclass
class RewardGroup:
    prompt_id: str
    rewards: np.ndarray
    seq_log_ratios: np.ndarray
    epsilon: float = 0.2
    lengths: np.ndarray | None = None  # tokens per response, for the length-normalized ratio
    ref_log_ratios: np.ndarray | None = None  # log(pi_theta / pi_ref) per response, for the KL term
    advantages: np.ndarray = field(init=False)
    degenerate: bool = field(init=False)

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.seq_log_ratios = np.asarray(self.seq_log_ratios, dtype=float)
        if self.rewards.shape != self.seq_log_ratios.shape:
            raise ValueError("rewards and seq_log_ratios must have the same length")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        self.advantages, self.degenerate = group_advantages(self.rewards)

    @property
    def size(self) -> int:
        return len(self.rewards)


def _ratios(g: RewardGroup, length_normalized: bool) -> np.ndarray:
    s = g.seq_log_ratios
    if not np.all(np.isfinite(s)):
        raise ValueError(f"non-finite log ratio in group {g.prompt_id!r}")
    if length_normalized:
        if g.lengths is None:
            raise ValueError("length_normalized needs per-response lengths")
        s = s / np.asarray(g.lengths, dtype=float)
    return np.exp(s)


def group_objective(g: RewardGroup, length_normalized: bool = False) -> float:
    """(1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)."""
    rho = _ratios(g, length_normalized)
    A = g.advantages
    clipped = np.clip(rho, 1 - g.epsilon, 1 + g.epsilon)
    return float(np.mean(np.minimum(rho * A, clipped * A)))


def gspo_loss(groups: Iterable[RewardGroup], length_normalized: bool = False, kl_coef: float = 0.0) -> float:
    """Negative mean over groups of the clipped sequence-level objective.

    With ``kl_coef > 0`` each group also pays ``kl_coef`` times the mean
    of the k3 estimator ``exp(-d) + d - 1`` of its caller-supplied
    log ratios ``d = log(pi_theta / pi_ref)``.
    """
    groups = list(groups)
    if not groups:
        raise ValueError("no groups")
    total = 0.0
    for g in groups:
        total += group_objective(g, length_normalized)
        if kl_coef:
            if g.ref_log_ratios is None:
                raise ValueError("kl_coef needs ref_log_ratios")
            d = np.asarray(g.ref_log_ratios, dtype=float)
            total -= kl_coef * float(np.mean(np.exp(-d) + d - 1))
    return -total / len(groups)


def gspo_grad(groups: list[RewardGroup]) -> list[np.ndarray]:
    """Analytic gradient of ``gspo_loss`` with respect to each seq_log_ratio.

    The clipped branch is flat in rho, so only terms where the unclipped
    product is the minimum contribute ``rho_i A_i``.
    """
    out = []
    for g in groups:
        rho = _ratios(g, False)
        A = g.advantages
        clipped = np.clip(rho, 1 - g.epsilon, 1 + g.epsilon)
        active = rho * A <= clipped * A
        out.append(-(active * rho * A) / g.size / len(groups))
    return out


@dataclass
class Batch:
    groups: list
    consumed: int
    kept: int

    @property
    def degeneracy_rate(self) -> float:
        return 1 - self.kept / self.consumed if self.consumed else 0.0

    def report(self) -> dict:
        return {"consumed": self.consumed, "kept": self.kept, "degeneracy_rate": self.degeneracy_rate}


class StreamExhausted(RuntimeError):
    pass


def dynamic_fill(group_stream: Iterator[RewardGroup], batch_size: int = 32) -> Batch:
    """Take groups in order, keeping non-degenerate ones until the batch is full."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    kept, consumed = [], 0
    for g in group_stream:
        consumed += 1
        if not g.degenerate:
            kept.append(g)
            if len(kept) == batch_size:
                return Batch(kept, consumed, len(kept))
    raise StreamExhausted(f"stream ended after {consumed} groups with {len(kept)} of {batch_size} kept")
