import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simforge.errors import PruneError
from simforge.prune import PruneConfig, find_truncation, prune_trace, window_scores
from simforge.sim.trace import Trace


def brute_force(a, w, k, eps):
    """Literal double loop: first t with max_i |a_i - mu_t| >= k sigma_t and > eps."""
    a = [float(x) for x in a]
    for t in range(len(a) - w):
        win = a[t:t + w + 1]
        mu = sum(win) / len(win)
        sigma = math.sqrt(sum((x - mu) ** 2 for x in win) / len(win))
        dev = max(abs(x - mu) for x in win)
        if dev >= k * sigma and dev > eps:
            return t
    return None


def random_signal(rng):
    n = int(rng.integers(30, 300))
    kind = rng.integers(4)
    if kind == 0:
        a = rng.normal(size=n)
    elif kind == 1:
        a = np.sin(np.linspace(0, rng.uniform(1, 20), n)) * rng.uniform(0.1, 10)
    elif kind == 2:
        a = np.full(n, rng.uniform(-5, 5))
    else:
        a = rng.normal(scale=0.01, size=n) + 9.81
    for _ in range(rng.integers(0, 3)):
        a[rng.integers(n)] += rng.normal(scale=50)
    return a


def test_matches_brute_force_on_1000_signals():
    rng = np.random.default_rng(0)
    flagged = 0
    for _ in range(1000):
        a = random_signal(rng)
        w = int(rng.integers(2, 30))
        k = float(rng.uniform(0.5, 6.0))
        cfg = PruneConfig(window=w, k=k, min_keep=1)
        got = find_truncation(a, cfg)
        assert got == brute_force(a, w, k, cfg.epsilon)
        flagged += got is not None
    # both outcomes are exercised
    assert 100 < flagged < 900


def test_constant_signal_not_flagged():
    assert find_truncation(np.ones(100), PruneConfig(window=10, k=5)) is None


def test_sinusoid_not_flagged():
    a = np.sin(np.linspace(0, 12 * np.pi, 2000))
    assert find_truncation(a, PruneConfig(window=10, k=5)) is None
    assert find_truncation(a, PruneConfig(window=50, k=5)) is None


def test_isolated_spike_bound():
    # with w + 1 samples max|a - mu| <= sqrt(w) sigma, so w=10, k=5 never fires
    a = np.zeros(100)
    a[50] = 100.0
    dmax, sd = window_scores(a, 10)
    assert np.all(dmax <= math.sqrt(10) * sd + 1e-12)
    assert find_truncation(a, PruneConfig(window=10, k=5)) is None
    assert not PruneConfig(window=10, k=5).can_flag
    # the window [t, t + w] first contains sample 50 at t = 40
    t = find_truncation(a, PruneConfig(window=10, k=3))
    assert t == brute_force(a, 10, 3, 1e-9) == 40
    t = find_truncation(a, PruneConfig(window=30, k=5))
    assert t == brute_force(a, 30, 5, 1e-9) and 20 <= t <= 50


def test_short_signal_rejected():
    with pytest.raises(PruneError):
        find_truncation(np.zeros(5), PruneConfig(window=10))


@pytest.mark.parametrize("bad", [dict(window=1), dict(k=0.0), dict(min_keep=0), dict(epsilon=-1.0)])
def test_config_invariants(bad):
    with pytest.raises(ValueError):
        PruneConfig(**bad)


def make_trace(signals, dt=1e-3):
    n = len(next(iter(signals.values())))
    data, kinds = {}, {}
    for name, a in signals.items():
        acc = np.zeros((n, 3))
        acc[:, 2] = a
        data[(name, "acceleration")] = acc
        data[(name, "velocity")] = np.cumsum(acc, axis=0) * dt
        kinds[name] = "body"
    return Trace(np.arange(n) * dt, data, kinds)


def smooth(n, rng, scale=1.0):
    return 9.81 + scale * np.sin(np.linspace(0, 6, n)) + rng.normal(scale=1e-3, size=n)


def test_injected_spike_truncates_every_series():
    rng = np.random.default_rng(1)
    a, b = smooth(2000, rng), smooth(2000, rng, 2.0)
    b[500] += 300.0
    tr = make_trace({"a": a, "b": b})
    cfg = PruneConfig()
    out = prune_trace(tr, cfg)
    assert 500 - cfg.window <= out.truncated_at <= 500
    assert len(out) == out.truncated_at
    for arr in out.data.values():
        assert len(arr) == out.truncated_at
    assert out.meta["spike_index"] == 500 and out.meta["spike_body"] == "b"
    assert out.meta["window_start"] == out.truncated_at


def test_spike_free_trace_untouched():
    rng = np.random.default_rng(2)
    tr = make_trace({"a": smooth(1500, rng)})
    out = prune_trace(tr)
    assert out is tr and out.truncated_at is None


def test_early_spike_rejected():
    rng = np.random.default_rng(3)
    a = smooth(1500, rng)
    a[3] += 300.0
    with pytest.raises(PruneError):
        prune_trace(make_trace({"a": a}), PruneConfig(min_keep=100))


def test_empty_trace_rejected():
    with pytest.raises(PruneError):
        prune_trace(Trace(np.zeros(0), {}, {}))


signals = st.lists(st.floats(-100, 100, allow_nan=False), min_size=60, max_size=200)


@settings(max_examples=150, deadline=None)
@given(a=signals, w=st.integers(2, 20), k=st.floats(0.5, 5.0))
def test_idempotent(a, w, k):
    cfg = PruneConfig(window=w, k=k, min_keep=1)
    tr = make_trace({"a": np.array(a)})
    try:
        once = prune_trace(tr, cfg)
    except PruneError:
        return
    twice = prune_trace(once, cfg)
    assert len(twice) == len(once)
    assert twice.truncated_at == once.truncated_at


@settings(max_examples=150, deadline=None)
@given(a=signals, w=st.integers(2, 20), k=st.floats(0.5, 5.0), dk=st.floats(0.0, 3.0))
def test_monotone_in_k(a, w, k, dk):
    lo = find_truncation(a, PruneConfig(window=w, k=k))
    hi = find_truncation(a, PruneConfig(window=w, k=k + dk))
    if lo is None:
        assert hi is None
    elif hi is not None:
        assert hi >= lo
