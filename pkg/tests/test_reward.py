import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simforge.reward import (RewardGroup, StreamExhausted, dynamic_fill, group_advantages, group_objective,
                             gspo_grad, gspo_loss, verify_answer, verify_symbolic)


def test_five_percent_boundary():
    assert verify_answer(10.4, 10.0) == 1
    assert verify_answer(10.6, 10.0) == 0
    assert verify_answer(0.0, 0.0) == 1
    assert verify_answer(9.5, 10.0) == 1 and verify_answer(10.5, 10.0) == 1
    assert verify_answer(np.nextafter(10.5, 11), 10.0) == 0
    assert verify_answer(-10.4, -10.0) == 1 and verify_answer(10.0, -10.0) == 0


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), "ten", None, [1.0]])
def test_unusable_predictions_score_zero(bad):
    assert verify_answer(bad, 10.0) == 0


def test_truth_must_be_finite():
    with pytest.raises(ValueError):
        verify_answer(1.0, float("nan"))


def test_near_zero_truth_uses_absolute_floor():
    assert verify_answer(5e-10, 0.0) == 1
    assert verify_answer(2e-9, 0.0) == 0


@settings(max_examples=200, deadline=None)
@given(truth=st.floats(-1e6, 1e6).filter(lambda x: abs(x) > 1e-6), frac=st.floats(-0.2, 0.2))
def test_reward_is_an_interval(truth, frac):
    p = truth * (1 + frac)
    expected = abs(p - truth) <= 0.05 * abs(truth)
    assert verify_answer(p, truth) == int(expected)


@pytest.mark.parametrize("rewards, advantages, degenerate", [
    ([1, 0, 0, 1], [1, -1, -1, 1], False),
    ([1, 1, 1, 1], [0, 0, 0, 0], True),
    ([1, 0], [1, -1], False),
])
def test_advantage_examples(rewards, advantages, degenerate):
    A, deg = group_advantages(rewards)
    assert deg is degenerate
    assert np.array_equal(A, advantages)


def test_group_needs_two():
    with pytest.raises(ValueError):
        group_advantages([1])


@settings(max_examples=200, deadline=None)
@given(r=st.lists(st.sampled_from([0.0, 1.0]), min_size=2, max_size=64))
def test_advantage_identities(r):
    A, deg = group_advantages(r)
    assert deg == (min(r) == max(r))
    if not deg:
        assert abs(A.mean()) <= 1e-12
        assert abs(A.std() - 1) <= 1e-12


def group(rewards, log_ratios, eps=0.2, **kw):
    return RewardGroup("p", np.asarray(rewards, float), np.asarray(log_ratios, float), eps, **kw)


def test_loss_examples():
    assert gspo_loss([group([1, 1, 1], [0.3, -0.1, 0.2])]) == 0.0
    assert gspo_loss([group([1, 0], [0.0, 0.0])]) == 0.0
    # rho = 2 with A = 1 is clipped to 1.2
    g = group([1, 0], [math.log(2.0), 0.0])
    assert group_objective(g) == pytest.approx((1.2 * 1 + 1.0 * -1) / 2, abs=1e-15)


def test_loss_is_mean_over_groups():
    a, b = group([1, 0, 0], [0.1, -0.05, 0.0]), group([0, 1], [0.02, 0.3])
    assert gspo_loss([a, b]) == pytest.approx(-(group_objective(a) + group_objective(b)) / 2, abs=1e-15)


def test_clip_inactive_inside_band():
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = rng.integers(0, 2, 8)
        s = rng.uniform(math.log(0.8), math.log(1.2), 8)
        g = group(r, s)
        unclipped = -float(np.mean(np.exp(s) * g.advantages))
        assert gspo_loss([g]) == unclipped


def test_clip_threshold_exact():
    eps = 0.2
    # positive advantage: the objective stops growing at rho = 1 + eps
    up = math.log1p(eps)
    for s, active in ((up * (1 - 1e-9), True), (up * (1 + 1e-9), False)):
        g = group([1, 0], [s, 0.0], eps)
        assert bool(gspo_grad([g])[0][0] != 0) is active
    g = group([1, 0], [up, 0.0], eps)
    rho = math.exp(up)
    assert group_objective(g) == pytest.approx((min(rho, 1 + eps) - 1) / 2, abs=1e-15)
    # negative advantage: the objective stops falling at rho = 1 - eps
    down = math.log1p(-eps)
    for s, active in ((down * (1 - 1e-9), True), (down * (1 + 1e-9), False)):
        g = group([1, 0], [0.0, s], eps)
        assert bool(gspo_grad([g])[0][1] != 0) is active


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(200):
        G = int(rng.integers(2, 9))
        r = rng.integers(0, 2, G)
        if r.min() == r.max():
            continue
        s = rng.normal(scale=0.3, size=G)
        rho = np.exp(s)
        # stay away from the kinks at the clip edges
        if np.min(np.abs(np.abs(rho - 1) - 0.2)) < 1e-3:
            continue
        groups = [group(r, s), group(rng.permutation(np.r_[1, 0, r]), rng.normal(scale=0.3, size=G + 2))]
        grad = gspo_grad(groups)
        h = 1e-6
        for gi, g in enumerate(groups):
            for i in range(g.size):
                def loss_at(delta):
                    ss = g.seq_log_ratios.copy()
                    ss[i] += delta
                    moved = [group(x.rewards, ss if j == gi else x.seq_log_ratios) for j, x in enumerate(groups)]
                    return gspo_loss(moved)
                fd = (loss_at(h) - loss_at(-h)) / (2 * h)
                assert fd == pytest.approx(grad[gi][i], rel=1e-6, abs=1e-9)
                checked += 1
    assert checked > 500


def test_non_finite_log_ratio():
    with pytest.raises(ValueError):
        gspo_loss([group([1, 0], [float("nan"), 0.0])])


def test_length_normalization_flag():
    g = group([1, 0], [0.4, -0.2], lengths=np.array([4.0, 2.0]))
    assert gspo_loss([g], length_normalized=True) == gspo_loss([group([1, 0], [0.1, -0.1])])
    with pytest.raises(ValueError):
        gspo_loss([group([1, 0], [0.4, -0.2])], length_normalized=True)


def test_kl_term():
    d = np.array([0.1, -0.3])
    g = group([1, 0], [0.0, 0.0], ref_log_ratios=d)
    k3 = float(np.mean(np.exp(-d) + d - 1))
    assert gspo_loss([g], kl_coef=0.5) == pytest.approx(gspo_loss([g]) + 0.5 * k3, abs=1e-15)
    assert k3 > 0


def alternating(n):
    for i in range(n):
        yield group([1, 1] if i % 2 == 0 else [1, 0], [0.0, 0.0])


def test_dynamic_fill_skips_degenerate():
    batch = dynamic_fill(alternating(10), batch_size=2)
    assert batch.consumed == 4 and batch.kept == 2
    assert all(not g.degenerate for g in batch.groups)
    assert batch.report() == {"consumed": 4, "kept": 2, "degeneracy_rate": 0.5}


def test_dynamic_fill_exhaustion():
    with pytest.raises(StreamExhausted):
        dynamic_fill((group([0, 0], [0.0, 0.0]) for _ in range(50)), batch_size=1)


def test_dynamic_fill_half_degenerate_consumes_about_64():
    rng = np.random.default_rng(7)
    ok = group([1, 0], [0.0, 0.0])
    deg = group([1, 1], [0.0, 0.0])

    def stream():
        while True:
            yield deg if rng.random() < 0.5 else ok

    consumed = [dynamic_fill(stream(), 32).consumed for _ in range(1000)]
    # negative binomial: mean 64, std 8, so the mean of 1000 runs has std 0.25
    assert np.mean(consumed) == pytest.approx(64, abs=1.0)
    assert np.std(consumed) == pytest.approx(8, rel=0.15)


def test_verify_symbolic():
    symbols = {"m_1": {"value": 10.0}, "m_2": {"value": 5.0}, "g": {"value": 9.81}}
    truth = "(m_1 - m_2)*g/(m_1 + m_2)"
    assert verify_symbolic("g*(m_1 - m_2)/(m_2 + m_1)", truth, symbols) == 1
    assert verify_symbolic("(m_1 - m_2)*g/(m_1 - m_2)", truth, symbols) == 0
    assert verify_symbolic("(m_1 - m_2)*g/(m_1 + m_3)", truth, symbols) == 0
    assert verify_symbolic("(m_1 - m_2)*g/(", truth, symbols) == 0
    free = {"g": {"value": 9.81}, "t": {"value": None}}
    assert verify_symbolic("t*g", "g*t", free) == 1
    assert verify_symbolic("g*t^2/2", "g*t", free) == 0
