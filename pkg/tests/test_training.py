"""Maximum-likelihood calibration: reestimation formulas and training loop."""

import numpy as np
import pytest

from spinread import EmptyStateOccupancy, HmmParams, TraceSet
from spinread.noise import sample_hmm_traces
from spinread.training import (
    TRANSITION_NUMERATOR_START,
    TrainingConfig,
    TrainingResult,
    baum_welch_step,
    total_log_likelihood,
    train,
    train_with_restarts,
)

from oracles import baum_welch_update_reference, brute_force_posteriors


def params_of(pi, mu, var, a):
    return HmmParams(np.asarray(pi, float), np.asarray(mu, float),
                     np.asarray(var, float), np.asarray(a, float))


def psb_params(a12=0.0022, a21=0.0, var=1.0, pi1=0.5):
    return params_of([pi1, 1 - pi1], [1.0, 0.0], [var, var],
                     [[1 - a12, a12], [a21, 1 - a21]])


PSB_INIT = params_of([0.45, 0.55], [0.4, 0.3], [0.36, 0.36],
                     [[1 - 3e-4, 3e-4], [3e-4, 1 - 3e-4]])


def half_half(n):
    return np.r_[np.ones(n // 2, dtype=int), 2 * np.ones(n - n // 2, dtype=int)]


class TestTotalLogLikelihood:
    def test_single_trace_equals_trace_loglik(self):
        from spinread import SignalTrace, posteriors
        p = psb_params()
        ts = sample_hmm_traces(p, half_half(1), 30, rng=0)
        ll = total_log_likelihood(p, ts)
        table = posteriors(p, SignalTrace(ts.samples[0]))
        assert ll == pytest.approx(table.log_likelihood, rel=1e-12)

    def test_two_identical_traces_double(self):
        p = psb_params()
        one = sample_hmm_traces(p, half_half(1), 25, rng=1)
        two = TraceSet(samples=np.vstack([one.samples, one.samples]))
        assert total_log_likelihood(p, two) == pytest.approx(
            2.0 * total_log_likelihood(p, one), rel=1e-12)

    def test_sum_of_enumeration_oracles(self):
        rng = np.random.default_rng(3)
        p = psb_params(a12=0.1, a21=0.05)
        samples = rng.normal(0.5, 1.0, size=(3, 5))
        ts = TraceSet(samples=samples)
        expected = sum(
            brute_force_posteriors(p.initial_probs, p.means, p.variances,
                                   p.transitions, y)[1]
            for y in samples)
        assert total_log_likelihood(p, ts) == pytest.approx(expected, rel=1e-10)


class TestBaumWelchStep:
    def test_single_state_collapses_to_sample_moments(self):
        p = params_of([1.0], [0.3], [0.5], [[1.0]])
        rng = np.random.default_rng(5)
        samples = rng.normal(1.0, 2.0, size=(4, 50))
        new = baum_welch_step(p, TraceSet(samples=samples))
        assert new.means[0] == pytest.approx(samples.mean(), rel=1e-12)
        assert new.variances[0] == pytest.approx(samples.var(), rel=1e-12)

    def test_identity_transitions_with_constant_states_stay_identity(self):
        p = params_of([0.5, 0.5], [2.0, -2.0], [0.1, 0.1],
                      [[1.0, 0.0], [0.0, 1.0]])
        rng = np.random.default_rng(6)
        samples = np.vstack([
            rng.normal(2.0, 0.3, size=(2, 30)),
            rng.normal(-2.0, 0.3, size=(2, 30)),
        ])
        new = baum_welch_step(p, TraceSet(samples=samples))
        assert np.allclose(new.transitions, np.eye(2), atol=1e-30)

    def test_matches_straight_line_reference(self):
        rng = np.random.default_rng(7)
        p = psb_params(a12=0.2, a21=0.1, var=0.8)
        samples = rng.normal(0.5, 1.0, size=(2, 4))
        new = baum_welch_step(p, TraceSet(samples=samples))
        pi_ref, mu_ref, var_ref, a_ref = baum_welch_update_reference(
            p.initial_probs, p.means, p.variances, p.transitions,
            list(samples), xi_t_start=TRANSITION_NUMERATOR_START)
        assert np.allclose(new.initial_probs, pi_ref, rtol=1e-9)
        assert np.allclose(new.means, mu_ref, rtol=1e-9)
        assert np.allclose(new.variances, var_ref, rtol=1e-9)
        assert np.allclose(new.transitions, a_ref, rtol=1e-9)

    def test_three_state_matches_reference(self):
        rng = np.random.default_rng(8)
        pi = rng.dirichlet(np.ones(3))
        a = rng.dirichlet(np.ones(3), size=3)
        p = params_of(pi, [0.0, 1.0, -1.0], [0.5, 0.7, 0.9], a)
        samples = rng.normal(0.0, 1.2, size=(3, 4))
        new = baum_welch_step(p, TraceSet(samples=samples))
        pi_ref, mu_ref, var_ref, a_ref = baum_welch_update_reference(
            p.initial_probs, p.means, p.variances, p.transitions,
            list(samples), xi_t_start=TRANSITION_NUMERATOR_START)
        assert np.allclose(new.initial_probs, pi_ref, rtol=1e-9)
        assert np.allclose(new.means, mu_ref, rtol=1e-9)
        assert np.allclose(new.variances, var_ref, rtol=1e-9)
        assert np.allclose(new.transitions, a_ref, rtol=1e-9)

    def test_empty_state_occupancy_raises(self):
        p = params_of([1.0, 0.0], [1.0, 0.0], [0.1, 0.1],
                      [[1.0, 0.0], [0.0, 1.0]])
        rng = np.random.default_rng(9)
        samples = rng.normal(1.0, 0.3, size=(3, 20))
        with pytest.raises(EmptyStateOccupancy):
            baum_welch_step(p, TraceSet(samples=samples))

    def test_strict_zero_rates_preserved(self):
        # a transition entry that is exactly zero never becomes positive
        p = psb_params(a12=0.01, a21=0.0)
        ts = sample_hmm_traces(p, half_half(40), 60, rng=10)
        new = baum_welch_step(p, ts)
        assert new.transitions[1, 0] == 0.0

    def test_pinned_scalar_held_and_row_renormalized(self):
        p = psb_params(a12=0.01, a21=0.005)
        ts = sample_hmm_traces(p, half_half(40), 60, rng=11)
        new = baum_welch_step(p, ts, pinned={"A_12": 0.03})
        assert new.transitions[0, 1] == 0.03
        assert new.transitions[0].sum() == pytest.approx(1.0, abs=1e-15)

    def test_variance_floor(self):
        p = params_of([1.0], [0.0], [1.0], [[1.0]])
        samples = np.zeros((2, 10))  # zero spread collapses the variance
        new = baum_welch_step(p, TraceSet(samples=samples))
        assert new.variances[0] == 1e-12


class TestTrain:
    def test_data_from_init_params_converges_fast(self):
        p = psb_params(a12=0.02, a21=0.01)
        ts = sample_hmm_traces(p, half_half(400), 80, rng=12)
        res = train(TrainingConfig(init_params=p, max_iterations=50), ts)
        assert res.converged
        assert res.iterations <= 8
        assert np.allclose(res.params.means, p.means, atol=0.05)

    def test_ll_history_non_decreasing(self):
        ts = sample_hmm_traces(psb_params(), half_half(300), 100, rng=13)
        res = train(TrainingConfig(init_params=PSB_INIT, max_iterations=500), ts)
        gains = np.diff(res.ll_history)
        assert np.all(gains >= -1e-8)
        assert res.converged

    def test_frozen_fields_bit_identical(self):
        p = params_of([0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.25] * 3,
                      [[0.98, 0.02, 0.0], [0.0, 0.98, 0.02], [0.0, 0.0, 1.0]])
        ts = sample_hmm_traces(p, np.r_[np.ones(100, int), 3 * np.ones(100, int)],
                               120, rng=14)
        init = p.replace(means=np.array([0.3, 0.4, 0.3]),
                         variances=np.array([0.36] * 3))
        res = train(TrainingConfig(init_params=init, max_iterations=200,
                                   frozen_fields=frozenset({"initial_probs"})), ts)
        assert np.array_equal(res.params.initial_probs, p.initial_probs)

    def test_tied_variances_equal(self):
        p = params_of([0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.25] * 3,
                      [[0.98, 0.02, 0.0], [0.0, 0.98, 0.02], [0.0, 0.0, 1.0]])
        ts = sample_hmm_traces(p, np.r_[np.ones(100, int), 3 * np.ones(100, int)],
                               120, rng=15)
        res = train(TrainingConfig(init_params=p, max_iterations=20,
                                   frozen_fields=frozenset({"initial_probs"}),
                                   tied_variances=((1, 3),)), ts)
        assert res.params.variances[0] == res.params.variances[2]

    def test_fixed_point_self_consistency(self):
        # run the update map to its fixed point (interior optimum), then
        # one extra step must move parameters by < 1e-6 relative
        p = psb_params(a12=0.05, a21=0.08, var=0.25)
        ts = sample_hmm_traces(p, half_half(200), 60, rng=16)
        cur = p
        for _ in range(5000):
            new = baum_welch_step(cur, ts)
            move = _max_relative_move(cur, new)
            cur = new
            if move < 1e-9:
                break
        assert move < 1e-9, "update map failed to reach its fixed point"
        once_more = baum_welch_step(cur, ts)
        assert _max_relative_move(cur, once_more) < 1e-6

    def test_max_iterations_flag(self):
        ts = sample_hmm_traces(psb_params(), half_half(100), 50, rng=17)
        res = train(TrainingConfig(init_params=PSB_INIT, max_iterations=2,
                                   ll_tolerance=1e-12), ts)
        assert not res.converged
        assert res.iterations == 2

    def test_restarts_keep_best(self):
        p = psb_params(a12=0.02, a21=0.0)
        ts = sample_hmm_traces(p, half_half(200), 80, rng=18)
        bad_init = params_of([0.5, 0.5], [10.0, -10.0], [0.01, 0.01],
                             [[0.5, 0.5], [0.5, 0.5]])
        cfg = TrainingConfig(init_params=PSB_INIT, max_iterations=300)
        best = train_with_restarts(cfg, ts, [bad_init, PSB_INIT])
        from_good = train(cfg, ts)
        assert best.ll_history[-1] == pytest.approx(
            from_good.ll_history[-1], abs=1e-9)

    def test_result_roundtrips_through_dict(self):
        ts = sample_hmm_traces(psb_params(), half_half(50), 40, rng=19)
        res = train(TrainingConfig(init_params=PSB_INIT, max_iterations=20), ts)
        again = TrainingResult.from_dict(res.to_dict())
        assert np.allclose(again.params.transitions, res.params.transitions)
        assert np.allclose(again.ll_history, res.ll_history)
        assert again.converged == res.converged


def _max_relative_move(a: HmmParams, b: HmmParams) -> float:
    moves = []
    for x, y in ((a.initial_probs, b.initial_probs), (a.means, b.means),
                 (a.variances, b.variances),
                 (a.transitions.ravel(), b.transitions.ravel())):
        scale = np.maximum(np.abs(x), 1e-12)
        moves.append(np.max(np.abs(np.asarray(y) - np.asarray(x)) / scale))
    return float(max(moves))


class TestWhiteNoiseRecoveryProperty:
    def test_psb_parameters_recovered_small_scale(self):
        # reduced-size version of the recovery study: estimates land close
        # to the truth relative to the sampling scale
        truth = psb_params(a12=0.0022, a21=0.0)
        ts = sample_hmm_traces(truth, half_half(800), 300, rng=20)
        res = train(TrainingConfig(init_params=PSB_INIT, max_iterations=500), ts)
        p = res.params
        assert p.means[0] == pytest.approx(1.0, abs=0.02)
        assert p.means[1] == pytest.approx(0.0, abs=0.02)
        assert p.variances[0] == pytest.approx(1.0, abs=0.05)
        assert p.variances[1] == pytest.approx(1.0, abs=0.05)
        assert p.transitions[0, 1] == pytest.approx(0.0022, rel=0.5)
        assert p.initial_probs[0] == pytest.approx(0.5, abs=0.05)
