"""Exact state inference for Gaussian-emission hidden Markov readout models.

Implements the scaled forward-backward recursions: per-step normalized
forward/backward variables with stored normalizers, so that traces of
arbitrary length never underflow. Emission weights are handled in log
space (shifted by the per-step maximum before exponentiation), which keeps
legitimate outlier samples from zeroing out every state.

Batch variables are laid out time-major, shape (T, N, M), so each
recursion step works on contiguous slices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import AllStatesImpossible
from .model import HmmParams, PosteriorTable, SignalTrace

__all__ = [
    "emission_density",
    "emission_log_density",
    "forward",
    "backward",
    "posteriors",
    "posteriors_batch",
    "initial_state_posteriors",
    "decide_initial_state",
    "decide_initial_states",
    "ForwardBackwardArrays",
    "forward_backward_arrays",
]


def emission_log_density(params: HmmParams, state: int, y):
    """Log of the Gaussian emission density of ``state`` (1-based) at y."""
    mu = params.means[state - 1]
    var = params.variances[state - 1]
    y = np.asarray(y, dtype=float)
    out = -0.5 * np.log(2.0 * np.pi * var) - (y - mu) ** 2 / (2.0 * var)
    return out if out.ndim else float(out)

def emission_density(params: HmmParams, state: int, y):
    """Gaussian emission density (2 pi var)^(-1/2) exp(-(y-mu)^2 / (2 var))."""
    out = np.exp(emission_log_density(params, state, y))
    return out if isinstance(out, np.ndarray) else float(out)


def _shifted_emissions(params: HmmParams, samples_tm: np.ndarray):
    """Emission weights for time-major samples (T, N), underflow-protected.

    Returns ``(b_shift, shift)`` with ``b_shift = exp(log_b - shift)`` of
    shape (T, N, M). On the fast path all log densities clear the float64
    underflow floor and ``shift`` is None (no shift applied); otherwise
    ``shift`` is the (T, N) per-step maximum log emission over states.
    """
    t_len, n = samples_tm.shape
    m = params.num_states
    mu = params.means
    var = params.variances
    norm = -0.5 * np.log(2.0 * np.pi * var)
    inv2var = 0.5 / var
    q = np.empty((t_len, n, m))
    buf = np.empty((t_len, n))
    for i in range(m):
        np.subtract(samples_tm, mu[i], out=buf)
        np.square(buf, out=buf)
        buf *= -inv2var[i]
        buf += norm[i]
        q[:, :, i] = buf
    qmin = q.min()
    if np.isnan(qmin):
        tt, nn, _ = np.argwhere(np.isnan(q))[0]
        raise AllStatesImpossible(int(tt), int(nn))
    if qmin > -700.0:  # exp() stays in the normal float64 range
        np.exp(q, out=q)
        return q, None
    shift = q.max(axis=2)
    bad = ~np.isfinite(shift)
    if np.any(bad):
        tt, nn = np.argwhere(bad)[0]
        raise AllStatesImpossible(int(tt), int(nn))
    q -= shift[..., None]
    np.exp(q, out=q)
    return q, shift


@dataclass(frozen=True)
class ForwardBackwardArrays:
    """Internal arrays of the scaled recursions for a batch of traces.

    All arrays are time-major. ``alpha[t]`` rows are normalized per step;
    ``log_scaling[t, n]`` is the log of the true per-step normalizer, so
    summing over t gives the per-trace log-likelihood.
    ``shifted_emissions`` and ``shifted_scaling`` carry the max-shifted
    emission weights needed to continue with a backward pass in the same
    scaling.
    """

    alpha: np.ndarray              # (T, N, M) normalized forward variables
    log_scaling: np.ndarray        # (T, N)
    shifted_emissions: np.ndarray  # (T, N, M)
    shifted_scaling: np.ndarray    # (T, N)

    @property
    def log_likelihoods(self) -> np.ndarray:
        return self.log_scaling.sum(axis=0)


def forward_backward_arrays(params: HmmParams, samples: np.ndarray) -> ForwardBackwardArrays:
    """Run the scaled forward pass on an (N, T) sample batch."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("samples must be an (N, T) array")
    samples_tm = np.ascontiguousarray(samples.T)
    t_len, n = samples_tm.shape
    m = params.num_states
    a_mat = params.transitions

    b_shift, shift = _shifted_emissions(params, samples_tm)

    alpha = np.empty((t_len, n, m))
    c_shift = np.empty((t_len, n))
    ones_m = np.ones(m)
    cur = params.initial_probs * b_shift[0]
    scratch = np.empty((n, m))
    for t in range(t_len):
        if t > 0:
            np.matmul(alpha[t - 1], a_mat, out=scratch)
            scratch *= b_shift[t]
            cur = scratch
        c = cur @ ones_m
        cmin = c.min()
        if not (cmin > 0.0) or not np.isfinite(c.max()):
            nn = int(np.argwhere(~(c > 0.0) | ~np.isfinite(c))[0][0])
            raise AllStatesImpossible(t, nn)
        np.multiply(cur, (1.0 / c)[:, None], out=alpha[t])
        c_shift[t] = c
    log_scaling = np.log(c_shift)
    if shift is not None:
        log_scaling += shift
    return ForwardBackwardArrays(alpha, log_scaling, b_shift, c_shift)


def _backward_posteriors(fb: ForwardBackwardArrays, a_mat: np.ndarray):
    """Backward sweep; returns (posteriors, beta_hat), both (T, N, M)."""
    alpha = fb.alpha
    t_len, n, m = alpha.shape
    beta = np.empty_like(alpha)
    beta[t_len - 1] = 1.0
    weighted_pre = fb.shifted_emissions / fb.shifted_scaling[..., None]
    a_t = np.ascontiguousarray(a_mat.T)
    for t in range(t_len - 2, -1, -1):
        beta[t] = (weighted_pre[t + 1] * beta[t + 1]) @ a_t
    post = alpha * beta
    post /= post.sum(axis=2, keepdims=True)
    return post, beta


def posteriors_batch(params: HmmParams, samples: np.ndarray):
    """Posteriors, log-likelihoods and log-scalings for an (N, T) batch.

    Returns ``(post, log_likelihoods, log_scaling)`` with shapes
    (N, T, M), (N,), (N, T).
    """
    fb = forward_backward_arrays(params, samples)
    post, _ = _backward_posteriors(fb, params.transitions)
    return post.transpose(1, 0, 2), fb.log_likelihoods, fb.log_scaling.T


def forward(params: HmmParams, trace: SignalTrace):
    """Scaled forward pass on one trace.

    Returns ``(alpha_hat, scaling, log_likelihood)`` where ``alpha_hat``
    is (T, M) with rows summing to one, ``scaling`` holds the per-step
    normalizers, and ``log_likelihood`` equals ``sum(log(scaling))``
    accumulated in log space.
    """
    fb = forward_backward_arrays(params, trace.samples[None, :])
    return fb.alpha[:, 0, :], np.exp(fb.log_scaling[:, 0]), float(fb.log_likelihoods[0])


def backward(params: HmmParams, trace: SignalTrace, scaling: np.ndarray) -> np.ndarray:
    """Scaled backward pass on one trace, using forward's normalizers.

    ``beta_hat[T-1] = 1`` and earlier steps divide by the shared scaling,
    so that elementwise ``alpha_hat * beta_hat`` are the state posteriors.
    """
    samples_tm = np.ascontiguousarray(trace.samples, dtype=float)[:, None]
    b_shift, shift = _shifted_emissions(params, samples_tm)
    scaling = np.asarray(scaling, dtype=float)
    if shift is None:
        c_shift = scaling[:, None]
    else:
        c_shift = np.exp(np.log(scaling)[:, None] - shift)
    t_len = samples_tm.shape[0]
    beta = np.empty((t_len, 1, params.num_states))
    beta[t_len - 1] = 1.0
    a_t = params.transitions.T
    for t in range(t_len - 2, -1, -1):
        beta[t] = (b_shift[t + 1] * beta[t + 1] / c_shift[t + 1, :, None]) @ a_t
    return beta[:, 0, :]


def posteriors(params: HmmParams, trace: SignalTrace) -> PosteriorTable:
    """Exact per-time state posteriors P_t(i) for one trace."""
    fb = forward_backward_arrays(params, trace.samples[None, :])
    post, _ = _backward_posteriors(fb, params.transitions)
    return PosteriorTable(
        posteriors=post[:, 0, :],
        log_likelihood=float(fb.log_likelihoods[0]),
        scaling=np.exp(fb.log_scaling[:, 0]),
    )


def initial_state_posteriors(params: HmmParams, samples: np.ndarray) -> np.ndarray:
    """Initial-state posteriors P_0(i) for an (N, T) batch.

    Only the backward recursion is needed for t=0; each step renormalizes,
    so no forward scaling is required. Roughly half the cost of the full
    posterior table when only the initial-state decision matters.
    """
    samples = np.asarray(samples, dtype=float)
    samples_tm = np.ascontiguousarray(samples.T)
    t_len, n = samples_tm.shape
    b_shift, _ = _shifted_emissions(params, samples_tm)

    beta = np.ones((n, params.num_states))
    a_t = np.ascontiguousarray(params.transitions.T)
    for t in range(t_len - 1, 0, -1):
        beta = (b_shift[t] * beta) @ a_t
        norm = beta.sum(axis=1)
        if not np.all(norm > 0.0):
            raise AllStatesImpossible(t, int(np.argwhere(~(norm > 0.0))[0][0]))
        beta /= norm[:, None]
    p0 = params.initial_probs * b_shift[0] * beta
    norm = p0.sum(axis=1)
    if not np.all(norm > 0.0):
        raise AllStatesImpossible(0, int(np.argwhere(~(norm > 0.0))[0][0]))
    return p0 / norm[:, None]


def decide_initial_state(table: PosteriorTable, candidate_states=None):
    """Most probable initial state from a posterior table.

    Returns ``(state, probability)`` with the state index 1-based. Exact
    ties break toward the lowest state index. ``candidate_states``
    restricts the decision to a subset of states, renormalizing the
    initial posterior over them (used for readout schemes where some
    states cannot be initial states).
    """
    p0 = table.posteriors[0]
    return _decide_row(p0, table.num_states, candidate_states)


def decide_initial_states(params: HmmParams, samples: np.ndarray,
                          candidate_states=None) -> np.ndarray:
    """Vectorized initial-state decision for an (N, T) batch (1-based)."""
    p0 = initial_state_posteriors(params, samples)
    if candidate_states is None:
        return np.argmax(p0, axis=1) + 1
    cand = np.asarray(candidate_states, dtype=np.int64) - 1
    sub = p0[:, cand]
    return cand[np.argmax(sub, axis=1)] + 1


def _decide_row(p0: np.ndarray, m: int, candidate_states):
    if candidate_states is None:
        idx = int(np.argmax(p0))
        return idx + 1, float(p0[idx])
    cand = np.asarray(candidate_states, dtype=np.int64) - 1
    if cand.min() < 0 or cand.max() >= m:
        raise ValueError("candidate states outside 1..M")
    sub = p0[cand]
    total = sub.sum()
    if total <= 0.0:
        # all candidates carry zero mass: fall back to the lowest index
        return int(cand[0]) + 1, 0.0
    k = int(np.argmax(sub))
    return int(cand[k]) + 1, float(sub[k] / total)
