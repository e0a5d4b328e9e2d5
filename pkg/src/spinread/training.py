"""Maximum-likelihood model calibration from a multi-trace training set.

Expectation-maximization reestimation of the readout model: per-iteration
state posteriors from the scaled forward-backward pass, then closed-form
updates of the initial distribution, emission means and variances, and
transition probabilities. The total log-likelihood is non-decreasing
across iterations; a decrease beyond round-off slack aborts the run.

Constraints supported:

* frozen fields: whole parameter blocks excluded from reestimation
  (e.g. the initial distribution for readout schemes where it is
  degenerate),
* pinned scalars: one named parameter held at a fixed value while the
  rest of its probability row is renormalized (used by the
  profile-likelihood machinery),
* tied groups: states sharing one mean or variance estimate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import EmptyStateOccupancy
from .hmm import forward_backward_arrays
from .model import HmmParams, TraceSet, parse_parameter_name

__all__ = [
    "TrainingConfig",
    "TrainingResult",
    "total_log_likelihood",
    "baum_welch_step",
    "train",
    "train_with_restarts",
]

logger = logging.getLogger(__name__)

# First transition index entering the transition-update numerator. The
# denominator always sums occupancies over t = 0..T-2. Starting the
# numerator at 0 makes the update the exact EM maximizer, which carries
# the monotone-likelihood guarantee that the trainer asserts.
TRANSITION_NUMERATOR_START = 0

# Hard slack on the EM monotonicity guarantee, absolute in total LL.
LL_DECREASE_SLACK = 1e-8


@dataclass(frozen=True)
class TrainingConfig:
    """Settings for one training run.

    ``ll_tolerance`` is the stopping threshold on the per-iteration gain
    of the total log-likelihood. ``frozen_fields`` names whole blocks
    ('initial_probs', 'means', 'variances', 'transitions') to copy
    through unchanged. ``pinned`` maps scalar parameter names (pi_i,
    mu_i, sigma2_i, A_ij) to fixed values. ``tied_means`` and
    ``tied_variances`` are groups of 1-based states sharing an estimate.
    """

    init_params: HmmParams
    ll_tolerance: float = 0.001
    max_iterations: int = 1000
    frozen_fields: frozenset = frozenset()
    pinned: dict = field(default_factory=dict)
    tied_means: tuple = ()
    tied_variances: tuple = ()
    variance_floor: float = 1e-12

    def __post_init__(self):
        if self.ll_tolerance <= 0.0:
            raise ValueError("ll_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        valid = {"initial_probs", "means", "variances", "transitions"}
        unknown = set(self.frozen_fields) - valid
        if unknown:
            raise ValueError(f"unknown frozen fields {sorted(unknown)}")
        object.__setattr__(self, "frozen_fields", frozenset(self.frozen_fields))


@dataclass(frozen=True)
class TrainingResult:
    """Converged parameters with the log-likelihood trajectory."""

    params: HmmParams
    ll_history: np.ndarray
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "ll_history": [float(x) for x in self.ll_history],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingResult":
        return cls(
            params=HmmParams.from_dict(d["params"]),
            ll_history=np.asarray(d["ll_history"], dtype=float),
            iterations=int(d["iterations"]),
            converged=bool(d["converged"]),
        )


def total_log_likelihood(params: HmmParams, traces: TraceSet) -> float:
    """Sum of per-trace log-likelihoods over the whole set."""
    fb = forward_backward_arrays(params, traces.samples)
    return float(fb.log_likelihoods.sum())


@dataclass(frozen=True)
class _Statistics:
    """Sufficient statistics of one expectation pass."""

    total_ll: float
    n_traces: int
    first_step: np.ndarray      # (M,) sum_n P_{n,0}(i)
    occupancy: np.ndarray       # (M,) sum_{n,t} P_nt(i)
    occupancy_head: np.ndarray  # (M,) sum_{n, t<=T-2} P_nt(i)
    weighted_y: np.ndarray      # (M,) sum P * y
    weighted_y2: np.ndarray     # (M,) sum P * y^2
    xi_raw: np.ndarray          # (M, M) transition cross terms, without A


def _expectation(params: HmmParams, samples: np.ndarray,
                 xi_start: int) -> _Statistics:
    fb = forward_backward_arrays(params, samples)
    alpha = fb.alpha  # (T, N, M); overwritten below with posteriors
    t_len, n, m = alpha.shape
    a_t = np.ascontiguousarray(params.transitions.T)
    samples_tm = np.ascontiguousarray(samples.T)

    xi_raw = np.zeros((m, m))
    weighted_pre = fb.shifted_emissions / fb.shifted_scaling[..., None]
    beta = np.ones((n, m))
    for t in range(t_len - 2, -1, -1):
        weighted = weighted_pre[t + 1] * beta
        if t >= xi_start:
            xi_raw += alpha[t].T @ weighted
        beta = weighted @ a_t
        alpha[t] *= beta
    # alpha now holds alpha_hat * beta_hat, whose rows sum to one up to
    # round-off (the per-step identity of the scaled recursion); the
    # explicit renormalization pass is skipped
    post = alpha

    occ_t = post.sum(axis=1)  # (T, M)
    occ = occ_t.sum(axis=0)
    wy = np.einsum("tnm,tn->m", post, samples_tm)
    wy2 = np.einsum("tnm,tn->m", post, samples_tm * samples_tm)

    return _Statistics(
        total_ll=float(fb.log_likelihoods.sum()),
        n_traces=n,
        first_step=occ_t[0],
        occupancy=occ,
        occupancy_head=occ - occ_t[t_len - 1],
        weighted_y=wy,
        weighted_y2=wy2,
        xi_raw=xi_raw,
    )


def _pinned_by_kind(pinned: dict, num_states: int) -> dict:
    out: dict = {"pi": {}, "mu": {}, "sigma2": {}, "A": {}}
    for name, value in (pinned or {}).items():
        kind, idx = parse_parameter_name(name, num_states)
        out[kind][idx] = float(value)
    return out


def _maximization(stats: _Statistics, params: HmmParams,
                  frozen_fields: frozenset, pinned: dict,
                  tied_means, tied_variances, variance_floor: float) -> HmmParams:
    m = params.num_states
    pins = _pinned_by_kind(pinned, m)

    def occupancy_or_raise(i: int, occ: np.ndarray) -> float:
        # a state only blocks reestimation if its own parameters need it
        if occ[i] <= 0.0:
            raise EmptyStateOccupancy(i + 1)
        return occ[i]

    # initial distribution
    if "initial_probs" in frozen_fields:
        pi_new = params.initial_probs.copy()
    else:
        pi_new = stats.first_step / stats.n_traces
        np.clip(pi_new, 0.0, 1.0, out=pi_new)
        pi_new /= pi_new.sum()
        pi_new = _apply_simplex_pins(pi_new, {k[0]: v for k, v in pins["pi"].items()})

    # means
    mu_tied = {g - 1 for group in tied_means for g in group}
    if "means" in frozen_fields:
        mu_new = params.means.copy()
    else:
        mu_new = params.means.copy()
        for i in range(m):
            if (i,) in pins["mu"] or i in mu_tied:
                continue
            mu_new[i] = stats.weighted_y[i] / occupancy_or_raise(i, stats.occupancy)
        for group in tied_means:
            idx = [g - 1 for g in group]
            group_occ = stats.occupancy[idx].sum()
            if group_occ <= 0.0:
                raise EmptyStateOccupancy(group[0])
            mu_new[idx] = stats.weighted_y[idx].sum() / group_occ
        for (i,), v in pins["mu"].items():
            mu_new[i] = v

    # variances (biased normalization, as in the standard EM update)
    var_tied = {g - 1 for group in tied_variances for g in group}
    if "variances" in frozen_fields:
        var_new = params.variances.copy()
    else:
        var_new = params.variances.copy()
        for i in range(m):
            if (i,) in pins["sigma2"] or i in var_tied:
                continue
            occ = occupancy_or_raise(i, stats.occupancy)
            var_new[i] = (stats.weighted_y2[i]
                          - 2.0 * mu_new[i] * stats.weighted_y[i]) / occ + mu_new[i] ** 2
        for group in tied_variances:
            idx = [g - 1 for g in group]
            group_occ = stats.occupancy[idx].sum()
            if group_occ <= 0.0:
                raise EmptyStateOccupancy(group[0])
            ss = (stats.weighted_y2[idx]
                  - 2.0 * mu_new[idx] * stats.weighted_y[idx]
                  + mu_new[idx] ** 2 * stats.occupancy[idx]).sum()
            var_new[idx] = ss / group_occ
        for (i,), v in pins["sigma2"].items():
            var_new[i] = v
        var_new = np.maximum(var_new, variance_floor)

    # transitions
    if "transitions" in frozen_fields:
        a_new = params.transitions.copy()
    else:
        numer = params.transitions * stats.xi_raw
        a_new = np.empty_like(numer)
        for i in range(m):
            if stats.occupancy_head[i] <= 0.0:
                raise EmptyStateOccupancy(i + 1)
            row = numer[i] / stats.occupancy_head[i]
            total = row.sum()
            if total <= 0.0:
                row = params.transitions[i].copy()
            else:
                row = np.clip(row / total, 0.0, 1.0)
                row /= row.sum()
            a_new[i] = row
        row_pins: dict[int, dict[int, float]] = {}
        for (i, j), v in pins["A"].items():
            row_pins.setdefault(i, {})[j] = v
        for i, jpins in row_pins.items():
            a_new[i] = _apply_simplex_pins(a_new[i], jpins)

    return HmmParams(
        initial_probs=pi_new,
        means=mu_new,
        variances=var_new,
        transitions=a_new,
        state_labels=params.state_labels,
    )


def _apply_simplex_pins(row: np.ndarray, pins: dict[int, float]) -> np.ndarray:
    """Pin entries of a probability row, rescaling the rest of the mass."""
    if not pins:
        return row
    out = row.copy()
    pinned_idx = list(pins.keys())
    pinned_mass = sum(pins.values())
    if pinned_mass > 1.0 + 1e-12:
        raise ValueError("pinned probabilities exceed 1")
    free = [j for j in range(row.size) if j not in pins]
    free_mass = out[free].sum()
    for j, v in pins.items():
        out[j] = v
    if free:
        if free_mass > 0.0:
            out[free] *= (1.0 - pinned_mass) / free_mass
        else:
            out[free] = (1.0 - pinned_mass) / len(free)
    return np.clip(out, 0.0, 1.0)


def baum_welch_step(params: HmmParams, traces: TraceSet,
                    frozen_fields: frozenset = frozenset(),
                    pinned: dict | None = None,
                    tied_means=(), tied_variances=(),
                    variance_floor: float = 1e-12) -> HmmParams:
    """One reestimation step; returns the updated parameters.

    Traces shorter than two steps carry no transition information and
    leave the transition matrix unchanged.
    """
    samples = traces.samples
    if samples.shape[1] - 1 <= TRANSITION_NUMERATOR_START:
        frozen_fields = frozenset(frozen_fields) | {"transitions"}
    stats = _expectation(params, samples, TRANSITION_NUMERATOR_START)
    return _maximization(stats, params, frozenset(frozen_fields),
                         pinned or {}, tied_means, tied_variances,
                         variance_floor)


def _apply_pins_to_params(params: HmmParams, pinned: dict) -> HmmParams:
    for name, value in (pinned or {}).items():
        params = params.set_parameter(name, value)
    return params


def train(config: TrainingConfig, traces: TraceSet) -> TrainingResult:
    """Iterate reestimation until the log-likelihood gain drops below the
    tolerance or the iteration budget is exhausted.

    The returned parameters are those whose likelihood was evaluated
    last; when converged, that is the first iterate whose gain fell
    under the tolerance.
    """
    samples = traces.samples
    params = _apply_pins_to_params(config.init_params, config.pinned)
    frozen = config.frozen_fields
    if samples.shape[1] - 1 <= TRANSITION_NUMERATOR_START:
        frozen = frozen | {"transitions"}

    history: list[float] = []
    converged = False
    for iteration in range(config.max_iterations + 1):
        stats = _expectation(params, samples, TRANSITION_NUMERATOR_START)
        ll = stats.total_ll
        if history:
            gain = ll - history[-1]
            if gain < -LL_DECREASE_SLACK:
                raise RuntimeError(
                    f"log-likelihood decreased by {-gain:.3e} at iteration "
                    f"{iteration}; reestimation is inconsistent")
            history.append(ll)
            logger.debug("iteration=%d total_ll=%.6f gain=%.3e", iteration, ll, gain)
            if gain < config.ll_tolerance:
                converged = True
                break
        else:
            history.append(ll)
            logger.debug("iteration=%d total_ll=%.6f", iteration, ll)
        if iteration == config.max_iterations:
            break
        params = _maximization(stats, params, frozen, config.pinned,
                               config.tied_means, config.tied_variances,
                               config.variance_floor)
    logger.info("training finished: iterations=%d converged=%s total_ll=%.6f",
                len(history) - 1, converged, history[-1])
    return TrainingResult(
        params=params,
        ll_history=np.asarray(history),
        iterations=len(history) - 1,
        converged=converged,
    )


def train_with_restarts(config: TrainingConfig, traces: TraceSet,
                        init_params_list) -> TrainingResult:
    """Train from several starting points; keep the best final likelihood.

    Reestimation converges to a local maximum, so several starts guard
    against a poor initialization.
    """
    best: TrainingResult | None = None
    for init in init_params_list:
        result = train(replace(config, init_params=init), traces)
        if best is None or result.ll_history[-1] > best.ll_history[-1]:
            best = result
    if best is None:
        raise ValueError("need at least one starting point")
    return best
