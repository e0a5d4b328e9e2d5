"""Confidence intervals for calibrated model parameters.

Two methods:

* Likelihood-ratio intervals: the interval edge is the parameter value at
  which the profile log-likelihood (re-maximized over all other free
  parameters with the target pinned) drops by a fixed amount below the
  maximum. A drop of 1/2 corresponds to the 68% level under a locally
  Gaussian likelihood.
* Monte Carlo intervals: mean plus/minus the unbiased standard deviation
  of the estimates across several independently trained data sets.

Interval half-widths are floored at 3.4e-7: with realistic training-set
sizes no estimate is credible beyond that accuracy. Edges falling outside
a parameter's definition region are clamped to the region boundary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import NonMonotoneProfile, ProfileDidNotConverge
from .model import HmmParams, TraceSet
from .training import TrainingConfig, total_log_likelihood, train

__all__ = [
    "HALF_WIDTH_FLOOR",
    "ConfidenceInterval",
    "profile_drop_at",
    "profile_likelihood_delta",
    "likelihood_ratio_interval",
    "likelihood_ratio_intervals",
    "monte_carlo_interval",
    "monte_carlo_intervals",
    "residuals_table",
]

logger = logging.getLogger(__name__)

HALF_WIDTH_FLOOR = 3.4e-7

# absolute tolerance on the log-likelihood drop when locating an edge
DROP_TOLERANCE = 1e-3

_MAX_EXPANSIONS = 200


@dataclass(frozen=True)
class ConfidenceInterval:
    """One parameter's estimate with interval edges.

    ``method`` is 'likelihood_ratio' or 'monte_carlo'; ``level`` is the
    nominal confidence level the edge rule targets.
    """

    parameter_name: str
    estimate: float
    lower: float
    upper: float
    method: str
    level: float

    def __post_init__(self):
        if not self.lower <= self.estimate <= self.upper:
            raise ValueError(
                f"{self.parameter_name}: interval [{self.lower}, {self.upper}] "
                f"does not contain the estimate {self.estimate}")

    @property
    def half_widths(self) -> tuple[float, float]:
        return (self.estimate - self.lower, self.upper - self.estimate)

    def to_dict(self) -> dict:
        return {
            "parameter_name": self.parameter_name,
            "estimate": float(self.estimate),
            "lower": float(self.lower),
            "upper": float(self.upper),
            "method": self.method,
            "level": float(self.level),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConfidenceInterval":
        return cls(d["parameter_name"], float(d["estimate"]), float(d["lower"]),
                   float(d["upper"]), d["method"], float(d["level"]))


def _profile_value(params_star: HmmParams, traces: TraceSet, target: str,
                   value: float, base: TrainingConfig, warm: HmmParams):
    """Profile log-likelihood with ``target`` pinned at ``value``."""
    pinned = dict(base.pinned)
    pinned[target] = value
    cfg = replace(base, init_params=warm, pinned=pinned)
    result = train(cfg, traces)
    if not result.converged:
        raise ProfileDidNotConverge(
            f"inner re-maximization for {target}={value} did not converge "
            f"within {cfg.max_iterations} iterations")
    return float(result.ll_history[-1]), result.params


def profile_drop_at(params_star: HmmParams, traces: TraceSet, target: str,
                    value: float, config: TrainingConfig | None = None,
                    warm: HmmParams | None = None) -> float:
    """Profile log-likelihood drop with ``target`` pinned at one value.

    The drop is measured from the likelihood at ``params_star``; the
    profile re-maximizes all other free parameters starting from ``warm``
    (default: the estimate itself). Because the drop grows monotonically
    away from the maximum, comparing it against the edge-defining value
    answers interval-containment questions with a single evaluation.
    """
    base = _inner_config(params_star, config)
    ll_max = total_log_likelihood(params_star, traces)
    ll, _ = _profile_value(params_star, traces, target, value, base,
                           warm if warm is not None else params_star)
    return ll_max - ll


def profile_likelihood_delta(params_star: HmmParams, traces: TraceSet,
                             target: str, direction: int,
                             delta_ll: float = 0.5,
                             config: TrainingConfig | None = None) -> float:
    """Distance from the estimate to one profile-likelihood interval edge.

    ``direction`` is +1 for the upper edge, -1 for the lower. Returns the
    half-width delta >= 0 such that pinning the target at
    estimate + direction * delta and re-maximizing everything else drops
    the total log-likelihood by ``delta_ll``; if the drop is not reached
    inside the parameter's definition region, the distance to the region
    boundary is returned (edge clamped).

    ``config`` carries the training constraints of the original fit
    (frozen fields, tied groups, inner tolerance). The inner re-uses the
    reestimation machinery with one extra pinned coordinate, so every
    inner iteration climbs monotonically.
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    base = _inner_config(params_star, config)
    x_star = params_star.get_parameter(target)
    lo, hi = params_star.parameter_domain(target)
    limit = (hi - x_star) if direction > 0 else (x_star - lo)
    if limit <= HALF_WIDTH_FLOOR:
        return max(limit, 0.0)

    ll_max = total_log_likelihood(params_star, traces)
    warm = params_star

    def drop_at(delta: float):
        nonlocal warm
        ll, solved = _profile_value(params_star, traces, target,
                                    x_star + direction * delta, base, warm)
        warm = solved
        return ll_max - ll

    # seed the bracket from the local curvature of the pinned (cheaper,
    # narrower) likelihood cut, then expand geometrically
    eps = min(max(HALF_WIDTH_FLOOR, 1e-3 * _scale_of(target, x_star)), limit)
    pinned_drop = ll_max - total_log_likelihood(
        params_star.set_parameter(target, x_star + direction * eps), traces)
    if pinned_drop > 1e-12:
        delta = eps * np.sqrt(delta_ll / pinned_drop)
    else:
        delta = 1e3 * eps
    delta = float(np.clip(delta, HALF_WIDTH_FLOOR, limit))

    hard_cap = 1e12 * max(abs(x_star), 1.0)
    lo_d, lo_g = 0.0, 0.0
    hi_d = hi_g = None
    for _ in range(_MAX_EXPANSIONS):
        g = drop_at(delta)
        if g >= delta_ll:
            hi_d, hi_g = delta, g
            break
        lo_d, lo_g = delta, g
        if delta >= limit:
            # drop never reaches the target inside the definition region
            logger.debug("%s: edge clamped to domain boundary (drop %.4f)",
                         target, g)
            return limit
        if delta >= hard_cap:
            break
        delta = min(delta * 3.0, limit)
    if hi_d is None:
        raise NonMonotoneProfile(
            f"profile log-likelihood for {target} does not drop by "
            f"{delta_ll} within the search range")

    # bracketed root refinement on g(delta) - delta_ll: false position
    # with bisection fallback keeps the bracket valid
    for _ in range(200):
        if abs(hi_g - delta_ll) <= DROP_TOLERANCE:
            return hi_d
        if abs(lo_g - delta_ll) <= DROP_TOLERANCE and lo_d > 0.0:
            return lo_d
        if hi_g > lo_g:
            mid = lo_d + (delta_ll - lo_g) * (hi_d - lo_d) / (hi_g - lo_g)
            if not lo_d < mid < hi_d:
                mid = 0.5 * (lo_d + hi_d)
        else:
            mid = 0.5 * (lo_d + hi_d)
        g = drop_at(mid)
        if g >= delta_ll:
            hi_d, hi_g = mid, g
        else:
            lo_d, lo_g = mid, g
        if hi_d - lo_d < 1e-9 * max(hi_d, HALF_WIDTH_FLOOR):
            return hi_d
    return hi_d


def likelihood_ratio_interval(params_star: HmmParams, traces: TraceSet,
                              target: str, delta_ll: float = 0.5,
                              config: TrainingConfig | None = None,
                              level: float = 0.68) -> ConfidenceInterval:
    """Profile-likelihood-ratio interval of one parameter.

    ``params_star`` must be a converged training result on ``traces``;
    ``delta_ll`` is the log-likelihood drop defining the edges (1/2 for
    the 68% level).
    """
    if delta_ll <= 0.0:
        raise ValueError("delta_ll must be positive")
    x_star = params_star.get_parameter(target)
    lo, hi = params_star.parameter_domain(target)
    d_up = profile_likelihood_delta(params_star, traces, target, +1, delta_ll, config)
    d_dn = profile_likelihood_delta(params_star, traces, target, -1, delta_ll, config)
    upper = min(hi, x_star + max(d_up, HALF_WIDTH_FLOOR))
    lower = max(lo, x_star - max(d_dn, HALF_WIDTH_FLOOR))
    return ConfidenceInterval(target, x_star, lower, upper,
                              "likelihood_ratio", level)


def likelihood_ratio_intervals(params_star: HmmParams, traces: TraceSet,
                               targets=None, delta_ll: float = 0.5,
                               config: TrainingConfig | None = None,
                               level: float = 0.68) -> dict[str, ConfidenceInterval]:
    """Likelihood-ratio intervals for several parameters (default: all free)."""
    frozen = config.frozen_fields if config is not None else frozenset()
    if targets is None:
        targets = params_star.free_parameter_names(frozen)
    return {t: likelihood_ratio_interval(params_star, traces, t, delta_ll,
                                         config, level)
            for t in targets}


def monte_carlo_intervals(config: TrainingConfig, trace_sets,
                          targets=None, level: float = 0.68,
                          map_fn=map) -> dict[str, ConfidenceInterval]:
    """Monte Carlo intervals from repeated training on independent sets.

    Trains once per set with identical settings; the interval of each
    parameter is the mean of the per-set estimates plus/minus their
    unbiased standard deviation (floored). ``map_fn`` may be a parallel
    map; each training is independent.
    """
    trace_sets = list(trace_sets)
    if len(trace_sets) < 2:
        raise ValueError("need at least two independent training sets")
    results = list(map_fn(lambda ts: train(config, ts), trace_sets))
    for d, res in enumerate(results):
        if not res.converged:
            raise ProfileDidNotConverge(f"training on set {d} did not converge")
    sample = results[0].params
    if targets is None:
        targets = sample.free_parameter_names(config.frozen_fields)
    out = {}
    for t in targets:
        lo, hi = sample.parameter_domain(t)
        estimates = np.array([r.params.get_parameter(t) for r in results])
        center = float(estimates.mean())
        spread = max(float(estimates.std(ddof=1)), HALF_WIDTH_FLOOR)
        out[t] = ConfidenceInterval(t, center, max(lo, center - spread),
                                    min(hi, center + spread), "monte_carlo", level)
    return out


def monte_carlo_interval(config: TrainingConfig, trace_sets, target: str,
                         level: float = 0.68) -> ConfidenceInterval:
    """Monte Carlo interval of a single parameter."""
    return monte_carlo_intervals(config, trace_sets, [target], level)[target]


def residuals_table(intervals: dict[str, ConfidenceInterval],
                    truth: HmmParams) -> list[dict]:
    """Rows of (parameter, estimate - truth, interval edges) for residual
    plots and JSON/CSV export."""
    rows = []
    for name, ci in intervals.items():
        true_val = truth.get_parameter(name)
        rows.append({
            "parameter": name,
            "estimate": float(ci.estimate),
            "truth": float(true_val),
            "residual": float(ci.estimate - true_val),
            "lower": float(ci.lower),
            "upper": float(ci.upper),
            "method": ci.method,
        })
    return rows


def _inner_config(params_star: HmmParams, config: TrainingConfig | None) -> TrainingConfig:
    if config is None:
        config = TrainingConfig(init_params=params_star)
    return replace(config, init_params=params_star,
                   ll_tolerance=min(config.ll_tolerance, 1e-4),
                   max_iterations=max(config.max_iterations, 500))


def _scale_of(target: str, x_star: float) -> float:
    return max(abs(x_star), 1e-4)
