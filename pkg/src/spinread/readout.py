"""Threshold-based state assignment and signal preprocessing.

The threshold method compresses a trace into one statistic, either the
mean of the first ``window`` samples (integrated mode, two-level readout
with possible decay) or their maximum (peak mode, blip detection), and
compares it to a fixed threshold. Calibration grid-searches threshold and
window on labeled training traces, maximizing assignment fidelity.

Also provides the block-averaging prefilter used to shorten correlation
times, the mapping from a correlated-noise generator to the closest
white-noise model ("model-matched" parameters), and the closed-form log
posterior ratio of a two-state no-transition model, whose sign is the
optimal decision and whose zero defines the optimal integrated threshold
when the two variances are equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ScaledProbabilityInvalid
from .model import HmmParams, SignalTrace, TraceSet
from .noise import NoiseSpec, sample_correlated_traces

__all__ = [
    "ThresholdConfig",
    "FilterConfig",
    "CalibrationResult",
    "threshold_statistics",
    "threshold_assign",
    "threshold_assign_batch",
    "calibrate_threshold",
    "averaging_filter",
    "filter_traceset",
    "model_matched_params",
    "log_posterior_ratio",
    "optimal_integrated_threshold",
]

THRESHOLD_GRID_POINTS = 201
_DENSE_WINDOW_LIMIT = 64


@dataclass(frozen=True)
class ThresholdConfig:
    """Threshold-method settings.

    mode: 'integrated' (mean of the first ``window`` samples) or 'peak'
    (their maximum). A statistic strictly above ``threshold`` assigns
    ``high_state``, otherwise ``low_state``.
    """

    mode: str
    threshold: float
    window: int
    high_state: int = 1
    low_state: int = 2

    def __post_init__(self):
        if self.mode not in ("integrated", "peak"):
            raise ValueError(f"unknown threshold mode {self.mode!r}")
        if self.window < 1:
            raise ValueError("window must be at least one sample")
        if not np.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "threshold": float(self.threshold),
            "window": int(self.window),
            "high_state": int(self.high_state),
            "low_state": int(self.low_state),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdConfig":
        return cls(d["mode"], float(d["threshold"]), int(d["window"]),
                   int(d.get("high_state", 1)), int(d.get("low_state", 2)))


@dataclass(frozen=True)
class FilterConfig:
    """Block-averaging prefilter: ``block_size`` consecutive samples are
    replaced by their mean; the trailing remainder is dropped."""

    block_size: int

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block size must be at least 1")

    def to_dict(self) -> dict:
        return {"block_size": int(self.block_size)}

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        return cls(int(d["block_size"]))


def threshold_statistics(mode: str, samples: np.ndarray, window: int) -> np.ndarray:
    """Per-trace decision statistic over the first ``window`` samples."""
    if window > samples.shape[1]:
        raise ValueError(f"window {window} exceeds trace length {samples.shape[1]}")
    head = samples[:, :window]
    if mode == "integrated":
        return head.mean(axis=1)
    if mode == "peak":
        return head.max(axis=1)
    raise ValueError(f"unknown threshold mode {mode!r}")


def threshold_assign(config: ThresholdConfig, trace: SignalTrace) -> int:
    """Assign one trace; returns the 1-based state index."""
    return int(threshold_assign_batch(config, trace.samples[None, :])[0])


def threshold_assign_batch(config: ThresholdConfig, samples: np.ndarray) -> np.ndarray:
    """Assign an (N, T) batch; returns (N,) 1-based state indices."""
    stats = threshold_statistics(config.mode, samples, config.window)
    return np.where(stats > config.threshold, config.high_state, config.low_state)


@dataclass(frozen=True)
class CalibrationResult:
    """Grid-search outcome: chosen settings plus diagnostics."""

    config: ThresholdConfig
    training_fidelity: float
    windows: np.ndarray
    thresholds: np.ndarray
    best_fidelity_per_window: np.ndarray

    def report(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "training_fidelity": float(self.training_fidelity),
            "windows": [int(w) for w in self.windows],
            "thresholds": [float(t) for t in self.thresholds],
            "best_fidelity_per_window": [float(f) for f in
                                         self.best_fidelity_per_window],
        }


def _window_grid(t_len: int) -> np.ndarray:
    dense = np.arange(1, min(t_len, _DENSE_WINDOW_LIMIT) + 1)
    if t_len <= _DENSE_WINDOW_LIMIT:
        return dense
    sparse = np.unique(np.round(np.geomspace(_DENSE_WINDOW_LIMIT, t_len, 40))
                       ).astype(int)
    return np.unique(np.concatenate([dense, sparse]))


def calibrate_threshold(mode: str, training: TraceSet) -> CalibrationResult:
    """Grid-search threshold and window maximizing training fidelity.

    The training set must carry ground-truth state sequences with exactly
    two distinct initial states. Thresholds run on a 201-point grid
    spanning the state signal levels plus two noise standard deviations;
    windows cover every length up to 64 and a logarithmic subsample above.
    Ties break toward the smallest window, then the smallest threshold.
    """
    if training.true_states is None:
        raise ValueError("threshold calibration needs ground-truth labels")
    samples = training.samples
    n, t_len = samples.shape
    initial = training.initial_states
    classes = np.unique(initial)
    if classes.size != 2:
        raise ValueError(f"need exactly two initial-state classes, got {classes}")

    # signal levels and pooled noise scale from the labeled samples
    state_values = np.unique(training.true_states)
    means = {s: samples[training.true_states == s].mean() for s in state_values}
    resid = samples - np.vectorize(means.get)(training.true_states)
    sigma = max(float(resid.std()), 0.0)
    mu_low = min(means.values())
    mu_high = max(means.values())
    thresholds = np.linspace(mu_low - 2 * sigma, mu_high + 2 * sigma,
                             THRESHOLD_GRID_POINTS)

    # the class with the larger full-trace statistic is the high state
    full_stats = threshold_statistics(mode, samples, t_len)
    mean_by_class = [full_stats[initial == c].mean() for c in classes]
    high_state = int(classes[int(np.argmax(mean_by_class))])
    low_state = int(classes[0] if high_state == classes[1] else classes[1])
    is_high = initial == high_state
    n_low = int((~is_high).sum())

    windows = _window_grid(t_len)
    best = (-1.0, None, None)  # fidelity, window, threshold
    best_per_window = np.empty(windows.size)
    if mode == "integrated":
        cums = samples.cumsum(axis=1)
    else:
        cums = np.maximum.accumulate(samples, axis=1)
    for k, w in enumerate(windows):
        if mode == "integrated":
            stats = cums[:, w - 1] / w
        else:
            stats = cums[:, w - 1]
        high_sorted = np.sort(stats[is_high])
        low_sorted = np.sort(stats[~is_high])
        # statistic > threshold reads high: errors are high-class traces at
        # or below the threshold plus low-class traces above it
        err_high = np.searchsorted(high_sorted, thresholds, side="right")
        err_low = n_low - np.searchsorted(low_sorted, thresholds, side="right")
        fidelity = 1.0 - (err_high + err_low) / n
        j = int(np.argmax(fidelity))  # first maximum: smallest threshold
        best_per_window[k] = fidelity[j]
        if fidelity[j] > best[0]:
            best = (float(fidelity[j]), int(w), float(thresholds[j]))
    config = ThresholdConfig(mode=mode, threshold=best[2], window=best[1],
                             high_state=high_state, low_state=low_state)
    return CalibrationResult(config, best[0], windows, thresholds,
                             best_per_window)


def averaging_filter(config: FilterConfig, trace: SignalTrace) -> SignalTrace:
    """Average blocks of ``block_size`` samples into one; drop the remainder.

    Ground-truth states downsample by block majority; ties resolve to the
    state occurring earliest in the block.
    """
    states = None if trace.true_states is None else trace.true_states[None, :]
    samples, states = _filter_arrays(config, trace.samples[None, :], states)
    return SignalTrace(samples[0], None if states is None else states[0],
                       trace.sample_interval)


def filter_traceset(config: FilterConfig, traces: TraceSet) -> TraceSet:
    """Batch version of ``averaging_filter``; keeps ids and metadata."""
    samples, states = _filter_arrays(config, traces.samples, traces.true_states)
    return TraceSet(samples=samples, true_states=states,
                    trace_ids=traces.trace_ids.copy(),
                    sample_interval=traces.sample_interval,
                    metadata=dict(traces.metadata, filter_block_size=config.block_size))


def filter_samples(config: FilterConfig, samples: np.ndarray) -> np.ndarray:
    """Block-average an (N, T) sample array without state bookkeeping."""
    return _filter_arrays(config, samples, None)[0]


def _filter_arrays(config: FilterConfig, samples: np.ndarray,
                   states: np.ndarray | None):
    ts = config.block_size
    n, t_len = samples.shape
    n_blocks = t_len // ts
    if n_blocks < 1:
        raise ValueError(f"block size {ts} exceeds trace length {t_len}")
    blocks = samples[:, : n_blocks * ts].reshape(n, n_blocks, ts)
    out = blocks.mean(axis=2)
    if states is None:
        return out, None
    sblocks = states[:, : n_blocks * ts].reshape(n, n_blocks, ts)
    state_values = np.unique(sblocks)
    counts = np.stack([(sblocks == s).sum(axis=2) for s in state_values], axis=2)
    first_pos = np.stack(
        [np.where((sblocks == s).any(axis=2), np.argmax(sblocks == s, axis=2), ts)
         for s in state_values], axis=2)
    top = counts.max(axis=2, keepdims=True)
    # among tied majority states, take the one appearing earliest
    pos_masked = np.where(counts == top, first_pos, ts + 1)
    winner = np.argmin(pos_masked, axis=2)
    return out, state_values[winner]


def model_matched_params(original: HmmParams, noise,
                         filter_config: FilterConfig | None = None,
                         rng=None, n_calibration_traces: int = 2000,
                         calibration_length: int = 1000) -> HmmParams:
    """White-noise model closest to a correlated-noise generator.

    Without a filter the transition matrix, initial distribution and means
    carry over and each state's emission variance is set to the noise
    variance. With a block-averaging filter, off-diagonal transition
    probabilities scale by the block size (valid while their products stay
    far below one) and the variances are measured as sample variances of
    filtered transition-free noise traces, generated from the given specs
    with the supplied seed.

    ``noise`` is a single NoiseSpec or one per state.
    """
    m = original.num_states
    specs = [noise] * m if isinstance(noise, NoiseSpec) else list(noise)
    if len(specs) != m:
        raise ValueError("need one noise spec per state")

    if filter_config is None or filter_config.block_size == 1:
        variances = np.array([s.variance for s in specs], dtype=float)
        if filter_config is None:
            return original.replace(variances=variances)

    ts = filter_config.block_size
    off = original.transitions * ts
    np.fill_diagonal(off, 0.0)
    if np.any(off >= 1.0):
        worst = float(off.max())
        raise ScaledProbabilityInvalid(
            f"scaled transition probability {worst:.3f} >= 1 at block size {ts}")
    a_new = off.copy()
    np.fill_diagonal(a_new, 1.0 - off.sum(axis=1))

    if ts == 1:
        return original.replace(transitions=a_new, variances=variances)
    if rng is None:
        raise ValueError("filtered variance calibration needs a seeded rng")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    length = (calibration_length // ts) * ts
    if length < ts:
        raise ValueError("calibration length shorter than one block")
    variances = np.empty(m)
    fidx = {}
    for i, spec in enumerate(specs):
        key = id(spec)
        if key in fidx:  # shared spec: one calibration run serves all states
            variances[i] = variances[fidx[key]]
            continue
        zero_mean = NoiseSpec(kind=spec.kind, variance=spec.variance,
                              correlation_time=spec.correlation_time,
                              spectrum=spec.spectrum, mean=0.0)
        raw = sample_correlated_traces(zero_mean, n_calibration_traces, length, rng)
        blocks = raw.reshape(n_calibration_traces, length // ts, ts).mean(axis=2)
        variances[i] = float(blocks.var())
        fidx[key] = i
    return original.replace(transitions=a_new, variances=variances)


def log_posterior_ratio(prior_a: float, prior_b: float,
                        mu_a: float, var_a: float,
                        mu_b: float, var_b: float,
                        samples: np.ndarray) -> float:
    """Log ratio of the two state posteriors for a no-transition model.

    Positive values favor state A. For equal variances the ratio depends
    on the data only through the sample mean, which is why the integrated
    threshold is then an optimal decision; with unequal variances the
    sample second moment enters as well.
    """
    y = np.asarray(samples, dtype=float)
    t_len = y.size
    quad = ((y - mu_b) ** 2 / (2.0 * var_b) - (y - mu_a) ** 2 / (2.0 * var_a)).sum()
    return (np.log(prior_a / prior_b)
            + 0.5 * t_len * np.log(var_b / var_a)
            + quad)


def optimal_integrated_threshold(prior_a: float, prior_b: float,
                                 mu_a: float, mu_b: float, var: float,
                                 t_len: int) -> float:
    """Sample-mean value where the equal-variance log posterior ratio is zero.

    States are labeled so that ``mu_a < mu_b``; sample means above the
    returned value favor state B.
    """
    if mu_a == mu_b:
        raise ValueError("states with equal means cannot be separated")
    return 0.5 * (mu_a + mu_b) + var * np.log(prior_a / prior_b) / (
        t_len * (mu_b - mu_a))
