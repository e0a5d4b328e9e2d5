"""Stationary-noise synthesis and readout-trace generation.

Correlated noise is sampled in the Fourier domain: independent Gaussian
spectral amplitudes with variances set by the target spectrum, hermitian
completion, then an inverse transform. Generated noise is circularly
stationary (periodic boundary, trace wraps onto itself).

Multi-state readout traces are composed from one independent noise trace
per state plus a stochastic state sequence drawn from the transition
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HmmParams, SignalTrace, TraceSet

__all__ = [
    "NoiseSpec",
    "StateSequence",
    "gaussian_spectrum",
    "sample_correlated_trace",
    "sample_correlated_traces",
    "sample_state_sequence",
    "sample_state_sequences",
    "compose_trace",
    "compose_traces",
    "sample_hmm_trace",
    "sample_hmm_traces",
    "sample_composed_traces",
]


def _rng_of(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def gaussian_spectrum(variance: float, correlation_time: float, length: int) -> np.ndarray:
    """Discrete noise spectrum with a Gaussian profile.

    The spectrum falls off as exp[-(k pi T_c / T)^2] up to the Nyquist
    index and is mirrored above it. Its inverse transform approximates a
    Gaussian autocorrelation variance * exp[-(j / T_c)^2] for lags well
    below T. ``correlation_time`` of zero yields the flat (white) spectrum.

    The profile is rescaled so the mean spectral weight equals ``variance``
    exactly, which pins the lag-0 autocorrelation of generated noise to
    ``variance``. The rescaling factor deviates from one by less than
    3e-11 for correlation times >= 3 and by about 2.7% at T_c = 1, where
    the Gaussian profile no longer fits under the Nyquist cutoff.
    """
    if length < 2:
        raise ValueError("spectrum length must be at least 2")
    if variance <= 0.0:
        raise ValueError("variance must be positive")
    if correlation_time < 0.0:
        raise ValueError("correlation time must be non-negative")
    if correlation_time == 0.0:
        return np.full(length, float(variance))
    k = np.arange(length // 2 + 1, dtype=float)
    head = np.exp(-((k * np.pi * correlation_time / length) ** 2))
    shape = np.empty(length)
    shape[: k.size] = head
    shape[k.size:] = head[1: length - k.size + 1][::-1]
    return shape * (variance * length / shape.sum())


@dataclass(frozen=True)
class NoiseSpec:
    """Description of stationary noise for trace generation.

    kind: 'white' (variance only), 'gaussian' (variance and correlation
    time), or 'explicit' (full spectrum of length T). ``mean`` is injected
    into the zero-frequency bin on generation.
    """

    kind: str
    variance: float | None = None
    correlation_time: float | None = None
    spectrum: np.ndarray | None = None
    mean: float = 0.0

    def __post_init__(self):
        if self.kind not in ("white", "gaussian", "explicit"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "explicit":
            spec = np.asarray(self.spectrum, dtype=float)
            if spec.ndim != 1 or spec.size < 2:
                raise ValueError("explicit spectrum must be a vector of length >= 2")
            if np.any(spec < 0.0):
                raise ValueError("spectrum entries must be non-negative")
            if not np.allclose(spec[1:], spec[1:][::-1], rtol=1e-9, atol=1e-12):
                raise ValueError("spectrum must satisfy the mirror symmetry L_k = L_{T-k}")
            spec.setflags(write=False)
            object.__setattr__(self, "spectrum", spec)
            object.__setattr__(self, "variance", float(spec.mean()))
        else:
            if self.variance is None or self.variance <= 0.0:
                raise ValueError("variance must be positive")
            if self.kind == "gaussian":
                if self.correlation_time is None or self.correlation_time < 0.0:
                    raise ValueError("correlation time must be non-negative")

    @classmethod
    def white(cls, variance: float, mean: float = 0.0) -> "NoiseSpec":
        return cls(kind="white", variance=float(variance), mean=float(mean))

    @classmethod
    def gaussian(cls, variance: float, correlation_time: float, mean: float = 0.0) -> "NoiseSpec":
        return cls(kind="gaussian", variance=float(variance),
                   correlation_time=float(correlation_time), mean=float(mean))

    @classmethod
    def explicit(cls, spectrum, mean: float = 0.0) -> "NoiseSpec":
        return cls(kind="explicit", spectrum=np.asarray(spectrum, dtype=float),
                   mean=float(mean))

    @property
    def is_white(self) -> bool:
        return self.kind == "white" or (
            self.kind == "gaussian" and self.correlation_time == 0.0)

    def spectrum_for(self, length: int) -> np.ndarray:
        """The spectrum vector of the given trace length."""
        if self.kind == "white":
            return np.full(length, float(self.variance))
        if self.kind == "gaussian":
            return gaussian_spectrum(self.variance, self.correlation_time, length)
        if self.spectrum.size != length:
            raise ValueError(
                f"explicit spectrum has length {self.spectrum.size}, need {length}")
        return np.asarray(self.spectrum)

    def autocorrelation_for(self, length: int) -> np.ndarray:
        """Exact autocorrelation implied by the spectrum at this length."""
        return np.real(np.fft.ifft(self.spectrum_for(length)))

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "mean": float(self.mean)}
        if self.kind == "explicit":
            d["spectrum"] = [float(x) for x in self.spectrum]
        else:
            d["variance"] = float(self.variance)
            if self.kind == "gaussian":
                d["correlation_time"] = float(self.correlation_time)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        kind = d["kind"]
        mean = float(d.get("mean", 0.0))
        if kind == "white":
            return cls.white(d["variance"], mean)
        if kind == "gaussian":
            return cls.gaussian(d["variance"], d["correlation_time"], mean)
        return cls.explicit(d["spectrum"], mean)


def sample_correlated_traces(spec: NoiseSpec, n_traces: int, length: int, rng) -> np.ndarray:
    """Sample an (N, T) batch of stationary noise traces from a spectrum.

    Spectral amplitudes Re y_k, Im y_k are drawn independently for the
    non-redundant bins with variance L_k / (2 d_k), where d_k = 1/2 on the
    self-conjugate bins (k = 0 and, for even T, k = T/2, which carry no
    imaginary part) and d_k = 1 elsewhere. The mean enters as a sqrt(T)
    shift of the zero-frequency bin. The remaining bins are the complex
    conjugates of their mirrors, so the transform
    y_t = T^(-1/2) sum_k y_k exp(i 2 pi t k / T) is real up to round-off.
    """
    rng = _rng_of(rng)
    spectrum = spec.spectrum_for(length)
    half = length // 2
    n_bins = half + 1
    lam = spectrum[:n_bins]

    d = np.ones(n_bins)
    d[0] = 0.5
    if length % 2 == 0:
        d[half] = 0.5
    component_sd = np.sqrt(lam / (2.0 * d))
    imag_sd = component_sd.copy()
    imag_sd[0] = 0.0
    if length % 2 == 0:
        imag_sd[half] = 0.0

    re = rng.standard_normal((n_traces, n_bins)) * component_sd
    im = rng.standard_normal((n_traces, n_bins)) * imag_sd
    re[:, 0] += np.sqrt(length) * spec.mean

    bins = np.empty((n_traces, length), dtype=complex)
    bins[:, :n_bins] = re + 1j * im
    mirror = np.arange(length - 1, half, -1)
    bins[:, mirror] = np.conj(bins[:, length - mirror])

    traces = np.fft.ifft(bins, axis=1) * np.sqrt(length)
    residue = np.abs(traces.imag).max(initial=0.0)
    if residue > 1e-9 * np.sqrt(max(spec.variance, 1.0)):
        raise AssertionError(f"imaginary residue {residue} exceeds tolerance")
    return np.ascontiguousarray(traces.real)


def sample_correlated_trace(spec: NoiseSpec, length: int, rng) -> np.ndarray:
    """One stationary noise trace of the given length."""
    return sample_correlated_traces(spec, 1, length, rng)[0]


@dataclass(frozen=True)
class StateSequence:
    """A sampled path of 1-based state indices."""

    states: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64)
        if s.ndim != 1 or s.size < 1:
            raise ValueError("states must be a non-empty vector")
        if s.min() < 1:
            raise ValueError("state indices are 1-based")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @property
    def initial_state(self) -> int:
        return int(self.states[0])

    def __len__(self) -> int:
        return self.states.size


def sample_state_sequences(params: HmmParams, initial_states, length: int, rng) -> np.ndarray:
    """Sample (N, T) state paths (1-based) from the transition matrix.

    ``initial_states`` is an (N,) vector of 1-based starting states, or an
    integer N to draw the starting states from the initial distribution.
    """
    rng = _rng_of(rng)
    cum_a = np.cumsum(params.transitions, axis=1)
    if np.isscalar(initial_states):
        n = int(initial_states)
        u0 = rng.random(n)
        start = np.searchsorted(np.cumsum(params.initial_probs), u0, side="right")
        start = np.minimum(start, params.num_states - 1)
    else:
        start = np.asarray(initial_states, dtype=np.int64) - 1
        n = start.size
        if start.min() < 0 or start.max() >= params.num_states:
            raise ValueError("initial states outside 1..M")
    states = np.empty((n, length), dtype=np.int64)
    states[:, 0] = start
    if length > 1:
        u = rng.random((n, length - 1))
        for t in range(1, length):
            rows = cum_a[states[:, t - 1]]
            states[:, t] = np.sum(u[:, t - 1][:, None] > rows, axis=1)
            np.minimum(states[:, t], params.num_states - 1, out=states[:, t])
    return states + 1


def sample_state_sequence(params: HmmParams, initial_state: int, length: int, rng) -> StateSequence:
    """One state path starting from a pinned 1-based initial state."""
    return StateSequence(
        sample_state_sequences(params, np.array([initial_state]), length, rng)[0])


def compose_traces(state_seqs: np.ndarray, per_state_noise, means) -> TraceSet:
    """Assemble readout traces from state paths and per-state noise.

    ``per_state_noise`` holds one (N, T) zero-mean noise batch per state;
    the sample at time t is the state mean plus that state's noise trace
    value: y_t = mu_{s_t} + n_t^{(s_t)}.
    """
    states = np.asarray(state_seqs, dtype=np.int64)
    means = np.asarray(means, dtype=float)
    stack = np.stack([np.asarray(v, dtype=float) for v in per_state_noise])
    if stack.shape[0] != means.size:
        raise ValueError("need one noise batch per state")
    if stack.shape[1:] != states.shape:
        raise ValueError("noise traces and state paths must share shape (N, T)")
    n, t_len = states.shape
    s0 = states - 1
    rows = np.arange(n)[:, None]
    cols = np.arange(t_len)[None, :]
    samples = means[s0] + stack[s0, rows, cols]
    return TraceSet(samples=samples, true_states=states)


def compose_trace(state_seq: StateSequence, per_state_noise, means) -> SignalTrace:
    """Single-trace composition; see ``compose_traces``."""
    noise = [np.asarray(v, dtype=float)[None, :] for v in per_state_noise]
    ts = compose_traces(state_seq.states[None, :], noise, means)
    return ts[0]


def sample_hmm_traces(params: HmmParams, initial_states, length: int, rng,
                      n_traces: int | None = None) -> TraceSet:
    """Simulate readout traces with white noise directly from the model.

    States evolve by the transition matrix; each sample is drawn from the
    Gaussian emission of the current state. ``initial_states`` is an (N,)
    vector of pinned 1-based starting states or None to draw from the
    initial distribution (``n_traces`` required in that case).
    """
    rng = _rng_of(rng)
    if initial_states is None:
        if n_traces is None:
            raise ValueError("n_traces required when initial states are drawn")
        init = int(n_traces)
    else:
        init = np.asarray(initial_states, dtype=np.int64)
    states = sample_state_sequences(params, init, length, rng)
    s0 = states - 1
    noise = rng.standard_normal(states.shape)
    samples = params.means[s0] + np.sqrt(params.variances)[s0] * noise
    return TraceSet(samples=samples, true_states=states)


def sample_hmm_trace(params: HmmParams, initial_state: int | None, length: int, rng) -> SignalTrace:
    """One simulated white-noise readout trace."""
    if initial_state is None:
        ts = sample_hmm_traces(params, None, length, rng, n_traces=1)
    else:
        ts = sample_hmm_traces(params, np.array([initial_state]), length, rng)
    return ts[0]


def sample_composed_traces(params: HmmParams, noise_specs, initial_states,
                           length: int, rng, n_traces: int | None = None) -> TraceSet:
    """Simulate readout traces with per-state stationary noise.

    ``noise_specs`` is a single NoiseSpec shared by all states or one per
    state. One independent noise trace per state per readout trace is
    drawn, then stitched along a sampled state path. For white specs this
    is statistically identical to ``sample_hmm_traces`` with variances set
    to the noise variance. The spec means are ignored here; state means
    come from the model.
    """
    rng = _rng_of(rng)
    m = params.num_states
    if isinstance(noise_specs, NoiseSpec):
        noise_specs = [noise_specs] * m
    if len(noise_specs) != m:
        raise ValueError("need one noise spec per state")
    if initial_states is None:
        if n_traces is None:
            raise ValueError("n_traces required when initial states are drawn")
        init = int(n_traces)
        n = n_traces
    else:
        init = np.asarray(initial_states, dtype=np.int64)
        n = init.size
    per_state = []
    for spec in noise_specs:
        zero_mean = NoiseSpec(kind=spec.kind, variance=spec.variance,
                              correlation_time=spec.correlation_time,
                              spectrum=spec.spectrum, mean=0.0)
        per_state.append(sample_correlated_traces(zero_mean, n, length, rng))
    states = sample_state_sequences(params, init, length, rng)
    return compose_traces(states, per_state, params.means)
