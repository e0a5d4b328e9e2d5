"""Core domain types: model parameters, signal traces, posterior tables.

States are labeled 1..M throughout the public API (state 1 is the
high-signal state in the two-state readout convention). Time runs in
integer steps; the physical sample interval is metadata only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

_PROB_TOL = 1e-12


def _as_float_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


@dataclass(frozen=True)
class HmmParams:
    """Hidden-Markov readout model: initial distribution, Gaussian emission
    parameters per state, and per-step transition matrix.

    Parameters
    ----------
    initial_probs : (M,) array
        Probability of each state at t=0. Must sum to one.
    means : (M,) array
        Emission mean of each state, in signal units.
    variances : (M,) array
        Emission variance of each state. Strictly positive.
    transitions : (M, M) array
        ``transitions[i, j]`` is the probability of moving from state i+1
        to state j+1 on one time step. Rows must sum to one. Exact zeros
        are preserved, never floored.
    state_labels : tuple of str, optional
        Human-readable names, e.g. ``("triplet", "singlet")``.
    """

    initial_probs: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    transitions: np.ndarray
    state_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pi = _as_float_vector(self.initial_probs, "initial_probs")
        mu = _as_float_vector(self.means, "means")
        var = _as_float_vector(self.variances, "variances")
        a = np.asarray(self.transitions, dtype=float)
        m = pi.size
        if m < 1:
            raise ValueError("need at least one state")
        if mu.size != m or var.size != m:
            raise ValueError("initial_probs, means, variances must have equal length")
        if a.shape != (m, m):
            raise ValueError(f"transitions must be {m}x{m}, got {a.shape}")
        if abs(pi.sum() - 1.0) > _PROB_TOL:
            raise ValueError(f"initial_probs sum to {pi.sum()!r}, expected 1")
        if np.any(pi < 0.0) or np.any(pi > 1.0):
            raise ValueError("initial_probs entries must lie in [0, 1]")
        rows = a.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > _PROB_TOL):
            raise ValueError(f"transition rows sum to {rows!r}, expected 1")
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise ValueError("transition entries must lie in [0, 1]")
        if np.any(var <= 0.0):
            raise ValueError("variances must be strictly positive")
        if self.state_labels is not None and len(self.state_labels) != m:
            raise ValueError("state_labels length must match number of states")
        for arr, nm in ((pi, "initial_probs"), (mu, "means"),
                        (var, "variances"), (a, "transitions")):
            arr.setflags(write=False)
            object.__setattr__(self, nm, arr)

    @property
    def num_states(self) -> int:
        return self.initial_probs.size

    def label(self, state: int) -> str:
        if self.state_labels is not None:
            return self.state_labels[state - 1]
        return f"state_{state}"

    def replace(self, **changes) -> "HmmParams":
        """Return a copy with the given fields replaced."""
        fields = dict(
            initial_probs=self.initial_probs,
            means=self.means,
            variances=self.variances,
            transitions=self.transitions,
            state_labels=self.state_labels,
        )
        fields.update(changes)
        return HmmParams(**fields)

    def to_dict(self) -> dict:
        d = {
            "initial_probs": [float(x) for x in self.initial_probs],
            "means": [float(x) for x in self.means],
            "variances": [float(x) for x in self.variances],
            "transitions": [[float(x) for x in row] for row in self.transitions],
        }
        if self.state_labels is not None:
            d["state_labels"] = list(self.state_labels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HmmParams":
        labels = d.get("state_labels")
        return cls(
            initial_probs=np.array(d["initial_probs"], dtype=float),
            means=np.array(d["means"], dtype=float),
            variances=np.array(d["variances"], dtype=float),
            transitions=np.array(d["transitions"], dtype=float),
            state_labels=tuple(labels) if labels is not None else None,
        )

    # --- scalar parameter addressing -----------------------------------
    # Names: pi_1..pi_M, mu_1..mu_M, sigma2_1..sigma2_M, A_11..A_MM.
    # Used by calibration constraints and confidence intervals.

    def free_parameter_names(self, frozen_fields: frozenset[str] = frozenset()) -> list[str]:
        """Names of independently estimated scalars.

        One pi entry and the transition-row diagonals are dependent (they
        complete a probability simplex) and are excluded.
        """
        m = self.num_states
        names: list[str] = []
        if "initial_probs" not in frozen_fields:
            names += [f"pi_{i}" for i in range(1, m)]
        if "means" not in frozen_fields:
            names += [f"mu_{i}" for i in range(1, m + 1)]
        if "variances" not in frozen_fields:
            names += [f"sigma2_{i}" for i in range(1, m + 1)]
        if "transitions" not in frozen_fields:
            names += [f"A_{i}{j}" for i in range(1, m + 1)
                      for j in range(1, m + 1) if i != j]
        return names

    def get_parameter(self, name: str) -> float:
        kind, idx = parse_parameter_name(name, self.num_states)
        if kind == "pi":
            return float(self.initial_probs[idx[0]])
        if kind == "mu":
            return float(self.means[idx[0]])
        if kind == "sigma2":
            return float(self.variances[idx[0]])
        return float(self.transitions[idx])

    def set_parameter(self, name: str, value: float) -> "HmmParams":
        """Return a copy with one scalar parameter set to ``value``.

        Probability parameters (pi entries, transition entries) keep their
        simplex valid: the remaining entries of the same distribution are
        rescaled to carry the leftover mass.
        """
        kind, idx = parse_parameter_name(name, self.num_states)
        if kind == "mu":
            mu = self.means.copy()
            mu[idx[0]] = value
            return self.replace(means=mu)
        if kind == "sigma2":
            if value <= 0.0:
                raise ValueError("variance must stay positive")
            var = self.variances.copy()
            var[idx[0]] = value
            return self.replace(variances=var)
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name}={value} outside [0, 1]")
        if kind == "pi":
            pi = self.initial_probs.copy()
            pi = _reassign_simplex(pi, idx[0], value)
            return self.replace(initial_probs=pi)
        a = self.transitions.copy()
        i, j = idx
        a[i] = _reassign_simplex(a[i], j, value)
        return self.replace(transitions=a)

    def parameter_domain(self, name: str) -> tuple[float, float]:
        """Valid closed range of one scalar parameter (open at 0 for variances)."""
        kind, _ = parse_parameter_name(name, self.num_states)
        if kind == "mu":
            return (-np.inf, np.inf)
        if kind == "sigma2":
            return (0.0, np.inf)
        return (0.0, 1.0)


def parse_parameter_name(name: str, num_states: int) -> tuple[str, tuple[int, ...]]:
    """Split a scalar-parameter name into (kind, zero-based indices)."""
    try:
        kind, suffix = name.split("_", 1)
    except ValueError:
        raise ValueError(f"malformed parameter name {name!r}") from None
    if kind == "A":
        if len(suffix) != 2 or not suffix.isdigit():
            raise ValueError(f"malformed transition name {name!r}")
        i, j = int(suffix[0]), int(suffix[1])
        if not (1 <= i <= num_states and 1 <= j <= num_states):
            raise ValueError(f"{name!r} outside 1..{num_states}")
        return "A", (i - 1, j - 1)
    if kind not in ("pi", "mu", "sigma2"):
        raise ValueError(f"unknown parameter kind in {name!r}")
    i = int(suffix)
    if not 1 <= i <= num_states:
        raise ValueError(f"{name!r} outside 1..{num_states}")
    return kind, (i - 1,)


def _reassign_simplex(row: np.ndarray, j: int, value: float) -> np.ndarray:
    """Set row[j]=value and rescale the other entries to sum to 1-value."""
    rest = 1.0 - row[j]
    out = row.copy()
    out[j] = value
    others = np.arange(row.size) != j
    if rest > 0.0:
        out[others] *= (1.0 - value) / rest
    else:
        # no mass to rescale: spread the leftover uniformly
        out[others] = (1.0 - value) / max(row.size - 1, 1)
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class SignalTrace:
    """One readout shot: a vector of digitized charge-sensor samples.

    ``true_states`` (1-based state indices) is ground truth available for
    simulated traces only. ``sample_interval`` is seconds per step,
    carried as metadata; all algorithms work in units of one time step.
    """

    samples: np.ndarray
    true_states: np.ndarray | None = None
    sample_interval: float | None = None

    def __post_init__(self):
        y = np.asarray(self.samples, dtype=float)
        if y.ndim != 1 or y.size < 1:
            raise ValueError("samples must be a non-empty vector")
        y.setflags(write=False)
        object.__setattr__(self, "samples", y)
        if self.true_states is not None:
            s = np.asarray(self.true_states, dtype=np.int64)
            if s.shape != y.shape:
                raise ValueError("true_states must have the same length as samples")
            if s.min() < 1:
                raise ValueError("state indices are 1-based")
            s.setflags(write=False)
            object.__setattr__(self, "true_states", s)

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class TraceSet:
    """A stack of N equal-length signal traces with optional ground truth.

    ``trace_ids`` globally identify traces so that disjoint train/test
    splits can be asserted. ``metadata`` records generation provenance
    (seed, noise description, ...).
    """

    samples: np.ndarray
    true_states: np.ndarray | None = None
    trace_ids: np.ndarray | None = None
    sample_interval: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        y = np.asarray(self.samples, dtype=float)
        if y.ndim != 2:
            raise ValueError("samples must be an (N, T) array")
        self.samples = y
        if self.true_states is not None:
            s = np.asarray(self.true_states, dtype=np.int64)
            if s.shape != y.shape:
                raise ValueError("true_states shape must match samples")
            self.true_states = s
        if self.trace_ids is None:
            self.trace_ids = np.arange(y.shape[0], dtype=np.int64)
        else:
            ids = np.asarray(self.trace_ids, dtype=np.int64)
            if ids.shape != (y.shape[0],):
                raise ValueError("trace_ids must have one entry per trace")
            self.trace_ids = ids

    @property
    def n_traces(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def initial_states(self) -> np.ndarray | None:
        if self.true_states is None:
            return None
        return self.true_states[:, 0]

    def __len__(self) -> int:
        return self.n_traces

    def __getitem__(self, i: int) -> SignalTrace:
        states = None if self.true_states is None else self.true_states[i]
        return SignalTrace(self.samples[i], states, self.sample_interval)

    def __iter__(self) -> Iterator[SignalTrace]:
        for i in range(self.n_traces):
            yield self[i]


@dataclass(frozen=True)
class PosteriorTable:
    """Per-time state posteriors for one trace, with the trace
    log-likelihood and the per-step normalizers of the scaled recursion."""

    posteriors: np.ndarray
    log_likelihood: float
    scaling: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.posteriors, dtype=float)
        c = np.asarray(self.scaling, dtype=float)
        if p.ndim != 2:
            raise ValueError("posteriors must be (T, M)")
        if c.shape != (p.shape[0],):
            raise ValueError("scaling must have one entry per time step")
        rows = p.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9):
            raise ValueError("posterior rows must sum to 1 within 1e-9")
        if p.min() < 0.0 or p.max() > 1.0 + 1e-12:
            raise ValueError("posterior entries must lie in [0, 1]")
        p.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "posteriors", p)
        object.__setattr__(self, "scaling", c)

    @property
    def length(self) -> int:
        return self.posteriors.shape[0]

    @property
    def num_states(self) -> int:
        return self.posteriors.shape[1]
