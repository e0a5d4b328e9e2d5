"""spinread: simulation and inference for spin-qubit readout traces.

The package covers the full loop of a readout experiment on synthetic
data: generating charge-sensor signal traces (white or time-correlated
noise, two-state and three-state readout models, finite temperature),
inferring qubit states with an integrated- or peak-signal threshold and
with an exact hidden-Markov-model analysis, calibrating model parameters
by maximum likelihood with confidence intervals, and quantifying readout
fidelity with statistical error bars.
"""

from .exceptions import (
    AllStatesImpossible,
    EmptyStateOccupancy,
    NonMonotoneProfile,
    ProfileDidNotConverge,
    ScaledProbabilityInvalid,
    SpinreadError,
)
from .model import HmmParams, PosteriorTable, SignalTrace, TraceSet
from .hmm import (
    backward,
    decide_initial_state,
    decide_initial_states,
    emission_density,
    emission_log_density,
    forward,
    initial_state_posteriors,
    posteriors,
    posteriors_batch,
)

__version__ = "0.1.0"
