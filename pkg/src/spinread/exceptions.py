"""Exception types raised by the inference and calibration routines."""

from __future__ import annotations


class SpinreadError(Exception):
    """Base class for all package-specific errors."""


class AllStatesImpossible(SpinreadError):
    """Every state's emission weight underflowed to zero at some time step.

    Signals a grossly mismatched model: no state can account for the
    observed sample even in log space.
    """

    def __init__(self, time_index: int, trace_index: int | None = None):
        self.time_index = time_index
        self.trace_index = trace_index
        where = f"t={time_index}"
        if trace_index is not None:
            where = f"trace {trace_index}, " + where
        super().__init__(f"all states have zero probability at {where}")


class EmptyStateOccupancy(SpinreadError):
    """A state accumulated zero posterior mass over the whole training set."""

    def __init__(self, state: int):
        self.state = state
        super().__init__(
            f"state {state} has zero total occupancy; it is unobservable "
            "under the current parameters"
        )


class ProfileDidNotConverge(SpinreadError):
    """Inner re-maximization of a profile likelihood failed to converge."""


class NonMonotoneProfile(SpinreadError):
    """Profile log-likelihood does not drop away from the maximum within the
    search range; the likelihood is flat in the probed direction."""


class ScaledProbabilityInvalid(SpinreadError):
    """Transition probability scaled by a filter block size reached >= 1."""
