"""Exception types shared across the scheduling modules."""


class SchedulingError(Exception):
    """Base class for all scheduling failures."""


class InsufficientHarvestError(SchedulingError):
    """The bit target can never be met with the given harvest and on-time budget."""


class PolicyStructureError(SchedulingError):
    """A transmission policy is malformed (non-contiguous or otherwise invalid)."""


class NumericalFailureError(SchedulingError):
    """A scalar solve failed to bracket or converge."""


class InternalInvariantError(SchedulingError):
    """Solver state violated an invariant that should hold by construction."""


class OfflineRestrictionError(SchedulingError):
    """The offline solver only accepts a single receiver arrival at time zero."""
