"""Exception hierarchy shared by all modules."""


class SensorGameError(Exception):
    """Base class for every error raised by the package."""


class TopologyError(SensorGameError, ValueError):
    """Malformed network: bad indices, self-loops, duplicate or anti-parallel edges."""


class NotATreeError(TopologyError):
    pass


class AssumptionError(TopologyError):
    """A directed follower is not reachable from the leader."""


class SingularKernelError(SensorGameError, ArithmeticError):
    pass


class InfeasiblePartitionError(SensorGameError, ValueError):
    pass


class GuardExceededError(SensorGameError):
    """A brute-force enumeration would exceed its evaluation budget."""


class UnsupportedPredictionError(SensorGameError, ValueError):
    pass


class SimulationError(SensorGameError):
    """Divergence or failure to settle within the horizon."""


class InvariantError(SensorGameError, AssertionError):
    """An internal consistency check failed."""
