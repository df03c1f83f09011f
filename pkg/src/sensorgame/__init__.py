"""Attacker/detector sensor placement games on leader-follower networks."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AssumptionError,
    GuardExceededError,
    InfeasiblePartitionError,
    InvariantError,
    NotATreeError,
    SensorGameError,
    SimulationError,
    SingularKernelError,
    TopologyError,
    UnsupportedPredictionError,
)
from .game import (  # noqa: F401
    ConstrainedPartition,
    EquilibriumReport,
    GameInstance,
    PlacementPair,
    compare_directed_undirected,
    enumerate_partitions,
    payoff,
    predict_ne_f1,
    pure_nash_all,
    saddle_check,
    stackelberg_bruteforce,
    stackelberg_tree,
)
from .platoon import (  # noqa: F401
    PlatoonScenario,
    leader_placement_sweep,
    platoon_game,
    platoon_ne_prediction,
)
from .simulator import (  # noqa: F401
    SimConfig,
    Trajectory,
    dc_gain_empirical,
    frequency_response,
    simulate_first_order,
    simulate_platoon,
)
from .spectral import (  # noqa: F401
    GroundedKernel,
    GroundedSystem,
    closed_form_directed,
    closed_form_undirected,
    factorization_check,
    grounded_system,
    invert_numeric,
    sigma_max,
    two_tree_count,
)
from .topology import (  # noqa: F401
    LeaderNetwork,
    LeaderRootedPath,
    PathToLeader,
    build_network,
    generate,
    is_leader_cut_vertex,
    leader_rooted_paths,
    path_to_leader,
    validate_tree,
)
