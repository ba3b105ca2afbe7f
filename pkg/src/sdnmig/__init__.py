"""Gradual IP-to-SDN migration planning and evaluation toolkit."""

from .topology import (
    CostModel,
    SndlibParseError,
    Topology,
    WeightedTopology,
    fixture,
    generate_ospf_weights,
    hop_diameter,
    migration_costs,
    parse_sndlib,
    random_connected_topology,
)
from .pathcat import (
    AltPath,
    PathCatalog,
    available_alt_paths,
    build_catalog,
    compute_key_nodes,
    enumerate_equal_hop_paths,
    marginal_gain,
)
from .scheduler import (
    BudgetLedger,
    InfeasibleScheduleError,
    MigrationSchedule,
    ScheduleConstraints,
    availability_curve,
    cumulative_objective,
    greedy_schedule,
    random_schedule,
    select_by_budget,
    select_by_count,
)
from .exact import (
    IlpInstance,
    OptimalResult,
    build_ilp,
    export_lp,
    optimal_schedule,
    search_space_size,
)
from .tesim import (
    CapacityReport,
    FlowAssignment,
    SimConfig,
    TrafficMatrix,
    generate_traffic,
    grow_traffic,
    provision,
    route_ospf,
    savings_series,
    te_assign,
    te_assign_exact,
)

__version__ = "0.1.0"
