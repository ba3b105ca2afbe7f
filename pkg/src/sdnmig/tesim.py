"""Hybrid OSPF/SDN traffic engineering over a migration horizon.

Each migration step grows every flow by a random factor, routes all
traffic on least-cost paths (the pre-SDN default), then lets a local
search move single flows onto available alternative paths whenever that
strictly shrinks the total capacity that must be provisioned. Links are
provisioned in discrete module sizes with a utilization headroom, so
savings come from flows dodging module-size boundaries.

Loads are Mbit/s; module granularities and capacity totals are Gbit/s.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import product

from .pathcat import PathCatalog, available_alt_paths
from .scheduler import MigrationSchedule
from .topology import Topology, WeightedTopology, link_key

Flow = tuple[str, str]


class EnumerationLimitError(ValueError):
    """Exhaustive assignment enumeration would exceed the stated limit."""


@dataclass(frozen=True)
class TrafficMatrix:
    """Demand in Mbit/s for every ordered pair of distinct nodes."""

    demand: dict[Flow, float]

    def __post_init__(self) -> None:
        for (src, dst), value in self.demand.items():
            if src == dst:
                raise ValueError(f"demand from {src!r} to itself")
            if value < 0:
                raise ValueError(f"negative demand on {(src, dst)}")


@dataclass(frozen=True)
class SimConfig:
    headroom: float = 0.7
    granularities: tuple[float, ...] = (1, 5, 10, 40, 100, 400, 1000)
    growth_low: float = 1.05
    growth_high: float = 1.3
    sweeps: int = 100

    def __post_init__(self) -> None:
        if not 0 < self.headroom <= 1:
            raise ValueError("headroom must lie in (0, 1]")
        if list(self.granularities) != sorted(self.granularities) or len(
            set(self.granularities)
        ) != len(self.granularities):
            raise ValueError("granularities must be strictly ascending")
        if self.granularities[0] <= 0:
            raise ValueError("granularities must be positive")
        if self.growth_low > self.growth_high:
            raise ValueError("growth interval is inverted")


@dataclass(frozen=True)
class FlowAssignment:
    """Chosen path id per ordered pair; defaults to the least-cost path."""

    choice: dict[Flow, int]


@dataclass(frozen=True)
class ProvisioningPlan:
    """Per-link (module size Gbit/s, module count); zero-load links absent."""

    modules: dict[tuple[str, str], tuple[float, int]]
    total_capacity: float


@dataclass(frozen=True)
class StepCapacity:
    step: int
    available_paths: int
    ospf_gbps: float
    te_gbps: float

    @property
    def savings_gbps(self) -> float:
        return self.ospf_gbps - self.te_gbps

    @property
    def savings_pct(self) -> float:
        if self.ospf_gbps == 0:
            return 0.0
        return 100.0 * self.savings_gbps / self.ospf_gbps


@dataclass(frozen=True)
class CapacityReport:
    rows: tuple[StepCapacity, ...]


def generate_traffic(topo: Topology, seed: int) -> TrafficMatrix:
    """One uniform [0, 400] Mbit/s demand per ordered node pair."""
    rng = random.Random(seed)
    ordered = topo.sorted_nodes()
    demand = {
        (src, dst): rng.uniform(0.0, 400.0)
        for src in ordered
        for dst in ordered
        if src != dst
    }
    return TrafficMatrix(demand=demand)


def grow_traffic(tm: TrafficMatrix, cfg: SimConfig, seed: int) -> TrafficMatrix:
    """Scale each flow by an independent uniform draw from the growth interval."""
    rng = random.Random(seed)
    demand = {
        flow: tm.demand[flow] * rng.uniform(cfg.growth_low, cfg.growth_high)
        for flow in sorted(tm.demand)
    }
    return TrafficMatrix(demand=demand)


def _loads_for(
    catalog: PathCatalog, choice: dict[Flow, int], tm: TrafficMatrix
) -> dict[tuple[str, str], float]:
    loads: dict[tuple[str, str], float] = {}
    for flow in sorted(tm.demand):
        demand = tm.demand[flow]
        if demand == 0:
            continue
        nodes = catalog.oriented_nodes(choice[flow], flow[0])
        for a, b in zip(nodes, nodes[1:]):
            key = link_key(a, b)
            loads[key] = loads.get(key, 0.0) + demand
    return loads


def route_ospf(
    catalog: PathCatalog, tm: TrafficMatrix
) -> dict[tuple[str, str], float]:
    """Per-link Mbit/s load with every flow on its pair's least-cost path."""
    choice = {flow: catalog.least_cost_id(*flow) for flow in tm.demand}
    return _loads_for(catalog, choice, tm)


def provision(
    loads: dict[tuple[str, str], float], cfg: SimConfig
) -> ProvisioningPlan:
    """Smallest module (or count of largest modules) holding each link's load."""
    modules: dict[tuple[str, str], tuple[float, int]] = {}
    total = 0.0
    for link in sorted(loads):
        load = loads[link]
        if load < 0:
            raise ValueError(f"negative load {load} on link {link}")
        if load == 0:
            continue
        placed = None
        for size in cfg.granularities:
            if load <= cfg.headroom * size * 1000.0:
                placed = (size, 1)
                break
        if placed is None:
            largest = cfg.granularities[-1]
            count = math.ceil(load / (cfg.headroom * largest * 1000.0))
            placed = (largest, count)
        modules[link] = placed
        total += placed[0] * placed[1]
    return ProvisioningPlan(modules=modules, total_capacity=total)


def _candidates(
    catalog: PathCatalog, flow: Flow, available: set[int]
) -> list[int]:
    ids = catalog.pair_paths[catalog.pair_of(*flow)]
    return [ids[0]] + [pid for pid in ids[1:] if pid in available]


def te_assign(
    catalog: PathCatalog,
    available: set[int],
    tm: TrafficMatrix,
    cfg: SimConfig,
) -> FlowAssignment:
    """Local search from the all-OSPF assignment, never worse than its seed.

    Flows are visited in descending demand order; a move to another
    candidate path is kept only when the total provisioned capacity
    strictly drops, so the result never exceeds the OSPF total.
    """
    choice = {flow: catalog.least_cost_id(*flow) for flow in tm.demand}
    loads = _loads_for(catalog, choice, tm)
    total = provision(loads, cfg).total_capacity

    flows = sorted(tm.demand, key=lambda f: (-tm.demand[f], f))

    def apply(flow: Flow, pid: int, sign: float) -> None:
        nodes = catalog.oriented_nodes(pid, flow[0])
        delta = sign * tm.demand[flow]
        for a, b in zip(nodes, nodes[1:]):
            key = link_key(a, b)
            new = loads.get(key, 0.0) + delta
            # moves are applied and reverted incrementally; clamp the
            # cancellation residue so emptied links never hold a phantom
            # epsilon (or trip the negative-load check)
            loads[key] = 0.0 if abs(new) < 1e-6 else new

    for _ in range(cfg.sweeps):
        changed = False
        for flow in flows:
            if tm.demand[flow] == 0:
                continue
            options = _candidates(catalog, flow, available)
            if len(options) < 2:
                continue
            current = choice[flow]
            for pid in options:
                if pid == current:
                    continue
                apply(flow, current, -1.0)
                apply(flow, pid, +1.0)
                candidate_total = provision(loads, cfg).total_capacity
                if candidate_total < total:
                    total = candidate_total
                    choice[flow] = pid
                    changed = True
                    break
                apply(flow, pid, -1.0)
                apply(flow, current, +1.0)
        if not changed:
            break
    return FlowAssignment(choice=choice)


def te_assign_exact(
    catalog: PathCatalog,
    available: set[int],
    tm: TrafficMatrix,
    cfg: SimConfig,
    limit: int = 200_000,
) -> FlowAssignment:
    """Globally capacity-minimal single-path assignment by full enumeration."""
    movable: list[tuple[Flow, list[int]]] = []
    choice = {flow: catalog.least_cost_id(*flow) for flow in tm.demand}
    combos = 1
    for flow in sorted(tm.demand):
        if tm.demand[flow] == 0:
            continue
        options = _candidates(catalog, flow, available)
        if len(options) > 1:
            movable.append((flow, options))
            combos *= len(options)
            if combos > limit:
                raise EnumerationLimitError(
                    f"{combos}+ assignment combinations exceed limit {limit}"
                )
    best_choice = dict(choice)
    best_total = provision(_loads_for(catalog, choice, tm), cfg).total_capacity
    for combo in product(*(options for _, options in movable)):
        trial = dict(choice)
        for (flow, _), pid in zip(movable, combo):
            trial[flow] = pid
        total = provision(_loads_for(catalog, trial, tm), cfg).total_capacity
        if total < best_total:
            best_total = total
            best_choice = trial
    return FlowAssignment(choice=best_choice)


def assignment_loads(
    catalog: PathCatalog, assignment: FlowAssignment, tm: TrafficMatrix
) -> dict[tuple[str, str], float]:
    return _loads_for(catalog, assignment.choice, tm)


def savings_series(
    wtopo: WeightedTopology,
    catalog: PathCatalog,
    schedule: MigrationSchedule,
    cfg: SimConfig,
    seed: int,
    initial_traffic: TrafficMatrix | None = None,
) -> CapacityReport:
    """Per-step OSPF vs TE provisioned capacity over the whole horizon.

    Traffic starts from ``seed`` (or the given matrix), grows once per
    step, and TE runs over the paths unlocked by the migrations so far.
    """
    tm = initial_traffic if initial_traffic is not None else generate_traffic(
        wtopo.base, seed
    )
    migrated: set[str] = set()
    rows = []
    for t, step in enumerate(schedule.steps, start=1):
        tm = grow_traffic(tm, cfg, seed + t)
        migrated |= step
        available = available_alt_paths(catalog, migrated)
        ospf_total = provision(route_ospf(catalog, tm), cfg).total_capacity
        assignment = te_assign(catalog, available, tm, cfg)
        te_total = provision(
            assignment_loads(catalog, assignment, tm), cfg
        ).total_capacity
        rows.append(
            StepCapacity(
                step=t,
                available_paths=len(available),
                ospf_gbps=ospf_total,
                te_gbps=te_total,
            )
        )
    return CapacityReport(rows=tuple(rows))


def report_rows(report: CapacityReport) -> list[dict]:
    """CSV/JSON-ready rows including derived savings columns."""
    return [
        {
            "step": row.step,
            "available_paths": row.available_paths,
            "ospf_gbps": row.ospf_gbps,
            "te_gbps": row.te_gbps,
            "savings_gbps": row.savings_gbps,
            "savings_pct": row.savings_pct,
        }
        for row in report.rows
    ]
