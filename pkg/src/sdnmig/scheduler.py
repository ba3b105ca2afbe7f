"""Step-by-step migration scheduling.

The greedy driver fixes per-node path gains at the start of every
time-step and hands selection to the count rule (top-m by gain) or the
budget rule (descending gain/cost ratio, stop at the first unaffordable
node, unspent CapEx carries over). A seeded random baseline packs a
shuffled node order under the same constraints.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .pathcat import PathCatalog, available_alt_paths
from .topology import CostModel

GainVector = dict[str, int]
PriorityMap = dict[int, float]

# Affordability slack: cumulative C/T sums drift by a few ulps, and the
# final step must always cover exactly the remaining node costs.
_EPS = 1e-9


class InfeasibleScheduleError(ValueError):
    """Constraints cannot place every node within the horizon."""


@dataclass(frozen=True)
class ScheduleConstraints:
    """Horizon of T steps, limited per step by node count or by CapEx."""

    mode: str
    T: int
    m: int | None = None
    cost_model: CostModel | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("count", "budget"):
            raise ValueError(f"mode must be 'count' or 'budget', got {self.mode!r}")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.mode == "count" and self.m is not None and self.m < 1:
            raise ValueError("m must be at least 1")
        if self.mode == "budget" and self.cost_model is None:
            raise ValueError("budget mode requires a cost model")

    @classmethod
    def count(cls, T: int, m: int | None = None) -> ScheduleConstraints:
        return cls(mode="count", T=T, m=m)

    @classmethod
    def budget(cls, T: int, cost_model: CostModel) -> ScheduleConstraints:
        return cls(mode="budget", T=T, cost_model=cost_model)

    def nodes_per_step(self, n_nodes: int) -> int:
        """Count-mode step size; defaults to ceil(N/T)."""
        return self.m if self.m is not None else math.ceil(n_nodes / self.T)

    @property
    def per_step_budget(self) -> float:
        return self.cost_model.total / self.T


@dataclass(frozen=True)
class BudgetLedger:
    """CapEx state at step ``step``: available = step*(C/T) - spent."""

    step: int
    available: float
    spent: float = 0.0

    def carry_forward(self, per_step_budget: float) -> BudgetLedger:
        return BudgetLedger(
            step=self.step + 1,
            available=self.available + per_step_budget,
            spent=self.spent,
        )


@dataclass(frozen=True)
class MigrationSchedule:
    """Ordered partition of the node set into T migration steps."""

    steps: tuple[frozenset[str], ...]
    policy: str
    seed: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for step in self.steps:
            if step & seen:
                raise ValueError(f"nodes re-migrated: {sorted(step & seen)}")
            seen |= step

    @property
    def T(self) -> int:
        return len(self.steps)

    def migrated_by(self, t: int) -> set[str]:
        """Union of the first ``t`` steps (1-based; t=0 is the empty set)."""
        out: set[str] = set()
        for step in self.steps[:t]:
            out |= step
        return out

    def all_nodes(self) -> set[str]:
        return self.migrated_by(self.T)


def select_by_count(
    gains: GainVector, m: int, tiebreak: list[str] | None = None
) -> set[str]:
    """The m highest-gain nodes; ties fall back to the given node order."""
    order = tiebreak if tiebreak is not None else sorted(gains)
    rank = {n: i for i, n in enumerate(order)}
    ranked = sorted(gains, key=lambda n: (-gains[n], rank[n]))
    return set(ranked[:m])


def select_by_budget(
    gains: GainVector, costs: CostModel, ledger: BudgetLedger
) -> tuple[set[str], BudgetLedger]:
    """Take nodes by descending gain-per-cost until one is unaffordable.

    Traversal stops at the first node whose cost exceeds the remaining
    CapEx (it does not skip ahead); the leftover carries to the next step.
    """
    ranked = sorted(
        gains, key=lambda n: (-gains[n] / costs.cost[n], costs.cost[n], n)
    )
    selected: set[str] = set()
    available = ledger.available
    spent = ledger.spent
    for node in ranked:
        c = costs.cost[node]
        if c > available + _EPS:
            break
        selected.add(node)
        available -= c
        spent += c
    return selected, BudgetLedger(step=ledger.step, available=available, spent=spent)


def greedy_schedule(
    catalog: PathCatalog, constraints: ScheduleConstraints
) -> MigrationSchedule:
    """Greedy schedule: gains are fixed at each step's start, then selected."""
    nodes = catalog.nodes
    T = constraints.T
    if constraints.mode == "count":
        m = constraints.nodes_per_step(len(nodes))
        if m * T < len(nodes):
            raise InfeasibleScheduleError(
                f"{m} nodes over {T} steps cannot cover {len(nodes)} nodes"
            )
        params: dict = {"m": m}
    else:
        params = {"per_step_budget": constraints.per_step_budget}

    migrated: set[str] = set()
    steps: list[frozenset[str]] = []
    ledger = BudgetLedger(step=0, available=0.0)
    spend_trace: list[tuple[float, float]] = []

    # Incremental gain bookkeeping: a path contributes +1 to a node while
    # that node is its single unmigrated key, so gains only change when a
    # migration drops a path's unmigrated-key count to one (amortized
    # O(total key count) over the whole schedule instead of a full
    # alternative-path rescan per step).
    missing = dict(catalog.initial_missing)
    gains = dict(catalog.initial_gains)
    key_index = catalog.key_index
    paths = catalog.paths

    for _ in range(T):
        if constraints.mode == "count":
            chosen = select_by_count(gains, constraints.nodes_per_step(len(nodes)))
        else:
            ledger = ledger.carry_forward(constraints.per_step_budget)
            before = ledger.spent
            chosen, ledger = select_by_budget(gains, constraints.cost_model, ledger)
            spend_trace.append((ledger.spent - before, ledger.available))
        steps.append(frozenset(chosen))
        for node in chosen:
            migrated.add(node)
            gains.pop(node)
            for pid in key_index.get(node, ()):
                left = missing[pid] - 1
                missing[pid] = left
                if left == 1:
                    for k in paths[pid].key_nodes:
                        if k not in migrated:
                            gains[k] += 1
                            break

    if migrated != nodes:
        raise InfeasibleScheduleError(
            f"schedule incomplete: {sorted(nodes - migrated)} never migrated"
        )
    if spend_trace:
        params["spend_trace"] = spend_trace
    return MigrationSchedule(steps=tuple(steps), policy="greedy", params=params)


def random_schedule(
    nodes: set[str], constraints: ScheduleConstraints, seed: int
) -> MigrationSchedule:
    """Uniformly shuffled order packed into steps under the same limits."""
    order = sorted(nodes)
    rng = random.Random(seed)
    rng.shuffle(order)
    T = constraints.T
    steps: list[frozenset[str]] = []
    spend_trace: list[tuple[float, float]] = []

    if constraints.mode == "count":
        m = constraints.nodes_per_step(len(nodes))
        if m * T < len(nodes):
            raise InfeasibleScheduleError(
                f"{m} nodes over {T} steps cannot cover {len(nodes)} nodes"
            )
        for t in range(T):
            steps.append(frozenset(order[t * m : (t + 1) * m]))
        params: dict = {"m": m}
    else:
        costs = constraints.cost_model
        available = 0.0
        queue = list(order)
        for _ in range(T):
            available += constraints.per_step_budget
            taken: list[str] = []
            spent_here = 0.0
            while queue and costs.cost[queue[0]] <= available + _EPS:
                node = queue.pop(0)
                available -= costs.cost[node]
                spent_here += costs.cost[node]
                taken.append(node)
            steps.append(frozenset(taken))
            spend_trace.append((spent_here, available))
        if queue:
            raise InfeasibleScheduleError(
                f"schedule incomplete: {queue} never migrated"
            )
        params = {
            "per_step_budget": constraints.per_step_budget,
            "spend_trace": spend_trace,
        }

    return MigrationSchedule(
        steps=tuple(steps), policy="random", seed=seed, params=params
    )


def availability_curve(
    catalog: PathCatalog, schedule: MigrationSchedule
) -> list[int]:
    """Available alternative paths after each step (non-decreasing)."""
    curve = []
    migrated: set[str] = set()
    for step in schedule.steps:
        migrated |= step
        curve.append(len(available_alt_paths(catalog, migrated)))
    return curve


def cumulative_objective(
    catalog: PathCatalog,
    schedule: MigrationSchedule,
    priorities: PriorityMap | None = None,
) -> float:
    """Priority-weighted path availability summed over all steps."""
    total = 0.0
    migrated: set[str] = set()
    for step in schedule.steps:
        migrated |= step
        for pid in available_alt_paths(catalog, migrated):
            total += priorities.get(pid, 1.0) if priorities else 1.0
    return total


def schedule_report(
    catalog: PathCatalog,
    schedule: MigrationSchedule,
    constraints: ScheduleConstraints | None = None,
    priorities: PriorityMap | None = None,
) -> dict:
    """JSON-ready schedule dump with the per-step availability and spend."""
    curve = availability_curve(catalog, schedule)
    rows = []
    objective_to_date = 0.0
    migrated: set[str] = set()
    spent = 0.0
    budget_mode = constraints is not None and constraints.mode == "budget"
    for t, step in enumerate(schedule.steps, start=1):
        migrated |= step
        for pid in available_alt_paths(catalog, migrated):
            objective_to_date += priorities.get(pid, 1.0) if priorities else 1.0
        row = {
            "step": t,
            "migrated": sorted(step),
            "cumulative_available": curve[t - 1],
            "objective_to_date": objective_to_date,
        }
        if budget_mode:
            step_cost = sum(constraints.cost_model.cost[n] for n in step)
            spent += step_cost
            row["spent"] = step_cost
            row["residual"] = t * constraints.per_step_budget - spent
        rows.append(row)
    return {
        "policy": schedule.policy,
        "seed": schedule.seed,
        "T": schedule.T,
        "mode": constraints.mode if constraints else None,
        "steps": [sorted(s) for s in schedule.steps],
        "objective": cumulative_objective(catalog, schedule, priorities),
        "availability_curve": curve,
        "per_step": rows,
    }
