"""Exact optimal migration scheduling and its integer-program view.

The optimum is found by depth-first branch and bound over complete
schedules, with three reductions that keep desk-scale instances fast:

* only nodes that appear in some key set influence availability, so
  branching is restricted to those; the remaining nodes fill leftover
  capacity (count mode) or move in the final step (budget mode),
* states reaching the same migrated key set at the same step are merged,
  keeping the best prefix objective,
* the admissible bound assumes every path still locked becomes available
  from the next step onward.

``export_lp`` writes the equivalent binary program in LP text format for
external solvers; ``search_space_size`` gives the number of schedules the
fixed-step-size search space contains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .pathcat import PathCatalog
from .scheduler import (
    InfeasibleScheduleError,
    MigrationSchedule,
    PriorityMap,
    ScheduleConstraints,
    cumulative_objective,
    greedy_schedule,
)

_EPS = 1e-9


@dataclass(frozen=True)
class IlpInstance:
    """Binary program: mu[n,t] node-migrated-by-t, pi[p,t] path-available-at-t."""

    nodes: tuple[str, ...]
    T: int
    alt_paths: tuple[tuple[int, frozenset[str]], ...]
    phi: dict[int, float]
    mode: str
    count_limit: int | None = None
    node_costs: dict[str, float] | None = None
    per_step_budget: float | None = None

    @property
    def variable_count(self) -> int:
        return (len(self.nodes) + len(self.alt_paths)) * self.T

    @property
    def constraint_count(self) -> int:
        return (
            len(self.alt_paths) * self.T
            + self.T
            + len(self.nodes) * (self.T - 1)
        )


@dataclass(frozen=True)
class OptimalResult:
    schedule: MigrationSchedule
    objective: float
    proved: bool
    explored: int


def build_ilp(
    catalog: PathCatalog,
    constraints: ScheduleConstraints,
    priorities: PriorityMap | None = None,
) -> IlpInstance:
    """Encode the catalog and constraints as the scheduling binary program."""
    nodes = tuple(sorted(catalog.nodes))
    alt = tuple(
        (pid, catalog.paths[pid].key_nodes) for pid in sorted(catalog.alt_ids)
    )
    phi = {
        pid: (priorities.get(pid, 1.0) if priorities else 1.0) for pid, _ in alt
    }
    if constraints.mode == "count":
        return IlpInstance(
            nodes=nodes,
            T=constraints.T,
            alt_paths=alt,
            phi=phi,
            mode="count",
            count_limit=constraints.nodes_per_step(len(nodes)),
        )
    return IlpInstance(
        nodes=nodes,
        T=constraints.T,
        alt_paths=alt,
        phi=phi,
        mode="budget",
        node_costs=dict(constraints.cost_model.cost),
        per_step_budget=constraints.per_step_budget,
    )


def _fmt(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _term(coeff: float, name: str, leading: bool) -> str:
    sign = "" if leading else ("+ " if coeff >= 0 else "- ")
    if leading and coeff < 0:
        sign = "-"
    mag = abs(coeff)
    body = name if mag == 1 else f"{_fmt(mag)} {name}"
    return f"{sign}{body}"


def export_lp(instance: IlpInstance) -> str:
    """Render the instance in LP text format, byte-stable for equal inputs."""
    lines = ["Maximize"]
    obj_terms: list[str] = []
    first = True
    for pid, _ in instance.alt_paths:
        for t in range(1, instance.T + 1):
            obj_terms.append(_term(instance.phi[pid], f"pi_{pid}_{t}", first))
            first = False
    lines.append(" obj: " + (" ".join(obj_terms) if obj_terms else "0"))
    lines.append("Subject To")

    for pid, keys in instance.alt_paths:
        alpha = len(keys)
        for t in range(1, instance.T + 1):
            terms = [_term(alpha, f"pi_{pid}_{t}", True)]
            terms += [_term(-1, f"mu_{n}_{t}", False) for n in sorted(keys)]
            lines.append(f" avail_{pid}_{t}: " + " ".join(terms) + " <= 0")

    for t in range(1, instance.T + 1):
        if instance.mode == "count":
            terms = [
                _term(1, f"mu_{n}_{t}", i == 0) for i, n in enumerate(instance.nodes)
            ]
            rhs = t * instance.count_limit
        else:
            terms = [
                _term(instance.node_costs[n], f"mu_{n}_{t}", i == 0)
                for i, n in enumerate(instance.nodes)
            ]
            rhs = t * instance.per_step_budget
        lines.append(f" budget_{t}: " + " ".join(terms) + f" <= {_fmt(rhs)}")

    for n in instance.nodes:
        for t in range(1, instance.T):
            lines.append(f" mono_{n}_{t}: mu_{n}_{t} - mu_{n}_{t + 1} <= 0")

    lines.append("Binary")
    for n in instance.nodes:
        for t in range(1, instance.T + 1):
            lines.append(f" mu_{n}_{t}")
    for pid, _ in instance.alt_paths:
        for t in range(1, instance.T + 1):
            lines.append(f" pi_{pid}_{t}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def evaluate_schedule(instance: IlpInstance, schedule: MigrationSchedule) -> dict:
    """Decode a schedule into the binary variables and check every constraint.

    pi is set to its maximizing value (1 exactly when all key nodes are in),
    so the returned objective matches the cumulative objective definition.
    """
    if schedule.T != instance.T:
        raise ValueError("schedule horizon differs from instance horizon")
    violations: list[str] = []
    objective = 0.0
    migrated: set[str] = set()
    spent = 0.0
    for t, step in enumerate(schedule.steps, start=1):
        migrated |= step
        if instance.mode == "count":
            if len(migrated) > t * instance.count_limit:
                violations.append(f"count bound exceeded at step {t}")
        else:
            spent += sum(instance.node_costs[n] for n in step)
            if spent > t * instance.per_step_budget + _EPS:
                violations.append(f"budget bound exceeded at step {t}")
        for pid, keys in instance.alt_paths:
            if keys <= migrated:
                objective += instance.phi[pid]
    return {
        "feasible": not violations,
        "objective": objective,
        "violations": violations,
    }


def search_space_size(N: int, T: int) -> int:
    """Number of schedules when all steps but the last hold ceil(N/T) nodes."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if T == 1:
        return 1
    m = math.ceil(N / T)
    if N - (T - 1) * m < 0:
        raise InfeasibleScheduleError(
            f"ceil({N}/{T}) nodes in each of {T - 1} steps exceeds {N} nodes"
        )
    size = 1
    remaining = N
    for _ in range(T - 1):
        size *= math.comb(remaining, m)
        remaining -= m
    return size


def optimal_schedule(
    catalog: PathCatalog,
    constraints: ScheduleConstraints,
    priorities: PriorityMap | None = None,
    node_limit: int = 2_000_000,
) -> OptimalResult:
    """Highest-objective complete schedule via branch and bound.

    The search starts from the greedy schedule as incumbent, so even an
    aborted run (explored states past ``node_limit``, proved=False) reports
    at least the greedy objective. Deterministic for fixed inputs.
    """
    nodes = sorted(catalog.nodes)
    T = constraints.T
    phi = {
        pid: (priorities.get(pid, 1.0) if priorities else 1.0)
        for pid in catalog.alt_ids
    }
    paths = [(phi[pid], catalog.paths[pid].key_nodes) for pid in sorted(phi)]
    phi_total = sum(phi.values())

    key_nodes = sorted({n for _, keys in paths for n in keys})
    non_keys = sorted(set(nodes) - set(key_nodes))

    incumbent = greedy_schedule(catalog, constraints)
    best_obj = cumulative_objective(catalog, incumbent, priorities)
    best_steps: list[frozenset[str]] = list(incumbent.steps)

    weight_cache: dict[frozenset[str], float] = {}

    def weighted_available(keyset: frozenset[str]) -> float:
        cached = weight_cache.get(keyset)
        if cached is None:
            cached = sum(w for w, keys in paths if keys <= keyset)
            weight_cache[keyset] = cached
        return cached

    explored = 0
    overflowed = False
    memo: dict[tuple[int, frozenset[str]], float] = {}

    if constraints.mode == "count":
        m = constraints.nodes_per_step(len(nodes))
        if m * T < len(nodes):
            raise InfeasibleScheduleError(
                f"{m} nodes over {T} steps cannot cover {len(nodes)} nodes"
            )
        sizes = []
        remaining = len(nodes)
        for _ in range(T):
            sizes.append(min(m, remaining))
            remaining -= sizes[-1]

        def descend_count(
            t: int,
            keyset: frozenset[str],
            rem_keys: list[str],
            nonkey_used: int,
            obj: float,
            prefix: list[frozenset[str]],
        ) -> None:
            nonlocal explored, best_obj, best_steps, overflowed
            if overflowed:
                return
            explored += 1
            if explored > node_limit:
                overflowed = True
                return
            if obj + (T - t) * phi_total <= best_obj:
                return
            seen = memo.get((t, keyset))
            if seen is not None and seen >= obj:
                return
            memo[(t, keyset)] = obj
            if t == T - 1:
                final = obj + phi_total
                if final > best_obj:
                    rest = (set(nodes) - set().union(*prefix)) if prefix else set(nodes)
                    best_obj = final
                    best_steps = prefix + [frozenset(rest)]
                return
            size = sizes[t]
            nonkey_left = len(non_keys) - nonkey_used
            k_min = max(0, size - nonkey_left)
            k_max = min(size, len(rem_keys))
            for k in range(k_max, k_min - 1, -1):
                fill = size - k
                fills = non_keys[nonkey_used : nonkey_used + fill]
                for combo in combinations(rem_keys, k):
                    new_keyset = keyset | frozenset(combo)
                    step = frozenset(combo) | frozenset(fills)
                    descend_count(
                        t + 1,
                        new_keyset,
                        [n for n in rem_keys if n not in combo],
                        nonkey_used + fill,
                        obj + weighted_available(new_keyset),
                        prefix + [step],
                    )
                    if overflowed:
                        return

        if T == 1:
            explored = 1
            best_obj = phi_total
            best_steps = [frozenset(nodes)]
        else:
            descend_count(0, frozenset(), key_nodes, 0, 0.0, [])

    else:
        costs = constraints.cost_model.cost
        per_step = constraints.per_step_budget

        def descend_budget(
            t: int,
            keyset: frozenset[str],
            rem_keys: list[str],
            spent: float,
            obj: float,
            prefix: list[frozenset[str]],
        ) -> None:
            nonlocal explored, best_obj, best_steps, overflowed
            if overflowed:
                return
            explored += 1
            if explored > node_limit:
                overflowed = True
                return
            if obj + (T - t) * phi_total <= best_obj:
                return
            seen = memo.get((t, keyset))
            if seen is not None and seen >= obj:
                return
            memo[(t, keyset)] = obj
            if t == T - 1:
                final = obj + phi_total
                if final > best_obj:
                    rest = (set(nodes) - set().union(*prefix)) if prefix else set(nodes)
                    best_obj = final
                    best_steps = prefix + [frozenset(rest)]
                return
            budget = (t + 1) * per_step - spent

            def choose(idx: int, subset: list[str], left: float) -> None:
                if overflowed:
                    return
                if idx == len(rem_keys):
                    new_keyset = keyset | frozenset(subset)
                    descend_budget(
                        t + 1,
                        new_keyset,
                        [n for n in rem_keys if n not in subset],
                        spent + (budget - left),
                        obj + weighted_available(new_keyset),
                        prefix + [frozenset(subset)],
                    )
                    return
                node = rem_keys[idx]
                if costs[node] <= left + _EPS:
                    subset.append(node)
                    choose(idx + 1, subset, left - costs[node])
                    subset.pop()
                choose(idx + 1, subset, left)

            choose(0, [], budget)

        if T == 1:
            explored = 1
            best_obj = phi_total
            best_steps = [frozenset(nodes)]
        else:
            descend_budget(0, frozenset(), key_nodes, 0.0, 0.0, [])

    schedule = MigrationSchedule(
        steps=tuple(best_steps),
        policy="optimal",
        params={"proved": not overflowed},
    )
    return OptimalResult(
        schedule=schedule,
        objective=best_obj,
        proved=not overflowed,
        explored=explored,
    )
