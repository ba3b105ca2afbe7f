"""Shared fixtures and independent oracle implementations.

The oracles deliberately avoid the library's own data paths: simple-path
enumeration is a plain DFS, availability is recomputed from raw node
sequences per query, and schedule optima come from full enumeration.
"""

from __future__ import annotations

import heapq
import math
import random
from itertools import combinations

import pytest

from sdnmig import pathcat, topology


@pytest.fixture(scope="session")
def fig2():
    return topology.fixture("fig2")


@pytest.fixture(scope="session")
def fig2_catalog(fig2):
    return pathcat.build_catalog(fig2)


@pytest.fixture(scope="session")
def fig2_costs(fig2):
    return topology.migration_costs(fig2.base, 1.0)


def random_instance(seed: int, n_nodes: int, extra_density: float = 0.6):
    """Seeded random connected weighted topology plus its catalog."""
    rng = random.Random(seed)
    max_links = n_nodes * (n_nodes - 1) // 2
    n_links = min(
        max_links, n_nodes - 1 + rng.randint(1, max(1, int(extra_density * n_nodes)))
    )
    topo = topology.random_connected_topology(n_nodes, n_links, seed)
    wtopo = topology.generate_ospf_weights(topo, seed + 1)
    return wtopo, pathcat.build_catalog(wtopo)


# ---------------------------------------------------------------------------
# Graph oracles
# ---------------------------------------------------------------------------

def oracle_bfs_dist(adjacency, src, dst):
    frontier = {src}
    seen = {src}
    hops = 0
    while frontier:
        if dst in frontier:
            return hops
        frontier = {
            nbr for node in frontier for nbr in adjacency[node] if nbr not in seen
        }
        seen |= frontier
        hops += 1
    raise AssertionError("disconnected")


def oracle_simple_paths(adjacency, src, dst, max_hops):
    """Every simple path with at most max_hops hops, by exhaustive DFS."""
    out = []

    def walk(path):
        here = path[-1]
        if here == dst:
            out.append(tuple(path))
            return
        if len(path) - 1 >= max_hops:
            return
        for nbr in sorted(adjacency[here]):
            if nbr not in path:
                path.append(nbr)
                walk(path)
                path.pop()

    walk([src])
    return out


def oracle_dijkstra_path(wtopo, src, dst):
    """Min-weight path via heap Dijkstra; returns (cost, node tuple)."""
    best = {src: (0.0, (src,))}
    heap = [(0.0, src, (src,))]
    done = set()
    while heap:
        cost, node, path = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == dst:
            return cost, path
        for nbr in wtopo.base.adjacency[node]:
            c = cost + wtopo.link_weight(node, nbr)
            if nbr not in best or c < best[nbr][0]:
                best[nbr] = (c, path + (nbr,))
                heapq.heappush(heap, (c, nbr, path + (nbr,)))
    raise AssertionError("disconnected")


def oracle_available_paths(catalog, migrated):
    """Recompute key nodes from raw per-pair node sequences, then filter.

    Works from the stored path node sequences only (not the catalog's
    precomputed key sets): for each non-least path, the fork node against
    every earlier path is the last node of their common prefix.
    """
    available = set()
    for _, ids in catalog.pair_paths.items():
        sequences = [catalog.paths[pid].nodes for pid in ids]
        for rank, pid in enumerate(ids):
            if rank == 0:
                continue
            keys = set()
            for earlier in sequences[:rank]:
                mine = sequences[rank]
                i = 0
                while i < len(mine) and i < len(earlier) and mine[i] == earlier[i]:
                    i += 1
                keys.add(mine[i - 1])
            if keys <= set(migrated):
                available.add(pid)
    return available


# ---------------------------------------------------------------------------
# Schedule oracles
# ---------------------------------------------------------------------------

def oracle_objective(catalog, steps, phi=None):
    """Cumulative objective computed directly from alt-path key sets."""
    alt = [
        (catalog.paths[pid].key_nodes, (phi or {}).get(pid, 1.0))
        for pid in catalog.alt_ids
    ]
    total = 0.0
    migrated = set()
    for step in steps:
        migrated |= set(step)
        total += sum(w for keys, w in alt if keys <= migrated)
    return total


def enumerate_count_schedules(nodes, T, m):
    """All ordered partitions with min(m, remaining) nodes per step."""
    nodes = sorted(nodes)

    def rec(remaining, t):
        if t == T:
            if not remaining:
                yield []
            return
        size = min(m, len(remaining))
        for combo in combinations(remaining, size):
            rest = [n for n in remaining if n not in combo]
            for tail in rec(rest, t + 1):
                yield [frozenset(combo)] + tail

    yield from rec(nodes, 0)


def enumerate_budget_schedules(nodes, T, costs, per_step, eps=1e-9):
    """All complete schedules with cumulative spend <= t * per_step."""
    nodes = sorted(nodes)

    def rec(remaining, t, spent):
        if t == T - 1:
            if sum(costs[n] for n in remaining) + spent <= T * per_step + eps:
                yield [frozenset(remaining)]
            return
        budget = (t + 1) * per_step - spent
        for size in range(len(remaining) + 1):
            for combo in combinations(remaining, size):
                cost = sum(costs[n] for n in combo)
                if cost > budget + eps:
                    continue
                rest = [n for n in remaining if n not in combo]
                for tail in rec(rest, t + 1, spent + cost):
                    yield [frozenset(combo)] + tail

    yield from rec(nodes, 0, 0.0)


def oracle_best_objective(catalog, constraints):
    """Exhaustive maximum of the cumulative objective over all schedules."""
    nodes = sorted(catalog.nodes)
    if constraints.mode == "count":
        m = constraints.nodes_per_step(len(nodes))
        schedules = enumerate_count_schedules(nodes, constraints.T, m)
    else:
        schedules = enumerate_budget_schedules(
            nodes,
            constraints.T,
            constraints.cost_model.cost,
            constraints.per_step_budget,
        )
    return max(oracle_objective(catalog, steps) for steps in schedules)


def count_count_schedules(n, T):
    """Direct count of fixed-size partitions (paper's step-size pattern)."""
    m = math.ceil(n / T)
    if n - (T - 1) * m < 0:
        return None
    total = 0
    for _ in enumerate_count_schedules([f"x{i}" for i in range(n)], T, m):
        total += 1
    return total
