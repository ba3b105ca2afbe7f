"""Network graph model, SNDlib ingestion, and per-node migration costs.

Graphs are simple, undirected and connected. Link weights mimic OSPF
costs: drawn uniformly from [1, 1 + 1/L) where L is the hop diameter,
which guarantees that an n-hop path is always cheaper than an
(n+1)-hop path (cost order agrees with hop order).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

Link = tuple[str, str]


class SndlibParseError(ValueError):
    """Raised when an SNDlib native file cannot be read as a topology."""


def link_key(u: str, v: str) -> Link:
    """Canonical undirected link key (sorted endpoint pair)."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Topology:
    """Simple undirected connected graph over opaque string node ids.

    ``node_order`` fixes the canonical orientation of node pairs (used by
    the path catalog to pick each pair's source side); it defaults to the
    sorted node ids.
    """

    nodes: frozenset[str]
    links: frozenset[Link]
    node_order: tuple[str, ...] | None = None
    adjacency: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.nodes) < 2:
            raise ValueError("topology needs at least 2 nodes")
        if self.node_order is None:
            object.__setattr__(self, "node_order", tuple(sorted(self.nodes)))
        elif set(self.node_order) != self.nodes or len(self.node_order) != len(
            self.nodes
        ):
            raise ValueError("node_order must be a permutation of the nodes")
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.links:
            if u == v:
                raise ValueError(f"self-loop on node {u!r}")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"link ({u!r}, {v!r}) references unknown node")
            if (u, v) != link_key(u, v):
                raise ValueError(f"link ({u!r}, {v!r}) not in canonical order")
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(
            self, "adjacency", {n: frozenset(nbrs) for n, nbrs in adj.items()}
        )
        if not self._is_connected():
            raise ValueError("topology is not connected")

    def _is_connected(self) -> bool:
        start = next(iter(self.nodes))
        seen = {start}
        queue = deque([start])
        while queue:
            for nbr in self.adjacency[queue.popleft()]:
                if nbr not in seen:
                    seen.add(nbr)
                    queue.append(nbr)
        return len(seen) == len(self.nodes)

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def sorted_links(self) -> list[Link]:
        return sorted(self.links)


@dataclass(frozen=True)
class WeightedTopology:
    """Topology plus one positive weight per link (dimensionless OSPF cost)."""

    base: Topology
    weight: dict[Link, float]

    def __post_init__(self) -> None:
        if set(self.weight) != set(self.base.links):
            raise ValueError("weight map must cover exactly the topology links")
        for link, w in self.weight.items():
            if w <= 0:
                raise ValueError(f"non-positive weight {w} on link {link}")

    def link_weight(self, u: str, v: str) -> float:
        return self.weight[link_key(u, v)]


@dataclass(frozen=True)
class CostModel:
    """Degree-proportional migration cost per node; ``total`` covers all nodes."""

    unit_cost: float
    cost: dict[str, float]
    total: float

    def __post_init__(self) -> None:
        if abs(sum(self.cost.values()) - self.total) > 1e-9:
            raise ValueError("total does not equal the sum of node costs")


def make_topology(nodes, links) -> Topology:
    """Build a Topology from iterables of node ids and endpoint pairs."""
    canonical = set()
    for u, v in links:
        key = link_key(u, v)
        if key in canonical:
            raise ValueError(f"duplicate link {key}")
        canonical.add(key)
    return Topology(nodes=frozenset(nodes), links=frozenset(canonical))


def parse_sndlib(text: str) -> Topology:
    """Parse the NODES/LINKS sections of an SNDlib native file.

    Only node ids and link endpoints are read; coordinates, capacities and
    every other attribute are ignored. Problems are reported with the
    offending line number.
    """
    nodes: set[str] = set()
    links: dict[Link, int] = {}
    link_ids: dict[str, int] = {}
    section = None
    saw_nodes = saw_links = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if section is None:
            if line.startswith("NODES") and "(" in line:
                section = "NODES"
                saw_nodes = True
            elif line.startswith("LINKS") and "(" in line:
                if not saw_nodes:
                    raise SndlibParseError(
                        f"line {lineno}: missing NODES section before LINKS"
                    )
                section = "LINKS"
                saw_links = True
            continue
        if line == ")":
            section = None
            continue
        tokens = line.replace("(", " ( ").replace(")", " ) ").split()
        if not tokens:
            continue
        if section == "NODES":
            nodes.add(tokens[0])
        elif section == "LINKS":
            link_id = tokens[0]
            if link_id in link_ids:
                raise SndlibParseError(
                    f"line {lineno}: duplicate link identifier {link_id!r} "
                    f"(first seen on line {link_ids[link_id]})"
                )
            link_ids[link_id] = lineno
            try:
                lparen = tokens.index("(")
                src, dst = tokens[lparen + 1], tokens[lparen + 2]
            except (ValueError, IndexError):
                raise SndlibParseError(
                    f"line {lineno}: malformed link entry {raw.strip()!r}"
                ) from None
            for endpoint in (src, dst):
                if endpoint not in nodes:
                    raise SndlibParseError(
                        f"line {lineno}: link {link_id!r} references "
                        f"undeclared node {endpoint!r}"
                    )
            if src == dst:
                raise SndlibParseError(f"line {lineno}: self-loop on {src!r}")
            key = link_key(src, dst)
            if key in links:
                raise SndlibParseError(
                    f"line {lineno}: duplicate link between {src!r} and {dst!r} "
                    f"(first seen on line {links[key]})"
                )
            links[key] = lineno

    if not saw_nodes:
        raise SndlibParseError("missing NODES section")
    if not saw_links:
        raise SndlibParseError("missing LINKS section")
    try:
        return Topology(nodes=frozenset(nodes), links=frozenset(links))
    except ValueError as exc:
        raise SndlibParseError(str(exc)) from None


def bfs_distances(topo: Topology, source: str) -> dict[str, int]:
    """Hop distance from ``source`` to every node."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nbr in topo.adjacency[node]:
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def hop_diameter(topo: Topology) -> int:
    """Largest minimum hop distance over all node pairs (all-pairs BFS)."""
    best = 0
    for node in topo.nodes:
        best = max(best, max(bfs_distances(topo, node).values()))
    return best


def generate_ospf_weights(topo: Topology, seed: int) -> WeightedTopology:
    """Draw one weight per link, uniform on [1, 1 + 1/L), L = hop diameter.

    The interval keeps the spread of any two link costs below 1/L of the
    minimum cost, so the hop count of every minimum-weight path matches
    the BFS hop distance. Deterministic for a given seed.
    """
    spread = 1.0 / hop_diameter(topo)
    rng = random.Random(seed)
    weights = {link: rng.uniform(1.0, 1.0 + spread) for link in topo.sorted_links()}
    return WeightedTopology(base=topo, weight=weights)


def migration_costs(topo: Topology, unit_cost: float = 1.0) -> CostModel:
    """Cost of migrating each node: ``unit_cost`` times its degree."""
    if unit_cost <= 0:
        raise ValueError(f"unit_cost must be positive, got {unit_cost}")
    cost = {n: unit_cost * topo.degree(n) for n in topo.nodes}
    return CostModel(unit_cost=unit_cost, cost=cost, total=sum(cost.values()))


def random_connected_topology(n_nodes: int, n_links: int, seed: int) -> Topology:
    """Random connected graph: a random spanning tree plus extra random links."""
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    max_links = n_nodes * (n_nodes - 1) // 2
    if not n_nodes - 1 <= n_links <= max_links:
        raise ValueError(
            f"n_links must lie in [{n_nodes - 1}, {max_links}], got {n_links}"
        )
    rng = random.Random(seed)
    names = [f"n{i:03d}" for i in range(n_nodes)]
    order = names[:]
    rng.shuffle(order)
    links = set()
    for i in range(1, n_nodes):
        links.add(link_key(order[i], order[rng.randrange(i)]))
    while len(links) < n_links:
        u, v = rng.sample(names, 2)
        links.add(link_key(u, v))
    return Topology(nodes=frozenset(names), links=frozenset(links))


# Small named network used throughout tests and the CLI: the classic
# three-route source/destination example. Weights are chosen so the
# s-d routes rank s-a-b-d < s-c-e-d < s-c-h-d.
_FIG2_WEIGHTS = {
    ("a", "s"): 1.00,
    ("a", "b"): 1.00,
    ("b", "d"): 1.00,
    ("c", "s"): 1.10,
    ("c", "e"): 1.10,
    ("d", "e"): 1.10,
    ("c", "h"): 1.15,
    ("d", "h"): 1.20,
    ("e", "h"): 1.05,
}


def fixture(name: str) -> WeightedTopology:
    """Return a built-in named weighted topology."""
    if name != "fig2":
        raise KeyError(f"unknown fixture {name!r}; available: fig2")
    weights = {link_key(u, v): w for (u, v), w in _FIG2_WEIGHTS.items()}
    topo = Topology(
        nodes=frozenset("sabcdeh"),
        links=frozenset(weights),
        node_order=("s", "a", "b", "c", "d", "e", "h"),
    )
    return WeightedTopology(base=topo, weight=weights)


FIXTURE_NAMES = ("fig2",)
