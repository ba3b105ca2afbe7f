"""Equal-hop path enumeration and key-node analysis.

For every node pair the catalog holds the least-cost path plus all other
simple paths of the same (minimum) hop count, sorted by cost. Each path
carries its key nodes: the fork nodes against every cheaper path of the
pair. An alternative path becomes usable for traffic engineering only
once all of its key nodes have migrated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .topology import WeightedTopology, bfs_distances

PairKey = tuple[str, str]


@dataclass(frozen=True)
class AltPath:
    """One src->dst path; ``key_nodes`` is None until the catalog fills it."""

    src: str
    dst: str
    nodes: tuple[str, ...]
    cost: float
    hop_len: int
    key_nodes: frozenset[str] | None = None
    alpha: int | None = None
    path_id: int | None = None


@dataclass(frozen=True)
class PathEnumeration:
    paths: tuple[AltPath, ...]
    truncated: bool


@dataclass(frozen=True)
class PathCatalog:
    """All equal-hop paths of a weighted topology, with key nodes and ids.

    Pairs are oriented by the topology's node order (the earlier node is
    the pair's source, which anchors the fork-node computation); path ids
    follow export order: pairs in that canonical order, paths within a
    pair by ascending cost (ties broken by node sequence). ``alt_ids``
    holds the ids of paths with at least one key node (alpha >= 1).
    """

    nodes: frozenset[str]
    node_order: tuple[str, ...]
    paths: tuple[AltPath, ...]
    pair_paths: dict[PairKey, tuple[int, ...]]
    alt_ids: frozenset[int]
    truncated_pairs: frozenset[PairKey]
    _rank: dict[str, int] = field(init=False, repr=False, compare=False)
    key_index: dict[str, tuple[int, ...]] = field(
        init=False, repr=False, compare=False
    )
    initial_missing: dict[int, int] = field(init=False, repr=False, compare=False)
    initial_gains: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_rank", {n: i for i, n in enumerate(self.node_order)}
        )
        index: dict[str, list[int]] = {}
        missing: dict[int, int] = {}
        gains = {n: 0 for n in self.node_order}
        for pid in sorted(self.alt_ids):
            keys = self.paths[pid].key_nodes
            missing[pid] = len(keys)
            for node in keys:
                index.setdefault(node, []).append(pid)
            if len(keys) == 1:
                (node,) = keys
                gains[node] += 1
        object.__setattr__(
            self, "key_index", {n: tuple(pids) for n, pids in index.items()}
        )
        object.__setattr__(self, "initial_missing", missing)
        object.__setattr__(self, "initial_gains", gains)

    def path(self, path_id: int) -> AltPath:
        return self.paths[path_id]

    def beta(self, node: str, path_id: int) -> bool:
        """True iff ``node`` is a key node of the path."""
        return node in self.paths[path_id].key_nodes

    def pair_of(self, u: str, v: str) -> PairKey:
        """Canonical orientation of an unordered pair per the node order."""
        return (u, v) if self._rank[u] < self._rank[v] else (v, u)

    def least_cost_id(self, u: str, v: str) -> int:
        return self.pair_paths[self.pair_of(u, v)][0]

    def oriented_nodes(self, path_id: int, src: str) -> tuple[str, ...]:
        """Path node sequence walked from ``src`` (pairs are undirected)."""
        nodes = self.paths[path_id].nodes
        if nodes[0] == src:
            return nodes
        if nodes[-1] == src:
            return tuple(reversed(nodes))
        raise ValueError(f"path {path_id} does not start or end at {src!r}")


def enumerate_equal_hop_paths(
    wtopo: WeightedTopology, src: str, dst: str, cap: int = 1000
) -> PathEnumeration:
    """All simple src-dst paths whose hop count equals the BFS distance.

    Every minimum-hop walk advances one BFS layer per hop, so the paths
    are exactly the routes through the layered shortest-path DAG; they
    are simple by construction. At most ``cap`` paths are collected; if
    more exist the result is flagged truncated.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    topo = wtopo.base
    dist_src = bfs_distances(topo, src)
    dist_dst = bfs_distances(topo, dst)
    total = dist_src[dst]

    found: list[tuple[str, ...]] = []
    truncated = False

    def extend(prefix: list[str]) -> bool:
        nonlocal truncated
        here = prefix[-1]
        depth = len(prefix) - 1
        if here == dst:
            if len(found) >= cap:
                truncated = True
                return False
            found.append(tuple(prefix))
            return True
        for nbr in sorted(topo.adjacency[here]):
            if dist_src[nbr] == depth + 1 and dist_dst[nbr] == total - depth - 1:
                prefix.append(nbr)
                keep_going = extend(prefix)
                prefix.pop()
                if not keep_going:
                    return False
        return True

    extend([src])

    paths = [
        AltPath(
            src=src,
            dst=dst,
            nodes=nodes,
            cost=sum(wtopo.link_weight(a, b) for a, b in zip(nodes, nodes[1:])),
            hop_len=len(nodes) - 1,
        )
        for nodes in found
    ]
    paths.sort(key=lambda p: (p.cost, p.nodes))
    return PathEnumeration(paths=tuple(paths), truncated=truncated)


def compute_key_nodes(p: AltPath, cheaper: list[AltPath]) -> frozenset[str]:
    """Key nodes of ``p``: the fork node against each cheaper same-pair path.

    The fork node is the last node of the longest common prefix of the two
    node sequences. The least-cost path (empty ``cheaper``) has none.
    """
    keys = set()
    for other in cheaper:
        if (other.src, other.dst) != (p.src, p.dst):
            raise ValueError(
                f"path {other.src}-{other.dst} does not match pair {p.src}-{p.dst}"
            )
        i = 0
        limit = min(len(p.nodes), len(other.nodes))
        while i < limit and p.nodes[i] == other.nodes[i]:
            i += 1
        keys.add(p.nodes[i - 1])
    return frozenset(keys)


def build_catalog(wtopo: WeightedTopology, cap: int = 1000) -> PathCatalog:
    """Enumerate every unordered pair and attach key nodes and stable ids."""
    topo = wtopo.base
    ordered = list(topo.node_order)
    paths: list[AltPath] = []
    pair_paths: dict[PairKey, tuple[int, ...]] = {}
    alt_ids: set[int] = set()
    truncated: set[PairKey] = set()

    for i, src in enumerate(ordered):
        for dst in ordered[i + 1 :]:
            enum = enumerate_equal_hop_paths(wtopo, src, dst, cap=cap)
            if enum.truncated:
                truncated.add((src, dst))
            ids = []
            finished: list[AltPath] = []
            for rank, p in enumerate(enum.paths):
                keys = compute_key_nodes(p, finished)
                pid = len(paths) + rank
                finished.append(
                    replace(p, key_nodes=keys, alpha=len(keys), path_id=pid)
                )
                ids.append(pid)
                if keys:
                    alt_ids.add(pid)
            paths.extend(finished)
            pair_paths[(src, dst)] = tuple(ids)

    return PathCatalog(
        nodes=topo.nodes,
        node_order=topo.node_order,
        paths=tuple(paths),
        pair_paths=pair_paths,
        alt_ids=frozenset(alt_ids),
        truncated_pairs=frozenset(truncated),
    )


def available_alt_paths(catalog: PathCatalog, migrated: set[str]) -> set[int]:
    """Alternative paths whose key nodes have all migrated."""
    return {
        pid for pid in catalog.alt_ids if catalog.paths[pid].key_nodes <= migrated
    }


def marginal_gain(catalog: PathCatalog, migrated: set[str], u: str) -> int:
    """Extra alternative paths unlocked by migrating ``u`` on top of ``migrated``."""
    if u in migrated:
        raise ValueError(f"node {u!r} already migrated")
    with_u = migrated | {u}
    gain = 0
    for pid in catalog.alt_ids:
        keys = catalog.paths[pid].key_nodes
        if keys <= with_u and not keys <= migrated:
            gain += 1
    return gain


def gain_vector(catalog: PathCatalog, migrated: set[str]) -> dict[str, int]:
    """Marginal gain of every unmigrated node against the current set.

    A path counts toward a node's gain exactly when that node is its only
    unmigrated key node, so one scan over the unavailable paths covers all
    candidates at once.
    """
    gains = {n: 0 for n in catalog.nodes if n not in migrated}
    for pid in catalog.alt_ids:
        missing = [n for n in catalog.paths[pid].key_nodes if n not in migrated]
        if len(missing) == 1:
            gains[missing[0]] += 1
    return gains


def catalog_to_json(catalog: PathCatalog) -> dict:
    """JSON-ready catalog dump; list order defines the stable path ids."""
    pairs = []
    for (src, dst), ids in catalog.pair_paths.items():
        pairs.append(
            {
                "src": src,
                "dst": dst,
                "truncated": (src, dst) in catalog.truncated_pairs,
                "paths": [
                    {
                        "id": pid,
                        "nodes": list(catalog.paths[pid].nodes),
                        "cost": catalog.paths[pid].cost,
                        "hop_len": catalog.paths[pid].hop_len,
                        "key_nodes": sorted(catalog.paths[pid].key_nodes),
                        "alpha": catalog.paths[pid].alpha,
                    }
                    for pid in ids
                ],
            }
        )
    return {
        "nodes": sorted(catalog.nodes),
        "alt_path_ids": sorted(catalog.alt_ids),
        "pairs": pairs,
    }
