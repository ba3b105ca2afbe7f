import random

import pytest

from sdnmig import pathcat, topology
from sdnmig.pathcat import (
    available_alt_paths,
    build_catalog,
    compute_key_nodes,
    enumerate_equal_hop_paths,
    gain_vector,
    marginal_gain,
)

from conftest import (
    oracle_available_paths,
    oracle_bfs_dist,
    oracle_simple_paths,
    random_instance,
)


def names(catalog, ids):
    return {"-".join(catalog.paths[pid].nodes) for pid in ids}


class TestEnumerateEqualHopPaths:
    def test_fig2_s_to_d(self, fig2):
        enum = enumerate_equal_hop_paths(fig2, "s", "d")
        assert not enum.truncated
        assert [p.nodes for p in enum.paths] == [
            ("s", "a", "b", "d"),
            ("s", "c", "e", "d"),
            ("s", "c", "h", "d"),
        ]
        assert [round(p.cost, 2) for p in enum.paths] == [3.00, 3.30, 3.45]
        assert all(p.hop_len == 3 for p in enum.paths)

    def test_fig2_s_to_b_single(self, fig2):
        enum = enumerate_equal_hop_paths(fig2, "s", "b")
        assert [p.nodes for p in enum.paths] == [("s", "a", "b")]

    def test_adjacent_pair_single_hop(self, fig2):
        enum = enumerate_equal_hop_paths(fig2, "s", "a")
        assert [p.nodes for p in enum.paths] == [("s", "a")]
        assert enum.paths[0].cost == 1.0

    def test_same_endpoints_rejected(self, fig2):
        with pytest.raises(ValueError):
            enumerate_equal_hop_paths(fig2, "s", "s")

    def test_truncation_flag(self):
        # two stacked 4-cycles give four equal-hop a-z routes
        topo = topology.make_topology(
            ["a", "m1", "m2", "z", "m3"],
            [("a", "m1"), ("a", "m2"), ("a", "m3"),
             ("m1", "z"), ("m2", "z"), ("m3", "z")],
        )
        wtopo = topology.generate_ospf_weights(topo, seed=0)
        full = enumerate_equal_hop_paths(wtopo, "a", "z", cap=10)
        assert len(full.paths) == 3 and not full.truncated
        cut = enumerate_equal_hop_paths(wtopo, "a", "z", cap=2)
        assert len(cut.paths) == 2 and cut.truncated

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dfs_oracle(self, seed):
        wtopo, _ = random_instance(seed, n_nodes=random.Random(seed).randint(4, 8))
        topo = wtopo.base
        nodes = topo.sorted_nodes()
        for i, src in enumerate(nodes):
            for dst in nodes[i + 1 :]:
                dist = oracle_bfs_dist(topo.adjacency, src, dst)
                expected = {
                    p
                    for p in oracle_simple_paths(topo.adjacency, src, dst, dist)
                    if len(p) - 1 == dist
                }
                enum = enumerate_equal_hop_paths(wtopo, src, dst)
                assert {p.nodes for p in enum.paths} == expected


class TestComputeKeyNodes:
    def test_fork_against_one_cheaper(self, fig2):
        paths = enumerate_equal_hop_paths(fig2, "s", "d").paths
        assert compute_key_nodes(paths[1], [paths[0]]) == {"s"}

    def test_fork_against_two_cheaper(self, fig2):
        paths = enumerate_equal_hop_paths(fig2, "s", "d").paths
        assert compute_key_nodes(paths[2], [paths[0], paths[1]]) == {"s", "c"}

    def test_least_cost_has_none(self, fig2):
        paths = enumerate_equal_hop_paths(fig2, "s", "d").paths
        assert compute_key_nodes(paths[0], []) == frozenset()

    def test_mismatched_endpoints(self, fig2):
        sd = enumerate_equal_hop_paths(fig2, "s", "d").paths[0]
        sb = enumerate_equal_hop_paths(fig2, "s", "b").paths[0]
        with pytest.raises(ValueError, match="does not match"):
            compute_key_nodes(sd, [sb])


class TestBuildCatalog:
    def test_fig2_alternative_paths(self, fig2_catalog):
        cat = fig2_catalog
        assert len(cat.alt_ids) == 7
        by_pair = {}
        for pid in cat.alt_ids:
            p = cat.paths[pid]
            by_pair.setdefault((p.src, p.dst), []).append(set(p.key_nodes))
        assert by_pair == {
            ("s", "d"): [{"s"}, {"s", "c"}],
            ("a", "e"): [{"a"}],
            ("a", "h"): [{"a"}],
            ("b", "c"): [{"b"}, {"b", "d"}],
            ("c", "d"): [{"c"}],
        }

    def test_triangle_no_alternatives(self):
        topo = topology.make_topology("xyz", [("x", "y"), ("y", "z"), ("x", "z")])
        weights = {("x", "y"): 1.0, ("y", "z"): 1.1, ("x", "z"): 1.2}
        cat = build_catalog(topology.WeightedTopology(base=topo, weight=weights))
        assert cat.alt_ids == frozenset()

    def test_four_cycle(self):
        topo = topology.make_topology(
            "abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]
        )
        weights = {
            ("a", "b"): 1.00, ("b", "c"): 1.01, ("c", "d"): 1.02, ("a", "d"): 1.03,
        }
        cat = build_catalog(topology.WeightedTopology(base=topo, weight=weights))
        # opposite corners have two 2-hop routes; the dearer one forks at its source
        assert len(cat.alt_ids) == 2
        for pid in cat.alt_ids:
            p = cat.paths[pid]
            assert p.key_nodes == {p.src}

    def test_least_cost_paths_have_no_keys(self, fig2_catalog):
        for ids in fig2_catalog.pair_paths.values():
            first = fig2_catalog.paths[ids[0]]
            assert first.key_nodes == frozenset()
            assert first.alpha == 0
            for pid in ids[1:]:
                assert fig2_catalog.paths[pid].alpha >= 1

    def test_path_ids_are_export_order(self, fig2_catalog):
        dump = pathcat.catalog_to_json(fig2_catalog)
        flat = [p["id"] for pair in dump["pairs"] for p in pair["paths"]]
        assert flat == list(range(len(fig2_catalog.paths)))

    def test_hop_len_matches_pair_minimum(self, fig2_catalog):
        for ids in fig2_catalog.pair_paths.values():
            lens = {fig2_catalog.paths[pid].hop_len for pid in ids}
            assert len(lens) == 1


class TestAvailability:
    def test_nothing_migrated(self, fig2_catalog):
        assert available_alt_paths(fig2_catalog, set()) == set()

    def test_source_only(self, fig2_catalog):
        got = available_alt_paths(fig2_catalog, {"s"})
        assert names(fig2_catalog, got) == {"s-c-e-d"}

    def test_everything_migrated(self, fig2_catalog):
        got = available_alt_paths(fig2_catalog, set(fig2_catalog.nodes))
        assert got == set(fig2_catalog.alt_ids)

    def test_gain_examples(self, fig2_catalog):
        assert marginal_gain(fig2_catalog, set(), "a") == 2
        assert marginal_gain(fig2_catalog, {"s"}, "c") == 2

    def test_gain_of_final_node(self, fig2_catalog):
        all_but_d = set(fig2_catalog.nodes) - {"d"}
        now = len(available_alt_paths(fig2_catalog, all_but_d))
        assert marginal_gain(fig2_catalog, all_but_d, "d") == 7 - now

    def test_gain_rejects_migrated_node(self, fig2_catalog):
        with pytest.raises(ValueError, match="already migrated"):
            marginal_gain(fig2_catalog, {"s"}, "s")

    def test_gain_vector_matches_marginal_gain(self, fig2_catalog):
        for migrated in (set(), {"s"}, {"a", "b"}, {"s", "c", "d"}):
            vec = gain_vector(fig2_catalog, migrated)
            for node in fig2_catalog.nodes - migrated:
                assert vec[node] == marginal_gain(fig2_catalog, migrated, node)

    def test_singleton_gains_bounded_by_total(self, fig2_catalog):
        # from the empty set a path counts toward at most one node's gain
        total = sum(
            marginal_gain(fig2_catalog, set(), n) for n in fig2_catalog.nodes
        )
        assert total <= len(fig2_catalog.alt_ids)


class TestProperties:
    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_and_complete(self, seed):
        _, cat = random_instance(seed, n_nodes=random.Random(seed).randint(5, 10))
        rng = random.Random(seed + 99)
        nodes = sorted(cat.nodes)
        small = set(rng.sample(nodes, rng.randint(0, len(nodes) - 1)))
        extra = set(rng.sample(nodes, rng.randint(0, len(nodes))))
        big = small | extra
        assert available_alt_paths(cat, small) <= available_alt_paths(cat, big)
        assert available_alt_paths(cat, set(nodes)) == set(cat.alt_ids)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_from_scratch_oracle(self, seed):
        """Availability agrees with recomputing key nodes per query."""
        _, cat = random_instance(seed, n_nodes=random.Random(seed).randint(4, 8))
        rng = random.Random(seed * 7 + 1)
        nodes = sorted(cat.nodes)
        for _ in range(20):
            migrated = set(rng.sample(nodes, rng.randint(0, len(nodes))))
            assert available_alt_paths(cat, migrated) == oracle_available_paths(
                cat, migrated
            )
