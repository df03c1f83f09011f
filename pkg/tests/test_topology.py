import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sensorgame.errors import AssumptionError, NotATreeError, TopologyError
from sensorgame.recipes import random_trees
from sensorgame.topology import (
    build_network,
    generate,
    is_directed_path,
    is_leader_cut_vertex,
    leader_rooted_paths,
    load_network,
    network_from_dict,
    path_to_leader,
    paths_to_leader,
    prufer_decode,
    random_connected,
    validate_tree,
)


def test_build_star_with_leader_center():
    net = build_network(3, [(2, 0), (2, 1)], "undirected", 2)
    assert net.followers == (0, 1)
    assert net.degree == (1, 1, 2)
    assert is_leader_cut_vertex(net)


def test_build_path_leader_at_head():
    net = build_network(4, [(3, 0), (0, 1), (1, 2)], "undirected", 3)
    assert validate_tree(net)
    assert path_to_leader(net, 2).path == (0, 1, 2)
    assert not is_leader_cut_vertex(net)


@pytest.mark.parametrize(
    "n, edges, mode, leader",
    [
        (3, [(0, 1), (1, 0)], "directed", 0),  # anti-parallel
        (3, [(0, 0), (0, 1)], "undirected", 0),  # self-loop
        (3, [(0, 1), (1, 0)], "undirected", 0),  # duplicate
        (3, [(0, 1), (0, 1)], "directed", 0),  # duplicate
        (3, [(0, 3)], "undirected", 0),  # out of range
        (3, [(0, 1)], "undirected", 5),  # leader out of range
        (3, [], "undirected", 0),
        (3, [(0, 1)], "sideways", 0),
    ],
)
def test_build_rejects_malformed(n, edges, mode, leader):
    with pytest.raises(TopologyError):
        build_network(n, edges, mode, leader)


def test_validate_tree_cases():
    assert validate_tree(generate("path", 4))
    assert not validate_tree(build_network(4, [(0, 1), (2, 3)], "undirected", 0))
    cycle = build_network(4, [(0, 1), (1, 2), (2, 3), (3, 0)], "undirected", 0)
    assert not validate_tree(cycle)
    # oriented toward the leader: the leader reaches nobody
    toward = build_network(4, [(3, 2), (2, 1), (1, 0)], "directed", 0)
    assert not validate_tree(toward)
    assert validate_tree(generate("path", 4, mode="directed"))


def test_path_to_leader_errors():
    net = generate("path", 4)
    with pytest.raises(TopologyError):
        path_to_leader(net, 0)
    with pytest.raises(NotATreeError):
        path_to_leader(build_network(4, [(0, 1), (2, 3)], "undirected", 0), 1)
    with pytest.raises(AssumptionError):
        path_to_leader(build_network(3, [(1, 0), (1, 2)], "directed", 0), 2)


def test_path_to_leader_star_and_branches():
    star = generate("star", 5)
    for leaf in range(1, 5):
        assert path_to_leader(star, leaf).nodes == {leaf}
    # Leader 0 with a shared node 1 feeding two branches 1-2-3 and 1-4-5-6.
    net = build_network(7, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6)], "undirected", 0)
    assert len(path_to_leader(net, 3).nodes & path_to_leader(net, 6).nodes) == 1
    assert len(path_to_leader(net, 3).nodes & path_to_leader(net, 2).nodes) == 2


def _edge_path(net, i):
    p = (net.leader,) + paths_to_leader(net)[i]
    return {frozenset(e) for e in zip(p, p[1:])}


@given(st.integers(3, 14), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_path_intersection_counts_common_edges(n, seed):
    net = generate("random_tree", n, seed=seed)
    for i, j in itertools.product(net.followers, repeat=2):
        common_nodes = path_to_leader(net, i).nodes & path_to_leader(net, j).nodes
        assert len(common_nodes) == len(_edge_path(net, i) & _edge_path(net, j))


def test_leader_rooted_paths_examples():
    path = generate("path", 5)
    (only,) = leader_rooted_paths(path)
    assert only.nodes == only.segment == (1, 2, 3, 4)

    star = generate("star", 5)
    assert [p.segment for p in leader_rooted_paths(star)] == [(1,), (2,), (3,), (4,)]

    # chains of lengths 2 and 3 hanging off the leader
    two_chains = build_network(6, [(0, 1), (1, 2), (0, 3), (3, 4), (4, 5)], "undirected", 0)
    paths = leader_rooted_paths(two_chains)
    assert len(paths) == 2
    assert sorted(len(p.segment) for p in paths) == [2, 3]


def test_leader_rooted_paths_depth_first_order():
    net = build_network(8, [(0, 1), (1, 2), (2, 3), (2, 4), (1, 5), (0, 6), (6, 7)], "undirected", 0)
    paths = leader_rooted_paths(net)
    assert [p.nodes for p in paths] == [(1, 2, 3), (1, 2, 4), (1, 5), (6, 7)]
    assert [p.segment for p in paths] == [(1, 2, 3), (4,), (5,), (6, 7)]


@given(st.integers(2, 30), st.integers(0, 10**6), st.sampled_from(["undirected", "directed"]))
@settings(max_examples=80, deadline=None)
def test_segments_partition_followers(n, seed, mode):
    net = generate("random_tree", n, mode=mode, seed=seed)
    paths = leader_rooted_paths(net)
    segs = [s for p in paths for s in p.segment]
    assert sorted(segs) == list(net.followers)
    for p in paths:
        assert p.nodes[-len(p.segment):] == p.segment
        assert p.nodes[0] in net.out_neighbors[net.leader]
        last = p.nodes[-1]
        if mode == "directed":
            assert net.out_degree[last] == 0
        else:
            assert len(net.neighbors[last]) == 1


@given(st.integers(2, 20), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_cut_vertex_iff_leader_degree_two(n, seed):
    net = generate("random_tree", n, seed=seed)
    assert is_leader_cut_vertex(net) == (len(net.neighbors[net.leader]) >= 2)


def test_cut_vertex_on_paths():
    assert not is_leader_cut_vertex(generate("path", 5, 0))
    assert is_leader_cut_vertex(generate("path", 5, 2))


def test_generate_kinds():
    p = generate("path", 5, leader_pos=4)
    assert p.leader == 4 and len(p.followers) == 4 and validate_tree(p)
    a = generate("random_tree", 10, seed=7)
    b = generate("random_tree", 10, seed=7)
    assert a == b
    pl = generate("platoon", 5, 2, "directed")
    assert set(pl.edges) == {(2, 1), (1, 0), (2, 3), (3, 4)}
    with pytest.raises(TopologyError):
        generate("random_tree", 10)
    with pytest.raises(TopologyError):
        generate("wheel", 5)
    with pytest.raises(TopologyError):
        generate("path", 1)


def test_random_trees_are_trees_and_spread():
    shapes = set()
    for seed in range(300):
        net = generate("random_tree", 5, seed=seed)
        assert validate_tree(net)
        shapes.add(tuple(sorted(len(nb) for nb in net.neighbors)))
    # 5-node trees come in three degree profiles: path, spider, star
    assert shapes == {(1, 1, 2, 2, 2), (1, 1, 1, 2, 3), (1, 1, 1, 1, 4)}


def test_prufer_decode_known_sequence():
    # classic example: sequence (3, 3, 3, 4) decodes to a tree on six nodes
    assert prufer_decode([3, 3, 3, 4], 6) == [(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]


def test_directed_path_predicate():
    assert is_directed_path(generate("path", 5, 0, "directed"))
    assert not is_directed_path(generate("path", 5, 2, "directed"))
    assert not is_directed_path(generate("star", 4, mode="directed"))
    assert not is_directed_path(generate("path", 5))


def test_random_connected_keeps_reachability():
    rng = np.random.default_rng(3)
    for _ in range(30):
        net = random_connected(8, 4, rng, "directed", 2)
        assert len(net.leader_distances()) == 8


def test_json_roundtrip(tmp_path):
    net = generate("random_tree", 9, mode="directed", seed=1)
    path = tmp_path / "net.json"
    import json

    path.write_text(json.dumps(net.to_dict()))
    assert load_network(path) == net
    with pytest.raises(TopologyError):
        network_from_dict({"n": 3})


def test_random_trees_helper_respects_sizes():
    nets = list(random_trees(50, range(3, 6), seed=0, mode="directed"))
    assert all(3 <= net.n <= 5 and validate_tree(net) for net in nets)
