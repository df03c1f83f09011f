"""Leader-follower network construction and tree queries.

Node indices are 0-based. The follower ordering of a network is the sorted
node list with the leader removed; kernels may carry a different ordering
(see :mod:`sensorgame.spectral`), always recorded explicitly.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import AssumptionError, NotATreeError, TopologyError

UNDIRECTED = "undirected"
DIRECTED = "directed"
MODES = (UNDIRECTED, DIRECTED)
KINDS = ("path", "star", "random_tree", "platoon")


@dataclass(frozen=True)
class LeaderNetwork:
    n: int
    edges: tuple[tuple[int, int], ...]
    mode: str
    leader: int

    @property
    def directed(self) -> bool:
        return self.mode == DIRECTED

    @cached_property
    def followers(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if v != self.leader)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u].append(v)
            if not self.directed:
                out[v].append(u)
        return tuple(tuple(sorted(nb)) for nb in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        if not self.directed:
            return self.out_neighbors
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            inn[v].append(u)
        return tuple(tuple(sorted(nb)) for nb in inn)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency of the underlying undirected graph."""
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(tuple(sorted(s)) for s in nb)

    @cached_property
    def degree(self) -> tuple[int, ...]:
        """In-degree in directed mode, degree otherwise."""
        return tuple(len(nb) for nb in self.in_neighbors)

    @cached_property
    def out_degree(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.out_neighbors)

    def undirected(self) -> "LeaderNetwork":
        if not self.directed:
            return self
        return LeaderNetwork(self.n, self.edges, UNDIRECTED, self.leader)

    def leader_distances(self) -> dict[int, int]:
        """Hop distance from the leader along edge directions (unreachable nodes omitted)."""
        return _bfs(self.out_neighbors, self.leader)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "leader": self.leader,
            "mode": self.mode,
            "edges": [list(e) for e in self.edges],
        }


def _bfs(adj: Sequence[Sequence[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def build_network(
    n: int, edges: Iterable[Sequence[int]], mode: str = UNDIRECTED, leader: int = 0
) -> LeaderNetwork:
    if mode not in MODES:
        raise TopologyError(f"unknown mode {mode!r}")
    if n < 2:
        raise TopologyError("a network needs a leader and at least one follower")
    if not 0 <= leader < n:
        raise TopologyError(f"leader {leader} out of range for n={n}")
    pairs = [tuple(int(x) for x in e) for e in edges]
    if not pairs:
        raise TopologyError("edge list is empty")
    seen: set[tuple[int, int]] = set()
    for e in pairs:
        if len(e) != 2:
            raise TopologyError(f"edge {e} is not a pair")
        u, v = e
        if not (0 <= u < n and 0 <= v < n):
            raise TopologyError(f"edge {e} has an index out of range for n={n}")
        if u == v:
            raise TopologyError(f"self-loop at node {u}")
        if mode == DIRECTED:
            if (u, v) in seen:
                raise TopologyError(f"duplicate edge {e}")
            if (v, u) in seen:
                raise TopologyError(f"anti-parallel pair {(v, u)} / {e}")
            seen.add((u, v))
        else:
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TopologyError(f"duplicate edge {e}")
            seen.add(key)
    return LeaderNetwork(n, tuple(pairs), mode, leader)


def network_from_dict(data: dict) -> LeaderNetwork:
    try:
        return build_network(
            int(data["n"]), data["edges"], data.get("mode", UNDIRECTED), int(data["leader"])
        )
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"malformed network description: {exc}") from exc


def load_network(path) -> LeaderNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"{path}: {exc}") from exc
    return network_from_dict(data)


def is_connected(net: LeaderNetwork) -> bool:
    return len(_bfs(net.neighbors, net.leader)) == net.n


def satisfies_reachability(net: LeaderNetwork) -> bool:
    """Every follower is reached from the leader along edge directions."""
    return len(net.leader_distances()) == net.n


def validate_tree(net: LeaderNetwork) -> bool:
    if len(net.edges) != net.n - 1 or not is_connected(net):
        return False
    if net.directed:
        return satisfies_reachability(net)
    return True


def require_tree(net: LeaderNetwork) -> None:
    if len(net.edges) != net.n - 1 or not is_connected(net):
        raise NotATreeError("network is not a tree")
    if net.directed and not satisfies_reachability(net):
        raise AssumptionError("some follower is not reachable from the leader")


def _parents(net: LeaderNetwork) -> dict[int, int]:
    parent: dict[int, int] = {}
    queue = deque([net.leader])
    visited = {net.leader}
    while queue:
        u = queue.popleft()
        for v in net.neighbors[u]:
            if v not in visited:
                visited.add(v)
                parent[v] = u
                queue.append(v)
    return parent


@dataclass(frozen=True)
class PathToLeader:
    node: int
    path: tuple[int, ...]  # leader's neighbor first, node last

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.path)


def path_to_leader(net: LeaderNetwork, i: int) -> PathToLeader:
    require_tree(net)
    if i == net.leader:
        raise TopologyError("the leader has no path to itself")
    if not 0 <= i < net.n:
        raise TopologyError(f"node {i} out of range")
    parent = _parents(net)
    path = [i]
    while parent[path[-1]] != net.leader:
        path.append(parent[path[-1]])
    return PathToLeader(i, tuple(reversed(path)))


def paths_to_leader(net: LeaderNetwork) -> dict[int, tuple[int, ...]]:
    """All leader paths at once; same convention as :func:`path_to_leader`."""
    require_tree(net)
    parent = _parents(net)
    paths: dict[int, tuple[int, ...]] = {}
    for v in _bfs(net.neighbors, net.leader):
        if v == net.leader:
            continue
        p = parent[v]
        paths[v] = (paths[p] if p != net.leader else ()) + (v,)
    return paths


@dataclass(frozen=True)
class LeaderRootedPath:
    nodes: tuple[int, ...]
    segment: tuple[int, ...]  # nodes not covered by earlier paths, shallow to deep

    @property
    def length(self) -> int:
        return len(self.nodes)


def leader_rooted_paths(net: LeaderNetwork) -> list[LeaderRootedPath]:
    """Depth-first enumeration of leader-to-leaf paths, children in ascending order.

    Consecutive paths share the longest possible prefix, so each path's
    fresh nodes form a contiguous suffix.
    """
    require_tree(net)
    children = _children(net)
    paths: list[LeaderRootedPath] = []
    covered: set[int] = set()

    stack: list[tuple[int, tuple[int, ...]]] = [
        (c, (c,)) for c in reversed(children[net.leader])
    ]
    while stack:
        v, prefix = stack.pop()
        if not children[v]:
            segment = tuple(u for u in prefix if u not in covered)
            covered.update(segment)
            paths.append(LeaderRootedPath(prefix, segment))
            continue
        for c in reversed(children[v]):
            stack.append((c, prefix + (c,)))
    return paths


def _children(net: LeaderNetwork) -> dict[int, list[int]]:
    parent = _parents(net)
    children: dict[int, list[int]] = {v: [] for v in range(net.n)}
    for v, p in parent.items():
        children[p].append(v)
    for c in children.values():
        c.sort()
    return children


def is_leader_cut_vertex(net: LeaderNetwork) -> bool:
    if net.n <= 2:
        return False
    rest = [v for v in range(net.n) if v != net.leader]
    start = rest[0]
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in net.neighbors[u]:
            if v != net.leader and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) < len(rest)


def is_directed_path(net: LeaderNetwork) -> bool:
    """Directed tree that is a single chain starting at the leader."""
    if not net.directed or not validate_tree(net):
        return False
    return all(d <= 1 for d in net.out_degree)


def orient_away_from(n: int, undirected_edges: Iterable[Sequence[int]], root: int) -> list[tuple[int, int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in undirected_edges:
        adj[u].append(v)
        adj[v].append(u)
    out = []
    visited = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v not in visited:
                visited.add(v)
                out.append((u, v))
                queue.append(v)
    return out


def prufer_decode(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return sorted(edges)


def random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2)
    return prufer_decode([int(x) for x in seq], n)


def generate(
    kind: str,
    n: int,
    leader_pos: int | None = None,
    mode: str = UNDIRECTED,
    seed: int | None = None,
) -> LeaderNetwork:
    """Build a standard topology.

    ``path`` and ``platoon`` are lines whose node index equals line position;
    ``star`` puts the leader at the centre unless ``leader_pos`` says
    otherwise; ``random_tree`` decodes a uniform Prüfer sequence drawn from a
    PCG64 generator seeded with ``seed``. Directed variants orient every edge
    away from the leader.
    """
    if kind not in KINDS:
        raise TopologyError(f"unknown kind {kind!r}; choose from {KINDS}")
    if n < 2:
        raise TopologyError("n must be at least 2")
    if mode not in MODES:
        raise TopologyError(f"unknown mode {mode!r}")
    if kind in ("path", "platoon"):
        edges = [(i, i + 1) for i in range(n - 1)]
        leader = 0 if leader_pos is None else leader_pos
    elif kind == "star":
        leader = 0 if leader_pos is None else leader_pos
        edges = [(0, i) for i in range(1, n)]
    else:
        if seed is None:
            raise TopologyError("random_tree requires a seed")
        rng = np.random.default_rng(seed)
        edges = random_tree_edges(n, rng)
        leader = int(rng.integers(0, n)) if leader_pos is None else leader_pos
    if not 0 <= leader < n:
        raise TopologyError(f"leader position {leader} out of range")
    if mode == DIRECTED:
        edges = orient_away_from(n, edges, leader)
    return build_network(n, edges, mode, leader)


def random_connected(
    n: int, extra_edges: int, rng: np.random.Generator, mode: str = UNDIRECTED, leader: int = 0
) -> LeaderNetwork:
    """Random spanning tree plus up to ``extra_edges`` chords.

    Directed graphs orient the tree away from the leader, so every follower
    stays reachable; chords get a random orientation.
    """
    tree = random_tree_edges(n, rng)
    if mode == DIRECTED:
        edges = orient_away_from(n, tree, leader)
    else:
        edges = list(tree)
    used = {frozenset(e) for e in edges}
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n) if frozenset((u, v)) not in used]
    rng.shuffle(candidates)
    for u, v in candidates[:extra_edges]:
        edges.append((u, v) if rng.random() < 0.5 else (v, u))
    return build_network(n, edges, mode, leader)
