"""Grounded Laplacians and their inverses.

The inverse of the grounded Laplacian is the payoff kernel of the placement
game. Three routes compute it: LU inversion for any valid network, and the
path-intersection and reachability closed forms for undirected and directed
trees. ``two_tree_count`` and ``factorization_check`` are independent oracles
for the closed forms.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import AssumptionError, SingularKernelError, TopologyError
from .topology import (
    LeaderNetwork,
    _bfs,
    is_connected,
    paths_to_leader,
    require_tree,
    satisfies_reachability,
)

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class GroundedSystem:
    L_g: np.ndarray
    L_12: np.ndarray
    follower_order: tuple[int, ...]


@dataclass(frozen=True)
class GroundedKernel:
    inv: np.ndarray
    method: str
    follower_order: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.inv.shape[0]

    def position(self, node: int) -> int:
        return self.follower_order.index(node)

    def reordered(self, order: Sequence[int]) -> "GroundedKernel":
        idx = [self.follower_order.index(v) for v in order]
        return GroundedKernel(self.inv[np.ix_(idx, idx)], self.method, tuple(order))

    def to_dict(self) -> dict:
        return {
            "order": list(self.follower_order),
            "method": self.method,
            "matrix": [[float(f"{x:.12g}") for x in row] for row in self.inv],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.inv:
            writer.writerow(f"{x:.12g}" for x in row)
        return buf.getvalue()


def default_order(net: LeaderNetwork) -> tuple[int, ...]:
    """Followers by index, or by (leader distance, index) for directed networks.

    The directed ordering makes the grounded Laplacian of a directed tree
    lower triangular.
    """
    if not net.directed:
        return net.followers
    dist = net.leader_distances()
    far = max(dist.values(), default=0) + 1
    return tuple(sorted(net.followers, key=lambda v: (dist.get(v, far), v)))


def laplacian(net: LeaderNetwork) -> np.ndarray:
    """L = D - A with A[i, j] = 1 iff there is an edge from j to i."""
    A = np.zeros((net.n, net.n))
    for u, v in net.edges:
        A[v, u] = 1.0
        if not net.directed:
            A[u, v] = 1.0
    return np.diag(A.sum(axis=1)) - A


def grounded_system(net: LeaderNetwork, order: Sequence[int] | None = None) -> GroundedSystem:
    if net.directed:
        if not satisfies_reachability(net):
            raise AssumptionError("some follower is not reachable from the leader")
    elif not is_connected(net):
        raise TopologyError("network is disconnected")
    order = default_order(net) if order is None else tuple(order)
    if sorted(order) != list(net.followers):
        raise TopologyError("order must be a permutation of the followers")
    L = laplacian(net)
    idx = list(order)
    return GroundedSystem(L[np.ix_(idx, idx)], L[idx, net.leader].copy(), order)


def invert_numeric(sys: GroundedSystem) -> GroundedKernel:
    L_g = np.asarray(sys.L_g, dtype=float)
    with warnings.catch_warnings():
        # singularity is reported through the pivot check below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(L_g, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularKernelError(
            "grounded Laplacian is singular: a follower is cut off from the leader"
        )
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(L_g.shape[0]))
    return GroundedKernel(inv, "numeric", sys.follower_order)


def numeric_kernel(net: LeaderNetwork, order: Sequence[int] | None = None) -> GroundedKernel:
    return invert_numeric(grounded_system(net, order))


def closed_form_undirected(net: LeaderNetwork, order: Sequence[int] | None = None) -> GroundedKernel:
    """Entry (i, j) counts the followers shared by the leader paths of i and j."""
    if net.directed:
        raise TopologyError("closed_form_undirected needs an undirected tree")
    require_tree(net)
    order = net.followers if order is None else tuple(order)
    paths = {v: frozenset(p) for v, p in paths_to_leader(net).items()}
    k = len(order)
    inv = np.empty((k, k))
    for a, i in enumerate(order):
        for b in range(a, k):
            inv[a, b] = inv[b, a] = len(paths[i] & paths[order[b]])
    return GroundedKernel(inv, "lemma2", order)


def closed_form_directed(net: LeaderNetwork, order: Sequence[int] | None = None) -> GroundedKernel:
    """Entry (i, j) is 1 iff j reaches i along directed edges (i reaches itself)."""
    if not net.directed:
        raise TopologyError("closed_form_directed needs a directed tree")
    require_tree(net)
    order = default_order(net) if order is None else tuple(order)
    pos = {v: a for a, v in enumerate(order)}
    k = len(order)
    inv = np.zeros((k, k))
    for j in order:
        for i in _bfs(net.out_neighbors, j):
            inv[pos[i], pos[j]] = 1.0
    return GroundedKernel(inv, "lemma3", order)


def closed_form_kernel(net: LeaderNetwork, order: Sequence[int] | None = None) -> GroundedKernel:
    if net.directed:
        return closed_form_directed(net, order)
    return closed_form_undirected(net, order)


def factorization_check(net: LeaderNetwork) -> float:
    """Max-norm residual of L_gd^T L_gd - L_gu for a directed tree."""
    if not net.directed:
        raise TopologyError("factorization_check needs a directed tree")
    require_tree(net)
    order = default_order(net)
    Ld = grounded_system(net, order).L_g
    Lu = grounded_system(net.undirected(), order).L_g
    return float(np.max(np.abs(Ld.T @ Ld - Lu)))


def sigma_max(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("sigma_max needs a non-empty 2-D matrix")
    return float(sigma_max_batch(M[None])[0])


def sigma_max_batch(stack: np.ndarray) -> np.ndarray:
    """Largest singular value of every matrix in a (..., p, q) stack.

    Uses the symmetric eigensolve of the smaller Gram matrix. Works for
    complex stacks too.
    """
    stack = np.asarray(stack)
    p, q = stack.shape[-2:]
    if p == 1 and q == 1:
        return np.abs(stack[..., 0, 0]).astype(float)
    H = np.conj(np.swapaxes(stack, -1, -2))
    gram = H @ stack if q <= p else stack @ H
    lam = np.linalg.eigvalsh(gram)[..., -1]
    return np.sqrt(np.clip(lam.real, 0.0, None))


def two_tree_count(net: LeaderNetwork, i: int, j: int) -> int:
    """Spanning 2-trees of a tree with i, j on one side and the leader on the other.

    Enumerated by deleting each edge in turn and inspecting the components.
    """
    if net.directed:
        raise TopologyError("two_tree_count needs an undirected tree")
    require_tree(net)
    count = 0
    for side in _leaderless_sides(net):
        if i in side and j in side:
            count += 1
    return count


def two_tree_matrix(net: LeaderNetwork, order: Sequence[int] | None = None) -> np.ndarray:
    """All-pairs version of :func:`two_tree_count` over one pass of edge deletions."""
    if net.directed:
        raise TopologyError("two_tree_matrix needs an undirected tree")
    require_tree(net)
    order = net.followers if order is None else tuple(order)
    pos = {v: a for a, v in enumerate(order)}
    out = np.zeros((len(order), len(order)), dtype=int)
    for side in _leaderless_sides(net):
        idx = [pos[v] for v in side]
        out[np.ix_(idx, idx)] += 1
    return out


def _leaderless_sides(net: LeaderNetwork):
    for cut in range(len(net.edges)):
        adj: list[list[int]] = [[] for _ in range(net.n)]
        for e, (u, v) in enumerate(net.edges):
            if e != cut:
                adj[u].append(v)
                adj[v].append(u)
        with_leader = _bfs(adj, net.leader)
        yield frozenset(v for v in range(net.n) if v not in with_leader)
