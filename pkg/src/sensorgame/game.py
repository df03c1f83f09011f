"""The zero-sum attacker/detector placement game.

The detector picks ``f`` kernel rows (sensor locations) and wants the payoff
large; the attacker picks ``f`` kernel columns (attacked followers) and wants
it small. The payoff is ``scale * sigma_max(kernel[rows][:, cols])``.

Strategy sets are expressed as kernel positions, i.e. indices into
``kernel.follower_order``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GuardExceededError, InfeasiblePartitionError, InvariantError, TopologyError
from .spectral import GroundedKernel, closed_form_kernel, sigma_max, sigma_max_batch
from .topology import (
    LeaderNetwork,
    is_directed_path,
    is_leader_cut_vertex,
    leader_rooted_paths,
    require_tree,
)

TIE_TOL = 1e-9
MAX_EVALUATIONS = 10**7
_CHUNK = 200_000  # payoff evaluations per vectorised batch


@dataclass(frozen=True)
class GameInstance:
    kernel: GroundedKernel
    f: int
    scale: float = 1.0

    def __post_init__(self):
        k = self.kernel.inv.shape
        if len(k) != 2 or k[0] != k[1]:
            raise ValueError("kernel must be square")
        if not 1 <= self.f <= k[0]:
            raise ValueError(f"f={self.f} must lie in [1, {k[0]}]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def size(self) -> int:
        return self.kernel.inv.shape[0]

    def scaled(self, factor: float) -> "GameInstance":
        return GameInstance(self.kernel, self.f, self.scale * factor)


@dataclass(frozen=True)
class PlacementPair:
    attacker: tuple[int, ...]
    detector: tuple[int, ...]

    @classmethod
    def of(cls, attacker: Sequence[int], detector: Sequence[int]) -> "PlacementPair":
        return cls(tuple(sorted(int(a) for a in attacker)), tuple(sorted(int(d) for d in detector)))

    def validate(self, game: GameInstance) -> None:
        for name, s in (("attacker", self.attacker), ("detector", self.detector)):
            if len(s) != game.f:
                raise ValueError(f"{name} set must have exactly f={game.f} members")
            if len(set(s)) != len(s):
                raise ValueError(f"duplicate index in {name} set")
            if any(not 0 <= x < game.size for x in s):
                raise IndexError(f"{name} index out of range")

    def to_dict(self) -> dict:
        return {"attacker": list(self.attacker), "detector": list(self.detector)}


@dataclass
class EquilibriumReport:
    kind: str  # "pure_nash" | "stackelberg"
    strategies: list[PlacementPair]
    value: float
    certified_by: str  # "saddle_check" | "brute_force" | "segment_partition"
    evaluations: int = 0
    order: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": float(f"{self.value:.12g}"),
            "strategies": [p.to_dict() for p in self.strategies],
            "certified_by": self.certified_by,
            "evaluations": self.evaluations,
            "order": list(self.order),
        }


@dataclass(frozen=True)
class ConstrainedPartition:
    parts: tuple[int, ...]
    caps: tuple[int, ...]


def payoff(game: GameInstance, pair: PlacementPair) -> float:
    pair.validate(game)
    sub = game.kernel.inv[np.ix_(pair.detector, pair.attacker)]
    return game.scale * sigma_max(sub)


def placements(k: int, f: int) -> np.ndarray:
    """All f-subsets of range(k) as rows, in lexicographic order."""
    return np.array(list(itertools.combinations(range(k), f)), dtype=np.intp).reshape(-1, f)


def payoff_table(game: GameInstance, detectors: np.ndarray, attackers: np.ndarray) -> np.ndarray:
    """Payoffs for every (detector row set, attacker column set) combination."""
    K = game.kernel.inv
    nb = len(attackers)
    out = np.empty((len(detectors), nb))
    step = max(1, _CHUNK // max(nb, 1))
    for start in range(0, len(detectors), step):
        C = detectors[start:start + step]
        sub = K[C[:, None, :, None], attackers[None, :, None, :]]
        out[start:start + step] = sigma_max_batch(sub)
    return game.scale * out


def _guard(count: int) -> None:
    if count > MAX_EVALUATIONS:
        raise GuardExceededError(
            f"{count} payoff evaluations exceed the brute-force limit of {MAX_EVALUATIONS}"
        )


def brute_force_size(game: GameInstance) -> int:
    return math.comb(game.size, game.f) ** 2


def saddle_check(game: GameInstance, pair: PlacementPair, tol: float = TIE_TOL) -> bool:
    """Neither player gains by a unilateral deviation from ``pair``."""
    pair.validate(game)
    sets = placements(game.size, game.f)
    _guard(2 * len(sets))
    v = payoff(game, pair)
    best_detector = payoff_table(game, sets, np.array([pair.attacker])).max()
    best_attacker = payoff_table(game, np.array([pair.detector]), sets).min()
    return bool(best_detector <= v + tol and v <= best_attacker + tol)


def pure_nash_all(game: GameInstance, tol: float = TIE_TOL) -> EquilibriumReport | None:
    """Every pure saddle point of the game, or ``None`` when there is none."""
    _guard(brute_force_size(game))
    sets = placements(game.size, game.f)
    P = payoff_table(game, sets, sets)
    col_max = P.max(axis=0, keepdims=True)
    row_min = P.min(axis=1, keepdims=True)
    hits = np.argwhere((P >= col_max - tol) & (P <= row_min + tol))
    if len(hits) == 0:
        return None
    values = P[hits[:, 0], hits[:, 1]]
    if values.max() - values.min() > tol:
        raise InvariantError("pure equilibria of a zero-sum game disagree in value")
    strategies = [
        PlacementPair(tuple(int(x) for x in sets[b]), tuple(int(x) for x in sets[c]))
        for c, b in hits
    ]
    return EquilibriumReport(
        "pure_nash", strategies, float(values[0]), "saddle_check", P.size,
        game.kernel.follower_order,
    )


class NEPrediction(NamedTuple):
    exists: bool
    value: float | None


def predict_ne_f1(net: LeaderNetwork) -> NEPrediction:
    """Structural prediction of a single-sensor pure equilibrium on a tree."""
    require_tree(net)
    if net.directed:
        exists = is_directed_path(net)
    else:
        exists = not is_leader_cut_vertex(net)
    return NEPrediction(exists, 1.0 if exists else None)


def _first_within(values: np.ndarray, target: float, tol: float, above: bool) -> int:
    ok = values >= target - tol if above else values <= target + tol
    return int(np.argmax(ok))


def stackelberg_bruteforce(game: GameInstance, tol: float = TIE_TOL) -> EquilibriumReport:
    """max over detector sets of min over attacker sets, by full enumeration.

    Ties go to the lexicographically smallest set, for both players.
    """
    _guard(brute_force_size(game))
    sets = placements(game.size, game.f)
    P = payoff_table(game, sets, sets)
    row_min = P.min(axis=1)
    c = _first_within(row_min, row_min.max(), tol, above=True)
    b = _first_within(P[c], row_min[c], tol, above=False)
    pair = PlacementPair(tuple(int(x) for x in sets[b]), tuple(int(x) for x in sets[c]))
    return EquilibriumReport(
        "stackelberg", [pair], float(P[c, b]), "brute_force", P.size, game.kernel.follower_order
    )


def enumerate_partitions(f: int, caps: Sequence[int]) -> list[ConstrainedPartition]:
    """All (f_1..f_m) with sum f and 0 <= f_i <= caps[i], in lexicographic order."""
    caps = tuple(int(c) for c in caps)
    if f < 0 or any(c < 0 for c in caps):
        raise ValueError("f and caps must be nonnegative")
    if sum(caps) < f:
        raise InfeasiblePartitionError(f"caps {caps} cannot hold f={f}")
    out: list[ConstrainedPartition] = []

    def rec(i: int, remaining: int, acc: list[int]) -> None:
        if i == len(caps) - 1:
            if remaining <= caps[i]:
                out.append(ConstrainedPartition(tuple(acc + [remaining]), caps))
            return
        room_after = sum(caps[i + 1:])
        for x in range(max(0, remaining - room_after), min(caps[i], remaining) + 1):
            rec(i + 1, remaining - x, acc + [x])

    if caps:
        rec(0, f, [])
    return out


def count_partitions(f: int, caps: Sequence[int]) -> int:
    """Number of constrained partitions by a coefficient-extraction DP."""
    ways = [1] + [0] * f
    for cap in caps:
        new = [0] * (f + 1)
        for total in range(f + 1):
            new[total] = sum(ways[total - x] for x in range(0, min(cap, total) + 1))
        ways = new
    return ways[f]


def _segments(game: GameInstance, net: LeaderNetwork) -> list[list[int]]:
    if sorted(game.kernel.follower_order) != list(net.followers):
        raise TopologyError("kernel ordering does not match the network's followers")
    pos = {v: a for a, v in enumerate(game.kernel.follower_order)}
    return [[pos[v] for v in p.segment] for p in leader_rooted_paths(net)]


def stackelberg_tree(game: GameInstance, net: LeaderNetwork, tol: float = TIE_TOL) -> EquilibriumReport:
    """Stackelberg equilibrium on a tree from constrained partitions of f.

    Each leader-rooted path contributes its fresh segment (shallow to deep).
    For a partition, the detector takes the deepest nodes of each segment;
    the attacker takes the shallowest on undirected trees and the deepest on
    directed ones. Exactly S**2 payoffs are evaluated, S being the number of
    partitions.
    """
    require_tree(net)
    segments = _segments(game, net)
    parts = enumerate_partitions(game.f, [len(s) for s in segments])

    def deepest(p: ConstrainedPartition) -> tuple[int, ...]:
        return tuple(sorted(x for s, k in zip(segments, p.parts) if k for x in s[-k:]))

    def shallowest(p: ConstrainedPartition) -> tuple[int, ...]:
        return tuple(sorted(x for s, k in zip(segments, p.parts) for x in s[:k]))

    detectors = np.array([deepest(p) for p in parts], dtype=np.intp)
    attack_rule = deepest if net.directed else shallowest
    attackers = np.array([attack_rule(p) for p in parts], dtype=np.intp)
    P = payoff_table(game, detectors, attackers)
    row_min = P.min(axis=1)
    c = _first_within(row_min, row_min.max(), tol, above=True)
    b = _first_within(P[c], row_min[c], tol, above=False)
    pair = PlacementPair(tuple(int(x) for x in attackers[b]), tuple(int(x) for x in detectors[c]))
    return EquilibriumReport(
        "stackelberg", [pair], float(P[c, b]), "segment_partition", P.size, game.kernel.follower_order
    )


class DirectionComparison(NamedTuple):
    J_d: float
    J_u: float
    ordered: bool


def stackelberg_value(net: LeaderNetwork, f: int, solver: str = "tree", scale: float = 1.0) -> EquilibriumReport:
    game = GameInstance(closed_form_kernel(net), f, scale)
    if solver == "tree":
        return stackelberg_tree(game, net)
    if solver == "brute":
        return stackelberg_bruteforce(game)
    raise ValueError(f"unknown solver {solver!r}")


def compare_directed_undirected(net_directed: LeaderNetwork, f: int, solver: str = "tree") -> DirectionComparison:
    if not net_directed.directed:
        raise TopologyError("compare_directed_undirected needs a directed tree")
    require_tree(net_directed)
    J_d = stackelberg_value(net_directed, f, solver).value
    J_u = stackelberg_value(net_directed.undirected(), f, solver).value
    return DirectionComparison(J_d, J_u, J_d <= J_u + TIE_TOL)
