"""Placement game on a vehicle platoon running cooperative adaptive cruise control.

At zero frequency the attack-to-sensor transfer of the platoon is the
consensus kernel divided by the position gain ``k_p``, so the game is the
consensus game with ``scale = 1 / k_p``. The velocity gain and the spacing
vector only matter for time-domain simulation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import TopologyError, UnsupportedPredictionError
from .game import (
    TIE_TOL,
    GameInstance,
    PlacementPair,
    brute_force_size,
    pure_nash_all,
    stackelberg_bruteforce,
    stackelberg_tree,
    MAX_EVALUATIONS,
)
from .spectral import closed_form_kernel
from .topology import DIRECTED, MODES, LeaderNetwork, generate

DEFAULT_GAP = 10.0


@dataclass(frozen=True)
class PlatoonScenario:
    n: int
    leader_position: int = 0
    mode: str = "undirected"
    k_p: float = 1.0
    k_u: float = 1.0
    spacing: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a platoon needs at least two vehicles")
        if not 0 <= self.leader_position < self.n:
            raise ValueError("leader_position out of range")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (self.k_p > 0 and self.k_u > 0):
            raise ValueError("k_p and k_u must be positive")
        if not self.spacing:
            default = spacing_from_gap(self.n, DEFAULT_GAP, self.leader_position, self.mode)
            object.__setattr__(self, "spacing", tuple(default))
        if len(self.spacing) != self.n:
            raise ValueError(f"spacing must have length n={self.n}")

    @property
    def leader_at_end(self) -> bool:
        return self.leader_position in (0, self.n - 1)

    def network(self) -> LeaderNetwork:
        return generate("platoon", self.n, self.leader_position, self.mode)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "leader_position": self.leader_position,
            "mode": self.mode,
            "k_p": self.k_p,
            "k_u": self.k_u,
            "spacing": list(self.spacing),
        }


def spacing_from_gap(n: int, gap: float, leader_position: int = 0, mode: str = "undirected") -> list[float]:
    """Aggregated spacing vector for a line with uniform inter-vehicle ``gap``.

    Vehicle ``k`` sits at desired coordinate ``-k * gap`` so the front of the
    line is vehicle 0; entry ``i`` sums ``r_i - r_j`` over the neighbours ``j``
    that vehicle ``i`` listens to.
    """
    r = [-k * gap for k in range(n)]
    out = []
    for i in range(n):
        if i == leader_position:
            out.append(0.0)
            continue
        if mode == DIRECTED:
            upstream = i - 1 if i > leader_position else i + 1
            nbrs = [upstream]
        else:
            nbrs = [j for j in (i - 1, i + 1) if 0 <= j < n]
        out.append(float(sum(r[i] - r[j] for j in nbrs)))
    return out


def scenario_from_dict(data: dict) -> PlatoonScenario:
    try:
        return PlatoonScenario(
            n=int(data["n"]),
            leader_position=int(data.get("leader_position", 0)),
            mode=data.get("mode", "undirected"),
            k_p=float(data.get("k_p", 1.0)),
            k_u=float(data.get("k_u", 1.0)),
            spacing=tuple(float(x) for x in data.get("spacing", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario: {exc}") from exc


def load_scenario(path) -> PlatoonScenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def platoon_game(scn: PlatoonScenario, f: int) -> GameInstance:
    return GameInstance(closed_form_kernel(scn.network()), f, 1.0 / scn.k_p)


def platoon_ne_prediction(scn: PlatoonScenario, f: int) -> PlacementPair:
    """Predicted pure equilibrium for a platoon led from one end.

    Undirected: the attacker takes the f followers closest to the leader and
    the detector the f farthest. Directed: both take the f farthest.
    """
    if not scn.leader_at_end:
        raise UnsupportedPredictionError("no equilibrium prediction for an interior leader")
    net = scn.network()
    game = platoon_game(scn, f)
    dist = net.leader_distances()
    order = game.kernel.follower_order
    by_distance = sorted(range(len(order)), key=lambda a: dist[order[a]])
    closest, farthest = by_distance[:f], by_distance[-f:]
    if scn.mode == DIRECTED:
        return PlacementPair.of(farthest, farthest)
    return PlacementPair.of(closest, farthest)


class SweepRow(NamedTuple):
    leader_position: int
    value: float
    ne_exists: bool
    strategy: PlacementPair
    order: tuple[int, ...]
    boundary_ok: bool


def leader_placement_sweep(n: int, f: int, mode: str = "undirected", k_p: float = 1.0) -> list[SweepRow]:
    """Stackelberg value for each leader position on an n-vehicle line.

    ``boundary_ok`` is True at the ends, and at interior positions says
    whether the value does not exceed the value at either end.
    """
    if n < 3:
        raise ValueError("the sweep needs at least three vehicles")
    raw = []
    for p in range(n):
        scn = PlatoonScenario(n, p, mode, k_p)
        game = platoon_game(scn, f)
        if brute_force_size(game) <= MAX_EVALUATIONS:
            rep = stackelberg_bruteforce(game)
            ne = pure_nash_all(game) is not None
        else:
            rep = stackelberg_tree(game, scn.network())
            ne = False
        raw.append((p, rep, ne, game.kernel.follower_order))
    end_value = min(raw[0][1].value, raw[-1][1].value)
    rows = []
    for p, rep, ne, order in raw:
        ok = p in (0, n - 1) or rep.value <= end_value + TIE_TOL
        rows.append(SweepRow(p, rep.value, ne, rep.strategies[0], order, ok))
    return rows


def _nodes(order: Sequence[int], positions: Sequence[int]) -> str:
    return ";".join(str(order[a]) for a in positions)


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    """CSV with strategies written as vehicle (node) indices."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["position", "value", "ne_exists", "strategies", "boundary_ok"])
    for r in rows:
        strat = f"detector={_nodes(r.order, r.strategy.detector)}|attacker={_nodes(r.order, r.strategy.attacker)}"
        w.writerow([r.leader_position, f"{r.value:.12g}", int(r.ne_exists), strat, int(r.boundary_ok)])
    return buf.getvalue()


def kernel_entry(scn: PlatoonScenario, detector_node: int, attacker_node: int) -> float:
    k = closed_form_kernel(scn.network())
    return float(k.inv[k.position(detector_node), k.position(attacker_node)])


def dc_matrix(scn: PlatoonScenario, attackers: Sequence[int], detectors: Sequence[int]) -> np.ndarray:
    """(1/k_p) C L_g^-1 B with node-indexed attacker and detector lists."""
    k = closed_form_kernel(scn.network())
    rows = [k.position(d) for d in detectors]
    cols = [k.position(a) for a in attackers]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise TopologyError("duplicate vehicle in placement")
    return k.inv[np.ix_(rows, cols)] / scn.k_p
