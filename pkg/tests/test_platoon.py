import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sensorgame.errors import UnsupportedPredictionError
from sensorgame.game import PlacementPair, payoff, pure_nash_all, saddle_check, stackelberg_bruteforce
from sensorgame.platoon import (
    PlatoonScenario,
    dc_matrix,
    kernel_entry,
    leader_placement_sweep,
    platoon_game,
    platoon_ne_prediction,
    scenario_from_dict,
    spacing_from_gap,
    sweep_to_csv,
)
from sensorgame.spectral import closed_form_kernel
from sensorgame.topology import generate

GOLDEN = (1 + math.sqrt(5)) / 2


def test_scenario_validation():
    with pytest.raises(ValueError):
        PlatoonScenario(1)
    with pytest.raises(ValueError):
        PlatoonScenario(4, leader_position=4)
    with pytest.raises(ValueError):
        PlatoonScenario(4, k_p=0)
    with pytest.raises(ValueError):
        PlatoonScenario(4, spacing=(0.0, 1.0))
    with pytest.raises(ValueError):
        scenario_from_dict({"mode": "directed"})
    scn = scenario_from_dict({"n": 4, "k_p": 2})
    assert scn.k_p == 2.0 and len(scn.spacing) == 4


def test_default_spacing():
    # vehicle k desires coordinate -10 k
    assert spacing_from_gap(4, 10.0) == [0.0, 0.0, 0.0, -10.0]
    assert spacing_from_gap(4, 10.0, 0, "directed") == [0.0, -10.0, -10.0, -10.0]
    assert spacing_from_gap(3, 10.0, 2, "directed") == [10.0, 10.0, 0.0]


def test_game_matches_consensus_path():
    scn = PlatoonScenario(5)
    game = platoon_game(scn, 1)
    consensus = closed_form_kernel(generate("path", 5))
    np.testing.assert_array_equal(game.kernel.inv, consensus.inv)
    assert game.scale == 1.0


def test_k_p_halves_payoffs_and_keeps_strategies():
    one, two = platoon_game(PlatoonScenario(5), 2), platoon_game(PlatoonScenario(5, k_p=2.0), 2)
    pair = PlacementPair.of([0, 1], [2, 3])
    assert payoff(two, pair) == pytest.approx(payoff(one, pair) / 2, rel=1e-12)
    a, b = stackelberg_bruteforce(one), stackelberg_bruteforce(two)
    assert a.strategies == b.strategies
    assert b.value == pytest.approx(a.value / 2, rel=1e-12)


def test_directed_head_f2_value_is_golden_ratio():
    # Both players on the two farthest followers see [[1, 0], [1, 1]].
    for k_p in (0.5, 1.0, 2.0):
        game = platoon_game(PlatoonScenario(4, 0, "directed", k_p), 2)
        rep = pure_nash_all(game)
        assert rep is not None
        assert rep.value == pytest.approx(GOLDEN / k_p, rel=1e-12)


def test_prediction_examples():
    und = platoon_ne_prediction(PlatoonScenario(6), 2)
    assert und == PlacementPair((0, 1), (3, 4))
    d = platoon_ne_prediction(PlatoonScenario(6, 0, "directed"), 2)
    assert d == PlacementPair((3, 4), (3, 4))
    full = platoon_ne_prediction(PlatoonScenario(5), 4)
    assert full == PlacementPair((0, 1, 2, 3), (0, 1, 2, 3))
    with pytest.raises(UnsupportedPredictionError):
        platoon_ne_prediction(PlatoonScenario(5, 2), 1)


def test_prediction_with_leader_at_tail():
    scn = PlatoonScenario(6, 5)
    pair = platoon_ne_prediction(scn, 2)
    order = platoon_game(scn, 2).kernel.follower_order
    assert {order[a] for a in pair.attacker} == {3, 4}
    assert {order[a] for a in pair.detector} == {0, 1}


@given(st.integers(3, 12), st.integers(1, 4), st.sampled_from(["undirected", "directed"]),
       st.booleans(), st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=80, deadline=None)
def test_prediction_passes_saddle_check(n, f, mode, tail, k_p):
    f = min(f, n - 1)
    scn = PlatoonScenario(n, n - 1 if tail else 0, mode, k_p)
    game = platoon_game(scn, f)
    assert saddle_check(game, platoon_ne_prediction(scn, f))


@given(st.integers(3, 10), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_undirected_platoon_value_at_least_directed(n, f):
    f = min(f, n - 1)
    vals = []
    for mode in ("undirected", "directed"):
        scn = PlatoonScenario(n, 0, mode)
        vals.append(payoff(platoon_game(scn, f), platoon_ne_prediction(scn, f)))
    assert vals[0] >= vals[1] - 1e-9


def test_sweep_n6_f1_maximal_at_ends():
    rows = leader_placement_sweep(6, 1)
    values = [r.value for r in rows]
    assert values[0] == max(values) == values[-1]
    assert all(r.boundary_ok for r in rows)
    assert [r.ne_exists for r in rows] == [True, False, False, False, False, True]


def test_sweep_n3_middle_has_no_ne():
    rows = leader_placement_sweep(3, 1)
    assert not rows[1].ne_exists
    assert rows[1].value == stackelberg_bruteforce(platoon_game(PlatoonScenario(3, 1), 1)).value
    with pytest.raises(ValueError):
        leader_placement_sweep(2, 1)


@pytest.mark.parametrize("f", [1, 2, 3])
def test_sweep_interior_bounded_by_ends(f):
    for n in range(4, 10):
        assert all(r.boundary_ok for r in leader_placement_sweep(n, f))


def test_sweep_csv():
    text = sweep_to_csv(leader_placement_sweep(4, 1))
    lines = text.splitlines()
    assert lines[0] == "position,value,ne_exists,strategies,boundary_ok"
    assert len(lines) == 5
    assert lines[1].startswith("0,1,1,")


def test_kernel_entry_and_dc_matrix():
    scn = PlatoonScenario(4, k_p=2.0)
    assert kernel_entry(scn, 3, 1) == 1.0
    assert kernel_entry(scn, 3, 2) == 2.0
    np.testing.assert_array_equal(dc_matrix(scn, [1, 2], [2, 3]), [[0.5, 1.0], [0.5, 1.0]])
