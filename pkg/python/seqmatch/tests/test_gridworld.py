# Licensed to the Apache Software Foundation (ASF) under one
# or more contributor license agreements.  See the NOTICE file
# distributed with this work for additional information
# regarding copyright ownership.  The ASF licenses this file
# to you under the Apache License, Version 2.0 (the
# "License"); you may not use this file except in compliance
# with the License.  You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, either express or implied.  See the License for the
# specific language governing permissions and limitations
# under the License.

import numpy as np
import pytest

from seqmatch.common import InvalidInputError
from seqmatch.config import RewardConfig
from seqmatch.gridworld import (
    EQUAL,
    FIXTURE_TASKS,
    PLUS_GREATER,
    SCENARIOS,
    Claim,
    GridAction,
    GridSpec,
    Scenario,
    cells_to_trajectory,
    check_claims,
    get_task,
    ground_truth_return,
    ground_truth_rewards,
    is_feasible,
    scenario_rewards,
    step,
    trajectory_to_cells,
    walk,
)


@pytest.fixture
def grid():
    return GridSpec(5, 5)


def test_step(grid):
    assert step((0, 0), GridAction.UP, grid) == (0, 1)
    assert step((0, 0), GridAction.LEFT, grid) == (0, 0)
    assert step((2, 2), GridAction.STAY, grid) == (2, 2)
    assert step((4, 4), GridAction.RIGHT, grid) == (4, 4)
    assert step((4, 4), GridAction.DOWN, grid) == (4, 3)


def test_step_errors(grid):
    with pytest.raises(TypeError, match="GridAction"):
        step((0, 0), "up", grid)
    with pytest.raises(InvalidInputError, match="outside the grid"):
        step((7, 0), GridAction.UP, grid)


def test_grid_spec_validation():
    with pytest.raises(InvalidInputError):
        GridSpec(0, 3)
    with pytest.raises(InvalidInputError, match="start"):
        GridSpec(3, 3, start=(3, 0))


def test_walk_and_feasibility(grid):
    cells = walk(grid.start, "uur.d", grid)
    assert cells == [(0, 0), (0, 1), (0, 2), (1, 2), (1, 2), (1, 1)]
    assert is_feasible(cells, grid)
    assert not is_feasible([(0, 0), (1, 1)], grid)
    assert not is_feasible([(1, 0), (1, 1)], grid)
    assert trajectory_to_cells(cells_to_trajectory(cells)) == cells


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenarios_are_feasible(name):
    scenario = SCENARIOS[name]()
    for traj in (scenario.xi_plus, scenario.xi_minus):
        assert is_feasible(trajectory_to_cells(traj), scenario.grid)
        assert traj.length == scenario.grid.horizon


def test_ot_ordering_is_a_reversal(ot_ordering):
    assert ot_ordering.xi_minus.equals(ot_ordering.xi_plus.reversed())


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenario_claims_hold(name):
    results = check_claims(SCENARIOS[name]())
    assert results
    for result in results:
        assert result.passed, result.claim.describe()


def test_ot_ordering_values(ot_ordering):
    series = scenario_rewards(ot_ordering)
    assert series["xi_plus"]["ot"].sum() == pytest.approx(
        series["xi_minus"]["ot"].sum(), abs=1e-6
    )
    assert series["xi_plus"]["dtw"].sum() == pytest.approx(-22.0)
    assert series["xi_plus"]["orca"].sum() > series["xi_minus"]["orca"].sum()


def test_dtw_stall_values(dtw_stall):
    series = scenario_rewards(dtw_stall)
    assert series["xi_plus"]["dtw"].sum() == 0.0
    assert series["xi_minus"]["dtw"].sum() == 0.0
    plus, minus = series["xi_plus"]["orca"], series["xi_minus"]["orca"]
    assert np.all(plus[2:9] > minus[2:9])
    assert ground_truth_return(dtw_stall.xi_plus, dtw_stall.demo) == 7
    assert ground_truth_return(dtw_stall.xi_minus, dtw_stall.demo) == 1


def test_tot_slow_ground_truth(tot_slow):
    assert ground_truth_return(tot_slow.xi_plus, tot_slow.demo) == 1
    assert ground_truth_return(tot_slow.xi_minus, tot_slow.demo) == 0


def test_tampered_scenario_fails(ot_ordering):
    tampered = Scenario(
        "tampered",
        ot_ordering.grid,
        ot_ordering.demo,
        ot_ordering.xi_minus,
        ot_ordering.xi_plus,
        (Claim("orca", PLUS_GREATER), Claim("ot", EQUAL, 1e-6)),
    )
    results = check_claims(tampered)
    assert [r.passed for r in results] == [False, True]


def test_scenario_to_json(dtw_stall):
    document = dtw_stall.to_json()
    assert document["name"] == "dtw_stall"
    assert document["demo"]["dim"] == 2
    assert len(document["xi_plus"]["frames"]) == 10
    assert [c["fn"] for c in document["claims"]] == ["dtw", "orca", "orca"]
    assert document["claims"][2]["span"] == [2, 8]


def test_scenario_rejects_unequal_lengths(ot_ordering):
    with pytest.raises(InvalidInputError, match="equal length"):
        Scenario(
            "bad",
            ot_ordering.grid,
            ot_ordering.demo,
            ot_ordering.xi_plus,
            ot_ordering.xi_plus.prefix(3),
        )


def test_ground_truth_never_reaching_goal():
    demo = cells_to_trajectory([(1, 0), (3, 0)])
    traj = cells_to_trajectory([(0, 0), (1, 0), (2, 0), (2, 0)])
    assert ground_truth_return(traj, demo) == 0


def test_ground_truth_counts_frames_on_goal():
    grid = GridSpec(4, 1, horizon=6)
    demo = cells_to_trajectory([(1, 0), (3, 0)])
    traj = cells_to_trajectory(walk(grid.start, "rrr..", grid))
    # goal reached at the 4th of 6 frames
    assert ground_truth_return(traj, demo) == 6 - 4 + 1
    np.testing.assert_array_equal(ground_truth_rewards(traj, demo), [0, 0, 0, 1, 1, 1])


def test_ground_truth_requires_order():
    grid = GridSpec(3, 3, horizon=6)
    demo = cells_to_trajectory([(0, 2), (2, 0)])
    traj = cells_to_trajectory(walk(grid.start, "rr...", grid))
    assert ground_truth_return(traj, demo) == 0


def test_ground_truth_leaving_goal():
    grid = GridSpec(3, 1, horizon=5)
    demo = cells_to_trajectory([(2, 0)])
    traj = cells_to_trajectory(walk(grid.start, "rrl.", grid))
    np.testing.assert_array_equal(ground_truth_rewards(traj, demo), [0, 0, 1, 0, 0])


@pytest.mark.parametrize("name, expected", [("tot_slow", 1), ("stick_push", 3)])
def test_fixture_tasks(name, expected):
    task = get_task(name)
    assert task.expert.length == task.horizon
    assert is_feasible(trajectory_to_cells(task.expert), task.grid)
    assert ground_truth_return(task.expert, task.demo) == expected


def test_stick_push_shortcut_fails():
    task = get_task("stick_push")
    shortcut = cells_to_trajectory(walk(task.grid.start, "rrrr......", task.grid))
    assert ground_truth_return(shortcut, task.demo) == 0


def test_stick_push_needs_the_stick():
    task = get_task("stick_push")
    half = cells_to_trajectory(walk(task.grid.start, "udrrrr....", task.grid))
    late = cells_to_trajectory(walk(task.grid.start, ".uuddrrrr.", task.grid))
    assert ground_truth_return(half, task.demo) == 0
    assert ground_truth_return(late, task.demo) == 2


def test_task_reward_config():
    assert get_task("tot_slow").reward == RewardConfig.grid()
    task = get_task("stick_push")
    assert task.reward.lam == 0.3
    assert task.reward.k_w == 0
    shorter = task.with_horizon(9)
    assert shorter.horizon == 9
    assert shorter.reward == task.reward
    assert shorter.demo is task.demo


def test_unknown_task():
    assert set(FIXTURE_TASKS) == {"tot_slow", "stick_push"}
    with pytest.raises(InvalidInputError, match="unknown task"):
        get_task("humanoid")


def test_ot_blind_to_reversal_at_any_lambda(ot_ordering):
    config = RewardConfig.grid().with_lambda(2.0)
    ot = [r for r in check_claims(ot_ordering, config) if r.claim.fn == "ot"]
    assert len(ot) == 1 and ot[0].passed
