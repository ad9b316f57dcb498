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

"""
Deterministic 2-D grid navigation, the frozen counterexample scenarios and
the fixture tasks used by the training harness.

Cells are ``(x, y)`` with ``y`` increasing upward. Trajectories embed each
cell as the 2-D vector ``(x, y)`` and are compared with Manhattan distance.
"""

import dataclasses
import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from seqmatch.common import InvalidInputError, Trajectory
from seqmatch.config import RewardConfig

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    start: Cell = (0, 0)
    horizon: int = 10

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("grid width and height must be >= 1")
        if not self.contains(self.start):
            raise InvalidInputError(f"start {self.start} is outside the grid")
        if self.horizon < 1:
            raise InvalidInputError(f"horizon must be >= 1, got {self.horizon}")

    def contains(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def with_horizon(self, horizon: int) -> "GridSpec":
        return GridSpec(self.width, self.height, self.start, horizon)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "width": self.width,
            "height": self.height,
            "start": list(self.start),
            "horizon": self.horizon,
        }


class GridAction(enum.Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"
    STAY = "stay"

    @property
    def delta(self) -> Cell:
        return _DELTAS[self]


_DELTAS = {
    GridAction.UP: (0, 1),
    GridAction.DOWN: (0, -1),
    GridAction.LEFT: (-1, 0),
    GridAction.RIGHT: (1, 0),
    GridAction.STAY: (0, 0),
}

ACTIONS: Tuple[GridAction, ...] = tuple(GridAction)


def step(state: Cell, action: GridAction, grid: GridSpec) -> Cell:
    """Move one cell, clamping at the walls."""
    if not isinstance(action, GridAction):
        raise TypeError(f"expected a GridAction, got {type(action).__name__}")
    if not grid.contains(state):
        raise InvalidInputError(f"state {state} is outside the grid")
    dx, dy = action.delta
    x = min(max(state[0] + dx, 0), grid.width - 1)
    y = min(max(state[1] + dy, 0), grid.height - 1)
    return (x, y)


def cells_to_trajectory(cells: Sequence[Cell]) -> Trajectory:
    return Trajectory(np.asarray(cells, dtype=np.float64).reshape(-1, 2))


def trajectory_to_cells(traj: Trajectory) -> List[Cell]:
    if traj.dim != 2:
        raise InvalidInputError(f"grid trajectories are 2-D, got dim {traj.dim}")
    cells = np.rint(traj.frames).astype(np.int64)
    return [(int(x), int(y)) for x, y in cells]


def walk(start: Cell, moves: str, grid: GridSpec) -> List[Cell]:
    """
    Cells visited by a move string such as ``"uurr.d"`` (u/d/l/r, ``.``
    for stay), starting cell included.
    """
    codes = {
        "u": GridAction.UP,
        "d": GridAction.DOWN,
        "l": GridAction.LEFT,
        "r": GridAction.RIGHT,
        ".": GridAction.STAY,
    }
    cells = [start]
    for code in moves:
        cells.append(step(cells[-1], codes[code], grid))
    return cells


def is_feasible(cells: Sequence[Cell], grid: GridSpec) -> bool:
    """Starts at ``grid.start`` and moves at most one cell along one axis per step."""
    if not cells or tuple(cells[0]) != tuple(grid.start):
        return False
    for a, b in zip(cells, cells[1:]):
        if not grid.contains(b):
            return False
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) > 1:
            return False
    return True


def ground_truth_rewards(traj: Trajectory, demo: Trajectory) -> np.ndarray:
    """
    Binary success reward: 1 while the agent sits on the final subgoal after
    having visited every demonstration subgoal in order.
    """
    cells = trajectory_to_cells(traj)
    subgoals = trajectory_to_cells(demo)
    rewards = np.zeros(len(cells))
    matched = 0
    for t, cell in enumerate(cells):
        while matched < len(subgoals) and cell == subgoals[matched]:
            matched += 1
        if matched == len(subgoals) and cell == subgoals[-1]:
            rewards[t] = 1.0
    return rewards


def ground_truth_return(traj: Trajectory, demo: Trajectory) -> int:
    return int(ground_truth_rewards(traj, demo).sum())


# claim relations
EQUAL = "equal"
PLUS_GREATER = "plus_greater"
MINUS_AT_LEAST = "minus_at_least"
PLUS_GREATER_PER_STEP = "plus_greater_per_step"


@dataclass(frozen=True)
class Claim:
    fn: str
    relation: str
    tolerance: float = 0.0
    # inclusive 0-based timestep span for per-step claims
    span: Optional[Tuple[int, int]] = None

    def describe(self) -> str:
        if self.relation == EQUAL:
            return f"{self.fn} total(xi+) == total(xi-) within {self.tolerance:g}"
        if self.relation == PLUS_GREATER:
            return f"{self.fn} total(xi+) > total(xi-)"
        if self.relation == MINUS_AT_LEAST:
            return f"{self.fn} total(xi-) >= total(xi+)"
        return f"{self.fn} r_t(xi+) > r_t(xi-) for t in {self.span}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fn": self.fn,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "span": list(self.span) if self.span else None,
            "description": self.describe(),
        }


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    grid: GridSpec
    demo: Trajectory
    xi_plus: Trajectory
    xi_minus: Trajectory
    claims: Tuple[Claim, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.xi_plus.length != self.xi_minus.length:
            raise InvalidInputError("xi+ and xi- must have equal length")

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "grid": self.grid.to_dict(),
            "demo": self.demo.to_dict(),
            "xi_plus": self.xi_plus.to_dict(),
            "xi_minus": self.xi_minus.to_dict(),
            "claims": [c.to_dict() for c in self.claims],
        }


def scenario_ot_ordering() -> Scenario:
    """
    Clockwise unit-step loop around a 5x5 grid against its exact reversal.
    The demonstrator jumps between the four corners.
    """
    grid = GridSpec(5, 5, (0, 0), 17)
    demo = cells_to_trajectory([(0, 4), (4, 4), (4, 0), (0, 0)])
    loop = walk(grid.start, "uuuurrrrddddllll", grid)
    xi_plus = cells_to_trajectory(loop)
    return Scenario(
        "ot_ordering",
        grid,
        demo,
        xi_plus,
        xi_plus.reversed(),
        (
            Claim("ot", EQUAL, 1e-6),
            Claim("orca", PLUS_GREATER),
            Claim("dtw", PLUS_GREATER),
        ),
    )


def scenario_dtw_stall() -> Scenario:
    """
    Corridor with four adjacent subgoals. xi- stalls on the second subgoal
    and sprints through the rest at the very end.
    """
    grid = GridSpec(4, 1, (0, 0), 10)
    demo = cells_to_trajectory([(0, 0), (1, 0), (2, 0), (3, 0)])
    xi_plus = cells_to_trajectory(walk(grid.start, "rrr......", grid))
    xi_minus = cells_to_trajectory(walk(grid.start, "r......rr", grid))
    return Scenario(
        "dtw_stall",
        grid,
        demo,
        xi_plus,
        xi_minus,
        (
            Claim("dtw", EQUAL, 1e-9),
            Claim("orca", PLUS_GREATER),
            # xi+ passes the second subgoal at t=2; both finish on the goal at t=9
            Claim("orca", PLUS_GREATER_PER_STEP, span=(2, 8)),
        ),
    )


def scenario_tot_slow() -> Scenario:
    """
    17-cell corridor whose horizon only allows finishing by moving right on
    every step. xi- pauses once on each of the first two subgoals and runs
    out of time two cells short.
    """
    grid = GridSpec(17, 1, (0, 0), 17)
    demo = cells_to_trajectory([(0, 0), (2, 0), (4, 0), (16, 0)])
    xi_plus = cells_to_trajectory(walk(grid.start, "r" * 16, grid))
    xi_minus = cells_to_trajectory(walk(grid.start, "rr.rr." + "r" * 10, grid))
    return Scenario(
        "tot_slow",
        grid,
        demo,
        xi_plus,
        xi_minus,
        (
            Claim("tot", MINUS_AT_LEAST),
            Claim("orca", PLUS_GREATER),
            Claim("ground_truth", PLUS_GREATER),
        ),
    )


SCENARIOS: Dict[str, Callable[[], Scenario]] = {
    "ot_ordering": scenario_ot_ordering,
    "dtw_stall": scenario_dtw_stall,
    "tot_slow": scenario_tot_slow,
}


@dataclass(frozen=True)
class ClaimResult:
    scenario: str
    claim: Claim
    plus: float
    minus: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        values = self.claim.to_dict()
        values.update(
            scenario=self.scenario, plus=self.plus, minus=self.minus, passed=self.passed
        )
        return values


def scenario_rewards(
    scenario: Scenario, config: Optional[RewardConfig] = None
) -> Dict[str, Dict[str, np.ndarray]]:
    """Every reward function (and the ground truth) on xi+ and xi-."""
    from seqmatch.rewards import COMPARE_COLUMNS, GROUND_TRUTH, compute_rewards

    config = config or RewardConfig.grid()
    series: Dict[str, Dict[str, np.ndarray]] = {}
    for label, traj in (("xi_plus", scenario.xi_plus), ("xi_minus", scenario.xi_minus)):
        series[label] = {
            key: compute_rewards(key, traj, scenario.demo, config).rewards
            for key in COMPARE_COLUMNS
        }
        series[label][GROUND_TRUTH] = ground_truth_rewards(traj, scenario.demo)
    return series


def check_claims(
    scenario: Scenario, config: Optional[RewardConfig] = None
) -> List[ClaimResult]:
    series = scenario_rewards(scenario, config)
    results = []
    for claim in scenario.claims:
        plus = series["xi_plus"][claim.fn]
        minus = series["xi_minus"][claim.fn]
        if claim.relation == PLUS_GREATER_PER_STEP:
            lo, hi = claim.span
            gaps = plus[lo : hi + 1] - minus[lo : hi + 1]
            passed = bool(np.all(gaps > 0))
            p, m = float(plus[lo : hi + 1].sum()), float(minus[lo : hi + 1].sum())
        else:
            p, m = float(plus.sum()), float(minus.sum())
            if claim.relation == EQUAL:
                passed = abs(p - m) <= claim.tolerance
            elif claim.relation == PLUS_GREATER:
                passed = p > m
            elif claim.relation == MINUS_AT_LEAST:
                passed = m >= p - claim.tolerance
            else:
                raise InvalidInputError(f"unknown claim relation `{claim.relation}`")
        logger.debug("%s: %s -> %s", scenario.name, claim.describe(), passed)
        results.append(ClaimResult(scenario.name, claim, p, m, passed))
    return results


@dataclass(frozen=True, eq=False)
class GridTask:
    """
    Navigation task for the training harness: the agent is rewarded for
    visiting the demonstration frames in order and staying on the last.
    ``reward`` holds the hyperparameters the learned rewards use on this
    task unless a run overrides them.
    """

    name: str
    grid: GridSpec
    demo: Trajectory
    expert: Trajectory
    reward: RewardConfig = field(default_factory=RewardConfig.grid)

    @property
    def horizon(self) -> int:
        return self.grid.horizon

    def with_horizon(self, horizon: int) -> "GridTask":
        return dataclasses.replace(self, grid=self.grid.with_horizon(horizon))


def task_tot_slow() -> GridTask:
    scenario = scenario_tot_slow()
    return GridTask("tot_slow", scenario.grid, scenario.demo, scenario.xi_plus)


def task_stick_push() -> GridTask:
    """
    Two-phase task on a 5x3 grid: fetch the stick at (0, 2), come back
    down, then push the object along the bottom edge to (4, 0). The demo
    is the expert run itself, so success means replaying every phase.

    With a soft ``lam`` ordered coverage scores a half detour that turns
    back at (0, 1) above the full one, because it arrives two steps
    earlier; the window of 0 makes TemporalOT a per-frame tracking
    reward whose best rollout is the expert.
    """
    grid = GridSpec(5, 3, (0, 0), 11)
    expert = cells_to_trajectory(walk(grid.start, "uuddrrrr..", grid))
    reward = RewardConfig.grid().with_lambda(0.3).with_window(0)
    return GridTask("stick_push", grid, expert, expert, reward)


FIXTURE_TASKS: Dict[str, Callable[[], GridTask]] = {
    "tot_slow": task_tot_slow,
    "stick_push": task_stick_push,
}


def get_task(name: str) -> GridTask:
    try:
        return FIXTURE_TASKS[name]()
    except KeyError:
        raise InvalidInputError(
            f"unknown task `{name}`; expected one of {sorted(FIXTURE_TASKS)}"
        ) from None
