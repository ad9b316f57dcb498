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
Tabular Q-learning harness for the grid tasks.

Rewards are computed once per finished episode from the whole trajectory,
so every reward function, causal or not, trains the agent the same way.
The state carries the elapsed fraction of the episode as a time bucket.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from seqmatch.common import InvalidInputError, SeqMatchError, Trajectory
from seqmatch.config import RewardConfig, TrainConfig
from seqmatch.gridworld import (
    ACTIONS,
    Cell,
    GridAction,
    GridSpec,
    GridTask,
    cells_to_trajectory,
    get_task,
    ground_truth_return,
    ground_truth_rewards,
    step,
    trajectory_to_cells,
)
from seqmatch.rewards import GROUND_TRUTH, compute_rewards

logger = logging.getLogger(__name__)

_ACTION_INDEX = {a: i for i, a in enumerate(ACTIONS)}


class AugmentedState(NamedTuple):
    cell: Cell
    time_bucket: int


def time_bucket(t: int, horizon: int, buckets: int) -> int:
    return min(buckets - 1, (buckets * t) // horizon)


class QTable:
    """
    Action values over (cell, time bucket) states. Entries never written
    read as ``q_init``.
    """

    def __init__(self, horizon: int, time_buckets: Optional[int] = None, q_init: float = 0.0):
        if horizon < 1:
            raise InvalidInputError(f"horizon must be >= 1, got {horizon}")
        self.horizon = int(horizon)
        self.time_buckets = int(time_buckets or horizon)
        self.q_init = float(q_init)
        self._values: Dict[AugmentedState, np.ndarray] = {}
        self._written: Dict[AugmentedState, np.ndarray] = {}

    def state(self, cell: Cell, t: int) -> AugmentedState:
        return AugmentedState(
            (int(cell[0]), int(cell[1])), time_bucket(t, self.horizon, self.time_buckets)
        )

    def values(self, state: AugmentedState) -> np.ndarray:
        stored = self._values.get(state)
        if stored is None:
            return np.full(len(ACTIONS), self.q_init)
        return stored

    def written(self, state: AugmentedState) -> np.ndarray:
        """Mask of the actions whose value has been set in ``state``."""
        mask = self._written.get(state)
        if mask is None:
            return np.zeros(len(ACTIONS), dtype=bool)
        return mask.copy()

    def get(self, state: AugmentedState, action: GridAction) -> float:
        return float(self.values(state)[_ACTION_INDEX[action]])

    def set(self, state: AugmentedState, action: GridAction, value: float) -> None:
        if not math.isfinite(value):
            raise SeqMatchError(f"non-finite Q value for {state}, {action}")
        if state not in self._values:
            self._values[state] = np.full(len(ACTIONS), self.q_init)
            self._written[state] = np.zeros(len(ACTIONS), dtype=bool)
        index = _ACTION_INDEX[action]
        self._values[state][index] = value
        self._written[state][index] = True

    def __len__(self) -> int:
        return len(self._values)

    def states(self) -> List[AugmentedState]:
        return sorted(self._values)

    def act(
        self, state: AugmentedState, t: int, rng: Optional[np.random.Generator] = None
    ) -> GridAction:
        """Greedy action; ties broken by ``rng`` when given, else by action order."""
        values = self.values(state)
        best = np.flatnonzero(values == values.max())
        if rng is None or len(best) == 1:
            return ACTIONS[int(best[0])]
        return ACTIONS[int(rng.choice(best))]

    def rebase(self, low: float, high: float) -> None:
        """
        Map every written value affinely into ``[low, high]`` and make
        ``low`` the value of everything never written, ``q_init`` included.
        The order of the written actions within each state is unchanged
        and none of them falls below an unwritten one.
        """
        self.q_init = float(low)
        if not self._values:
            return
        written = np.concatenate(
            [self._values[s][self._written[s]] for s in self._values]
        )
        lo, hi = float(written.min()), float(written.max())
        for state, values in self._values.items():
            mask = self._written[state]
            rebased = np.full_like(values, low)
            if hi == lo:
                rebased[mask] = high
            else:
                rebased[mask] = low + (values[mask] - lo) * (high - low) / (hi - lo)
            self._values[state] = rebased

    def to_json(self) -> Dict[str, Any]:
        entries = []
        for state in sorted(self._values):
            values, mask = self._values[state], self._written[state]
            for action, value, written in zip(ACTIONS, values, mask):
                if not written:
                    continue
                entries.append(
                    {
                        "x": state.cell[0],
                        "y": state.cell[1],
                        "bucket": state.time_bucket,
                        "action": action.value,
                        "value": float(value),
                    }
                )
        return {
            "horizon": self.horizon,
            "time_buckets": self.time_buckets,
            "q_init": self.q_init,
            "entries": entries,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "QTable":
        try:
            table = cls(int(data["horizon"]), int(data["time_buckets"]), float(data["q_init"]))
            for entry in data["entries"]:
                state = AugmentedState((int(entry["x"]), int(entry["y"])), int(entry["bucket"]))
                table.set(state, GridAction(entry["action"]), float(entry["value"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"malformed policy document: {e}") from e
        return table


def greedy_policy(qtable: QTable) -> Dict[AugmentedState, GridAction]:
    """Best stored action per visited state, first action on ties."""
    return {state: qtable.act(state, state.time_bucket) for state in qtable.states()}


class ScriptedPolicy:
    """Replays a fixed action sequence, then stays."""

    def __init__(self, actions: Sequence[GridAction]):
        self.actions = list(actions)

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> "ScriptedPolicy":
        cells = trajectory_to_cells(traj)
        deltas = {a.delta: a for a in ACTIONS}
        actions = []
        for a, b in zip(cells, cells[1:]):
            delta = (b[0] - a[0], b[1] - a[1])
            if delta not in deltas:
                raise InvalidInputError(f"step {a} -> {b} is not a single grid move")
            actions.append(deltas[delta])
        return cls(actions)

    def state(self, cell: Cell, t: int) -> AugmentedState:
        return AugmentedState((int(cell[0]), int(cell[1])), t)

    def act(self, state: AugmentedState, t: int, rng=None) -> GridAction:
        if t < len(self.actions):
            return self.actions[t]
        return GridAction.STAY


@dataclass(frozen=True, eq=False)
class Episode:
    trajectory: Trajectory
    actions: List[GridAction]
    states: List[AugmentedState]


def rollout(
    policy,
    grid: GridSpec,
    horizon: Optional[int] = None,
    epsilon: float = 0.0,
    seed: Any = None,
) -> Episode:
    """
    Run one episode of ``horizon`` frames (start included). With
    probability ``epsilon`` an action is drawn uniformly at random;
    otherwise the policy acts, breaking ties with the same generator.
    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    horizon = horizon or grid.horizon
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cell = grid.start
    cells = [cell]
    states = [policy.state(cell, 0)]
    actions = []
    for t in range(horizon - 1):
        if epsilon > 0 and rng.random() < epsilon:
            action = ACTIONS[int(rng.integers(len(ACTIONS)))]
        else:
            action = policy.act(states[-1], t, rng)
        cell = step(cell, action, grid)
        actions.append(action)
        cells.append(cell)
        states.append(policy.state(cell, t + 1))
    return Episode(cells_to_trajectory(cells), actions, states)


def episode_rewards(
    episode: Episode, demo: Trajectory, reward_fn: str, reward_config: RewardConfig
) -> np.ndarray:
    if reward_fn == GROUND_TRUTH:
        return ground_truth_rewards(episode.trajectory, demo)
    return compute_rewards(reward_fn, episode.trajectory, demo, reward_config).rewards


def relabel_and_update(
    qtable: QTable,
    episode: Episode,
    demo: Trajectory,
    reward_fn: str,
    config: TrainConfig,
) -> QTable:
    """
    Score the finished episode with ``reward_fn`` and apply one-step
    Q-learning updates in time order. The transition out of frame ``t``
    earns the reward of frame ``t + 1``; the last transition does not
    bootstrap.
    """
    rewards = episode_rewards(episode, demo, reward_fn, config.reward or RewardConfig.grid())
    if len(rewards) != episode.trajectory.length:
        raise SeqMatchError(
            f"reward series of length {len(rewards)} for an episode of "
            f"{episode.trajectory.length} frames"
        )
    last = len(episode.actions) - 1
    for t, action in enumerate(episode.actions):
        state, next_state = episode.states[t], episode.states[t + 1]
        target = rewards[t + 1]
        if t < last:
            target += config.gamma * float(qtable.values(next_state).max())
        q = qtable.get(state, action)
        qtable.set(state, action, q + config.alpha * (target - q))
    return qtable


@dataclass(frozen=True)
class EvalResult:
    mean_return: float
    stderr: float
    success_rate: float
    normalized_return: Optional[float]
    returns: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean_return": self.mean_return,
            "stderr": self.stderr,
            "success_rate": self.success_rate,
            "normalized_return": self.normalized_return,
            "returns": list(self.returns),
        }


def evaluate(policy, task: GridTask, n_seeds: int = 3, normalize: bool = True) -> EvalResult:
    """
    Greedy rollouts, one per seed; the seed only decides ties between
    equally valued actions.
    """
    if n_seeds < 1:
        raise InvalidInputError(f"n_seeds must be >= 1, got {n_seeds}")
    returns = []
    for seed in range(n_seeds):
        episode = rollout(policy, task.grid, task.horizon, epsilon=0.0, seed=seed)
        returns.append(ground_truth_return(episode.trajectory, task.demo))
    values = np.asarray(returns, dtype=np.float64)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n_seeds)) if n_seeds > 1 else 0.0
    normalized = None
    if normalize:
        expert = ground_truth_return(task.expert, task.demo)
        normalized = mean / expert if expert > 0 else None
    return EvalResult(mean, stderr, float(np.mean(values > 0)), normalized, returns)


@dataclass(frozen=True)
class CurvePoint:
    episode: int
    eval_return: float
    eval_success: float
    reward_source: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "episode": self.episode,
            "eval_return": self.eval_return,
            "eval_success": self.eval_success,
            "reward_source": self.reward_source,
        }


@dataclass(eq=False)
class TrainResult:
    qtable: QTable
    curve: List[CurvePoint]
    sources: List[str]
    config: TrainConfig


def train(config: TrainConfig, task: Optional[GridTask] = None) -> TrainResult:
    """
    Train a QTable on ``task`` (default: ``config.task``). Episodes
    ``e < pretrain_fraction * episodes`` are scored with the pretrain
    reward, the rest with ``reward_fn``. At the switch the written values
    are rebased into ``[-1, 0]`` and everything unwritten reads -1; any
    positive reward then lifts the pretrained greedy route first.
    ``config.reward = None`` takes the reward hyperparameters from the task.
    """
    task = task or get_task(config.task)
    if config.horizon is not None:
        task = task.with_horizon(config.horizon)
    if config.reward is None:
        config = dataclasses.replace(config, reward=task.reward)
    rng = np.random.default_rng(config.seed)
    qtable = QTable(task.horizon, config.time_buckets, config.q_init)
    curve: List[CurvePoint] = []
    sources: List[str] = []
    switch = config.pretrain_episodes()

    for e in range(config.episodes):
        source = config.reward_source(e)
        if e == switch and e > 0 and config.pretrain_reward_fn != config.reward_fn:
            logger.info(
                "episode %d: switching reward from %s to %s",
                e,
                config.pretrain_reward_fn,
                config.reward_fn,
            )
            qtable.rebase(-1.0, 0.0)
        episode = rollout(qtable, task.grid, task.horizon, config.epsilon(e), rng)
        relabel_and_update(qtable, episode, task.demo, source, config)
        sources.append(source)

        done = e + 1
        if done % config.eval_interval == 0 or done == config.episodes:
            result = evaluate(qtable, task, config.eval_seeds, normalize=False)
            curve.append(CurvePoint(done, result.mean_return, result.success_rate, source))
            logger.info(
                "%s/%s episode %d: return %.3f success %.2f",
                task.name,
                source,
                done,
                result.mean_return,
                result.success_rate,
            )
    return TrainResult(qtable, curve, sources, config)
