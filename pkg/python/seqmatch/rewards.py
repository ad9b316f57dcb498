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
Registry of reward functions behind one signature,
``fn(learner, demo, config) -> rewards``.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np

from seqmatch.common import InvalidInputError, TrajectoryLike, as_trajectory
from seqmatch.config import RewardConfig
from seqmatch.dtw import dtw_rewards
from seqmatch.orca import orca_rewards
from seqmatch.threshold import threshold_rewards
from seqmatch.transport import ot_rewards, temporal_ot_rewards

RewardFunction = Callable[[TrajectoryLike, TrajectoryLike, RewardConfig], np.ndarray]

# not a frame-matching reward: binary success signal from the environment
GROUND_TRUTH = "ground_truth"


def _orca(learner, demo, config: RewardConfig, strict: bool = False) -> np.ndarray:
    return orca_rewards(learner, demo, config.metric, config.lam, config.context_window)


def _ot(learner, demo, config: RewardConfig, strict: bool = False) -> np.ndarray:
    return ot_rewards(
        learner,
        demo,
        config.metric,
        config.epsilon,
        config.max_iter,
        config.tol,
        config.context_window,
        strict=strict,
    )


def _tot(learner, demo, config: RewardConfig, strict: bool = False) -> np.ndarray:
    return temporal_ot_rewards(
        learner,
        demo,
        config.metric,
        config.epsilon,
        config.k_w,
        config.max_iter,
        config.tol,
        config.context_window,
        strict=strict,
    )


def _dtw(learner, demo, config: RewardConfig, strict: bool = False) -> np.ndarray:
    return dtw_rewards(learner, demo, config.metric, config.context_window)


def _threshold(learner, demo, config: RewardConfig, strict: bool = False) -> np.ndarray:
    return threshold_rewards(
        learner, demo, config.metric, config.theta, config.lam, config.context_window
    )


REWARD_FUNCTIONS: Dict[str, Callable[..., np.ndarray]] = {
    "orca": _orca,
    "ot": _ot,
    "tot": _tot,
    "dtw": _dtw,
    "threshold": _threshold,
}

ALIASES = {"temporal_ot": "tot", "temporalot": "tot"}

# column order used by comparisons and reports
COMPARE_COLUMNS = {
    "orca": "orca",
    "ot": "ot",
    "tot": "temporal_ot",
    "dtw": "dtw",
    "threshold": "threshold",
}


def canonical_name(name: str) -> str:
    key = name.lower()
    key = ALIASES.get(key, key)
    if key not in REWARD_FUNCTIONS:
        raise InvalidInputError(
            f"unknown reward function `{name}`; expected one of {sorted(REWARD_FUNCTIONS)}"
        )
    return key


def get_reward_function(name: str) -> Callable[..., np.ndarray]:
    return REWARD_FUNCTIONS[canonical_name(name)]


@dataclass(frozen=True, eq=False)
class RewardSeries:
    fn: str
    rewards: np.ndarray
    params: Dict[str, Any]

    @property
    def total(self) -> float:
        return float(np.sum(self.rewards))

    @property
    def mean(self) -> float:
        return float(np.mean(self.rewards))

    def __len__(self) -> int:
        return int(self.rewards.shape[0])

    def summary(self) -> Dict[str, Any]:
        return {
            "fn": self.fn,
            "total": self.total,
            "mean": self.mean,
            "params": self.params,
        }


def _params(name: str, config: RewardConfig) -> Dict[str, Any]:
    params: Dict[str, Any] = {
        "metric": config.metric,
        "context_window": config.context_window,
    }
    if name in ("orca", "threshold"):
        params["lambda"] = config.lam
    if name in ("ot", "tot"):
        params.update(epsilon=config.epsilon, max_iter=config.max_iter, tol=config.tol)
    if name == "tot":
        params["k_w"] = config.k_w
    if name == "threshold":
        params["theta"] = config.theta
    return params


def compute_rewards(
    name: str,
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    config: Optional[RewardConfig] = None,
    strict: bool = False,
) -> RewardSeries:
    config = config or RewardConfig()
    key = canonical_name(name)
    learner, demo = as_trajectory(learner), as_trajectory(demo)
    rewards = np.asarray(REWARD_FUNCTIONS[key](learner, demo, config, strict=strict))
    if rewards.shape != (learner.length,) or not np.all(np.isfinite(rewards)):
        raise InvalidInputError(f"{key} produced an invalid reward series")
    return RewardSeries(key, rewards, _params(key, config))


def compare_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    config: Optional[RewardConfig] = None,
    strict: bool = False,
) -> Dict[str, RewardSeries]:
    """All reward functions on one pair, keyed by report column name."""
    return {
        column: compute_rewards(key, learner, demo, config, strict=strict)
        for key, column in COMPARE_COLUMNS.items()
    }
