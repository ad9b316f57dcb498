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

import logging
from typing import Tuple

import numpy as np

from seqmatch.common import InvalidInputError, TrajectoryLike
from seqmatch.config import THETA_MANIPULATION
from seqmatch.functions import Metric, context_smooth, cost_matrix, probability_matrix

logger = logging.getLogger(__name__)


def threshold_trace(P: np.ndarray, theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Walk the tracked subgoal through the probability matrix.

    Returns the rewards and the tracked (0-based) subgoal index used at
    each step. The index advances after a step whose probability reaches
    ``theta`` and stops at the last subgoal.
    """
    if not 0 < theta < 1:
        raise InvalidInputError(f"theta must lie in (0, 1), got {theta}")
    T, n = P.shape
    rewards = np.empty(T)
    tracked = np.empty(T, dtype=np.int64)
    j = 0
    for t in range(T):
        p = P[t, j]
        rewards[t] = j + p
        tracked[t] = j
        if p >= theta:
            j = min(j + 1, n - 1)
    return rewards, tracked


def threshold_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    metric: Metric = "euclidean",
    theta: float = THETA_MANIPULATION,
    lam: float = 1.0,
    context_window: int = 1,
) -> np.ndarray:
    cost = cost_matrix(learner, demo, metric)
    if context_window > 1:
        cost = context_smooth(cost, context_window)
    rewards, tracked = threshold_trace(probability_matrix(cost, lam), theta)
    logger.debug("threshold reward completed %d subgoals", tracked[-1])
    return rewards
