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
from typing import Any, List, Tuple

import numpy as np

from seqmatch.common import InvalidInputError, TrajectoryLike
from seqmatch.functions import Metric, context_smooth, cost_matrix

logger = logging.getLogger(__name__)

WarpPath = List[Tuple[int, int]]


def dtw_align(cost: Any) -> Tuple[WarpPath, float]:
    """
    Align both endpoints with a monotone, connected warp path of minimum
    total cost. Indices in the returned path are 0-based.

    Among equal-cost predecessors the backtrack prefers the diagonal, then
    ``(t-1, j)``, then ``(t, j-1)``.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise InvalidInputError(f"cost matrix must be non-empty 2-D, got shape {cost.shape}")
    if np.any(np.isnan(cost)):
        raise InvalidInputError("cost matrix contains NaN")
    T, n = cost.shape

    D = np.full((T + 1, n + 1), np.inf)
    D[0, 0] = 0.0
    for t in range(1, T + 1):
        for j in range(1, n + 1):
            D[t, j] = cost[t - 1, j - 1] + min(D[t - 1, j - 1], D[t - 1, j], D[t, j - 1])

    path = [(T - 1, n - 1)]
    t, j = T, n
    while (t, j) != (1, 1):
        candidates = ((t - 1, j - 1), (t - 1, j), (t, j - 1))
        values = [D[c] for c in candidates]
        t, j = candidates[int(np.argmin(values))]
        path.append((t - 1, j - 1))
    path.reverse()

    total = float(D[T, n])
    logger.debug("dtw %sx%s: path of %d steps, total cost %.6g", T, n, len(path), total)
    return path, total


def path_indicator(path: WarpPath, shape: Tuple[int, int]) -> np.ndarray:
    mu = np.zeros(shape)
    for t, j in path:
        mu[t, j] = 1.0
    return mu


def dtw_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    metric: Metric = "euclidean",
    context_window: int = 1,
) -> np.ndarray:
    """
    ``r[t] = -sum_j cost[t, j] * mu[t, j]`` with ``mu`` the binary path
    indicator, so a learner frame matched to several demonstration frames
    pays for all of them.
    """
    cost = cost_matrix(learner, demo, metric)
    if context_window > 1:
        cost = context_smooth(cost, context_window)
    path, _ = dtw_align(cost)
    return -np.sum(cost * path_indicator(path, cost.shape), axis=1)
