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
Ordered-coverage rewards.

``C[t, j]`` is the probability that the learner prefix ``0..t`` has
occupied demonstration frames ``0..j`` in order. The reward at ``t`` is
the probability of sitting on the last demonstration frame after having
covered all the frames before it.
"""

import logging
from typing import Any

import numpy as np

from seqmatch.common import InvalidInputError, TrajectoryLike
from seqmatch.functions import Metric, context_smooth, cost_matrix, probability_matrix

logger = logging.getLogger(__name__)

# Products of many sub-unit probabilities stop being representable in
# linear space somewhere past this many subgoals for typical lambda.
VALIDATED_DEMO_LENGTH = 200


def _check_probability(P: Any) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.size == 0:
        raise InvalidInputError(f"probability matrix must be non-empty 2-D, got {P.shape}")
    # exact zeros only arise from exp underflow at very large distances
    if np.any(np.isnan(P)) or np.any(P < 0) or np.any(P > 1):
        raise InvalidInputError("probability entries must lie in (0, 1]")
    return P


def coverage_matrix(P: Any, log_space: bool = False) -> np.ndarray:
    """
    Fill the ordered-coverage table row by row.

    C[0, 0] = P[0, 0]
    C[0, j] = C[0, j-1] * P[0, j]
    C[t, 0] = max(C[t-1, 0], P[t, 0])
    C[t, j] = max(C[t-1, j], C[t, j-1] * P[t, j])

    With ``log_space`` the same recurrence runs on ``log P`` and the
    exponentiated table is returned.
    """
    P = _check_probability(P)
    if log_space:
        with np.errstate(divide="ignore"):
            return np.exp(_log_coverage(np.log(P)))
    T, n = P.shape
    C = np.empty_like(P)
    C[0, 0] = P[0, 0]
    for j in range(1, n):
        C[0, j] = C[0, j - 1] * P[0, j]
    for t in range(1, T):
        C[t, 0] = max(C[t - 1, 0], P[t, 0])
        for j in range(1, n):
            C[t, j] = max(C[t - 1, j], C[t, j - 1] * P[t, j])
    if n > VALIDATED_DEMO_LENGTH and np.any(C[:, -1] == 0):
        logger.warning(
            "coverage underflowed to zero for a %d-frame demonstration; "
            "use log_space=True",
            n,
        )
    return C


def _log_coverage(logP: np.ndarray) -> np.ndarray:
    T, n = logP.shape
    L = np.empty_like(logP)
    L[0, 0] = logP[0, 0]
    for j in range(1, n):
        L[0, j] = L[0, j - 1] + logP[0, j]
    for t in range(1, T):
        L[t, 0] = max(L[t - 1, 0], logP[t, 0])
        for j in range(1, n):
            L[t, j] = max(L[t - 1, j], L[t, j - 1] + logP[t, j])
    return L


def coverage_oracle(P: Any) -> np.ndarray:
    """
    Closed form ``C[t, j] = max_{i <= t} C[i, j-1] * P[i, j]`` evaluated
    column by column without the running max. Column ``-1`` is the empty
    prefix with coverage 1.
    """
    P = _check_probability(P)
    T, n = P.shape
    C = np.empty_like(P)
    previous = np.ones(T)
    for j in range(n):
        for t in range(T):
            C[t, j] = max(previous[i] * P[i, j] for i in range(t + 1))
        previous = C[:, j]
    return C


def orca_rewards_from_probability(P: Any) -> np.ndarray:
    """
    Reward stage alone: ``r[t] = C[t, n-2] * P[t, n-1]``, with the
    coverage of the empty prefix equal to 1 when the demonstration has a
    single frame.
    """
    P = _check_probability(P)
    if P.shape[1] == 1:
        return P[:, 0].copy()
    C = coverage_matrix(P[:, :-1])
    return C[:, -1] * P[:, -1]


def orca_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    metric: Metric = "euclidean",
    lam: float = 1.0,
    context_window: int = 1,
    log_space: bool = False,
) -> np.ndarray:
    cost = cost_matrix(learner, demo, metric)
    if context_window > 1:
        cost = context_smooth(cost, context_window)
    if log_space:
        if not lam > 0:
            raise InvalidInputError(f"lambda must be > 0, got {lam}")
        logP = -lam * cost
        if logP.shape[1] == 1:
            return np.exp(logP[:, 0])
        return np.exp(_log_coverage(logP[:, :-1])[:, -1] + logP[:, -1])
    rewards = orca_rewards_from_probability(probability_matrix(cost, lam))
    logger.debug("orca rewards over %s cost matrix, total %.6g", cost.shape, rewards.sum())
    return rewards
