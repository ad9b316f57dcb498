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
Frame distances and the matrix transforms every reward function is built
from: cost matrices, context-window smoothing, occupancy probabilities and
confidence scaling.
"""

import logging
from typing import Any, Callable, Dict, Sequence, Union

import numpy as np

from seqmatch.common import (
    ConfidenceStats,
    InvalidInputError,
    TrajectoryLike,
    as_frame,
    as_trajectory,
    check_same_dim,
)

logger = logging.getLogger(__name__)

Metric = Union[str, Callable[[np.ndarray, np.ndarray], float]]


def _pair(a: Any, b: Any):
    a, b = as_frame(a), as_frame(b)
    if a.shape != b.shape:
        raise InvalidInputError(
            f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}"
        )
    return a, b


def euclidean_distance(a: Any, b: Any) -> float:
    a, b = _pair(a, b)
    return float(np.linalg.norm(a - b))


def cosine_distance(a: Any, b: Any) -> float:
    a, b = _pair(a, b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidInputError("cosine distance is undefined for zero-norm vectors")
    if np.array_equal(a, b):
        return 0.0
    return float(np.clip(1.0 - np.dot(a, b) / (na * nb), 0.0, 2.0))


def manhattan_distance(a: Any, b: Any) -> float:
    a, b = _pair(a, b)
    return float(np.sum(np.abs(a - b)))


def _pairwise_euclidean(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - y[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _pairwise_manhattan(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(x[:, None, :] - y[None, :, :]), axis=-1)


def _pairwise_cosine(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    if np.any(nx == 0) or np.any(ny == 0):
        raise InvalidInputError("cosine distance is undefined for zero-norm vectors")
    cost = 1.0 - (x @ y.T) / np.outer(nx, ny)
    cost = np.clip(cost, 0.0, 2.0)
    # identical frames are exactly zero apart
    same = np.all(x[:, None, :] == y[None, :, :], axis=-1)
    cost[same] = 0.0
    return cost


METRICS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "euclidean": _pairwise_euclidean,
    "cosine": _pairwise_cosine,
    "manhattan": _pairwise_manhattan,
}


def resolve_metric(metric: Metric) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """
    Return a pairwise ``(T x dim, T~ x dim) -> T x T~`` function for a metric
    name or for a per-pair callable.
    """
    if isinstance(metric, str):
        try:
            return METRICS[metric.lower()]
        except KeyError:
            raise InvalidInputError(
                f"unknown metric `{metric}`; expected one of {sorted(METRICS)}"
            ) from None
    if not callable(metric):
        raise TypeError("`metric` must be a metric name or a callable")

    def pairwise(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([[float(metric(a, b)) for b in y] for a in x])

    return pairwise


def cost_matrix(
    learner: TrajectoryLike, demo: TrajectoryLike, metric: Metric = "euclidean"
) -> np.ndarray:
    """
    Pairwise distances with rows indexed by learner time and columns by
    demonstration time.
    """
    learner, demo = as_trajectory(learner), as_trajectory(demo)
    check_same_dim(learner, demo)
    cost = np.asarray(resolve_metric(metric)(learner.frames, demo.frames), dtype=np.float64)
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise InvalidInputError("metric produced negative or non-finite distances")
    return cost


def _check_cost(cost: Any) -> np.ndarray:
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise InvalidInputError(f"cost matrix must be non-empty 2-D, got shape {cost.shape}")
    if np.any(np.isnan(cost)):
        raise InvalidInputError("cost matrix contains NaN")
    return cost


def context_smooth(cost: Any, window: int) -> np.ndarray:
    """
    Average each entry with the next ``window - 1`` diagonal successors.
    Indices past the end of either trajectory are clamped to its last frame.
    """
    if int(window) != window or window < 1:
        raise InvalidInputError(f"context window must be an integer >= 1, got {window}")
    cost = _check_cost(cost)
    window = int(window)
    if window == 1:
        return cost.copy()
    n_rows, n_cols = cost.shape
    rows, cols = np.arange(n_rows), np.arange(n_cols)
    smoothed = np.zeros_like(cost)
    for k in range(window):
        r = np.minimum(rows + k, n_rows - 1)
        c = np.minimum(cols + k, n_cols - 1)
        smoothed += cost[np.ix_(r, c)]
    return smoothed / window


def probability_matrix(cost: Any, lam: float = 1.0) -> np.ndarray:
    """Occupancy probabilities ``exp(-lam * cost)``."""
    if not lam > 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam}")
    cost = _check_cost(cost)
    if np.any(cost < 0):
        raise InvalidInputError("cost matrix has negative entries")
    return np.exp(-lam * cost)


def confidence_scale(loss: float, stats: ConfidenceStats) -> float:
    if loss < stats.mean_reco:
        return 1.0
    spread = stats.sigma_reco * stats.k_sigma
    return float(np.exp(-((loss - stats.mean_reco) ** 2) / (2.0 * spread**2)))


def confidence_stats(losses: Sequence[float], k_sigma: float = 2.0) -> ConfidenceStats:
    """
    Fit confidence statistics from reconstruction losses on in-distribution
    frames.
    """
    losses = np.asarray(losses, dtype=np.float64)
    if losses.size < 2 or not np.all(np.isfinite(losses)):
        raise InvalidInputError("need at least two finite losses")
    sigma = float(np.std(losses))
    if sigma == 0:
        raise InvalidInputError("losses have zero spread")
    return ConfidenceStats(float(np.mean(losses)), sigma, k_sigma)


def confidence_scaled_rewards(
    rewards: Sequence[float], losses: Sequence[float], stats: ConfidenceStats
) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=np.float64)
    losses = np.asarray(losses, dtype=np.float64)
    if rewards.shape != losses.shape:
        raise InvalidInputError(
            f"rewards and losses differ in length: {rewards.shape} vs {losses.shape}"
        )
    scale = np.array([confidence_scale(float(z), stats) for z in losses])
    return scale * rewards
