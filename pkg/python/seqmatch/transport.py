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
Entropic optimal transport between a learner trajectory and a
demonstration, with uniform marginals, and its temporally masked variant.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.special import logsumexp

from seqmatch.common import (
    ConvergenceError,
    ConvergenceWarning,
    InvalidInputError,
    TrajectoryLike,
)
from seqmatch.config import SINKHORN_MAX_ITER, SINKHORN_TOL
from seqmatch.functions import Metric, context_smooth, cost_matrix

logger = logging.getLogger(__name__)

# epsilon = 0 is approximated by this value in the log-domain solver
EPSILON_FLOOR = 1e-3
# largest T * T~ solved exactly by linear programming when epsilon = 0
EXACT_SIZE_LIMIT = 400
ALIGNED_WINDOW = 10


@dataclass(frozen=True, eq=False)
class Coupling:
    """
    Matching matrix with rows summing to ``1/T`` and columns to ``1/T~``.
    ``violation`` is the largest absolute marginal error of ``matrix``.
    """

    matrix: np.ndarray
    epsilon: float
    iterations: int
    violation: float
    converged: bool


def marginal_violation(matrix: np.ndarray) -> float:
    T, n = matrix.shape
    rows = np.max(np.abs(matrix.sum(axis=1) - 1.0 / T))
    cols = np.max(np.abs(matrix.sum(axis=0) - 1.0 / n))
    return float(max(rows, cols))


def _check_cost(cost: Any) -> np.ndarray:
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise InvalidInputError(f"cost matrix must be non-empty 2-D, got shape {cost.shape}")
    if np.any(np.isnan(cost)):
        raise InvalidInputError("cost matrix contains NaN")
    if not np.all(np.isfinite(cost)):
        raise InvalidInputError("cost matrix contains Inf")
    return cost


def _check_mask(mask: Optional[np.ndarray], shape) -> Optional[np.ndarray]:
    if mask is None:
        return None
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != shape:
        raise InvalidInputError(f"mask shape {mask.shape} does not match cost {shape}")
    if not mask.any(axis=1).all() or not mask.any(axis=0).all():
        raise InvalidInputError("mask leaves a row or column without support")
    return mask


def _sinkhorn_stage(C, log_a, log_b, f, g, epsilon, max_iter, tol):
    """Iterate dual potentials at one epsilon; returns (f, g, plan, iters, err)."""
    plan = None
    err = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        f = epsilon * (log_a - logsumexp((g[None, :] - C) / epsilon, axis=1))
        g = epsilon * (log_b - logsumexp((f[:, None] - C) / epsilon, axis=0))
        plan = np.exp((f[:, None] + g[None, :] - C) / epsilon)
        err = marginal_violation(plan)
        if err < tol:
            break
    return f, g, plan, it, err


def sinkhorn(
    cost: Any,
    epsilon: float = 1.0,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
    mask: Optional[np.ndarray] = None,
    strict: bool = False,
) -> Coupling:
    """
    Log-domain Sinkhorn with uniform marginals.

    Entries outside ``mask`` carry zero kernel weight, so the returned
    coupling is exactly zero there. Small ``epsilon`` is reached by
    warm-starting from coarser values. A coupling that misses ``tol``
    within ``max_iter`` iterations is returned flagged as not converged,
    or raises ``ConvergenceError`` when ``strict`` is set. Epsilon near
    1e-3 needs a budget on the order of
    ``config.SINKHORN_SMALL_EPSILON_MAX_ITER`` rather than the default.
    """
    cost = _check_cost(cost)
    mask = _check_mask(mask, cost.shape)
    if epsilon == 0:
        warnings.warn(
            f"epsilon=0 approximated by {EPSILON_FLOOR} in the entropic solver",
            stacklevel=2,
        )
        epsilon = EPSILON_FLOOR
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be > 0, got {epsilon}")
    if max_iter < 1 or not tol > 0:
        raise InvalidInputError("max_iter must be >= 1 and tol > 0")

    T, n = cost.shape
    C = cost if mask is None else np.where(mask, cost, np.inf)
    log_a = np.full(T, -math.log(T))
    log_b = np.full(n, -math.log(n))
    f, g = np.zeros(T), np.zeros(n)

    scale = float(np.max(cost)) if cost.size else 0.0
    schedule = []
    eps = scale
    while eps > 10 * epsilon:
        schedule.append(eps)
        eps /= 10
    schedule.append(epsilon)

    iterations = 0
    plan, err = None, np.inf
    reached_target = False
    for k, stage_eps in enumerate(schedule):
        last = k == len(schedule) - 1
        budget = max_iter - iterations
        if budget <= 0:
            break
        stage_tol = tol if last else max(tol, 1e-3)
        f, g, plan, it, err = _sinkhorn_stage(
            C, log_a, log_b, f, g, stage_eps, budget, stage_tol
        )
        iterations += it
        reached_target = last
    converged = reached_target and err < tol
    if plan is None:
        plan = np.full((T, n), 1.0 / (T * n))
        err = marginal_violation(plan)

    logger.debug(
        "sinkhorn %sx%s eps=%g: %d iterations, violation %.3g",
        T,
        n,
        epsilon,
        iterations,
        err,
    )
    coupling = Coupling(plan, epsilon, iterations, float(err), converged)
    if not converged:
        message = (
            f"Sinkhorn did not converge: violation {err:.3g} >= tol {tol:g} "
            f"after {iterations} iterations (epsilon={epsilon:g})"
        )
        if strict:
            raise ConvergenceError(message)
        logger.warning(message)
        warnings.warn(message, ConvergenceWarning, stacklevel=2)
    return coupling


def exact_transport(cost: Any, mask: Optional[np.ndarray] = None) -> Coupling:
    """
    Unregularized transport with uniform marginals, solved as a linear
    program. Used as the epsilon -> 0 reference.
    """
    cost = _check_cost(cost)
    mask = _check_mask(mask, cost.shape)
    T, n = cost.shape
    size = T * n
    index = np.arange(size)
    # row-sum constraints then column-sum constraints over the flattened plan
    rows = np.concatenate([index // n, T + index % n])
    cols = np.concatenate([index, index])
    A_eq = coo_matrix((np.ones(2 * size), (rows, cols)), shape=(T + n, size))
    b_eq = np.concatenate([np.full(T, 1.0 / T), np.full(n, 1.0 / n)])
    if mask is None:
        bounds = [(0, None)] * size
    else:
        bounds = [(0, None) if m else (0, 0) for m in mask.ravel()]
    result = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not result.success:
        raise ConvergenceError(f"linear program failed: {result.message}")
    plan = np.clip(result.x.reshape(T, n), 0.0, None)
    return Coupling(plan, 0.0, int(result.nit), marginal_violation(plan), True)


def default_window(T: int, n: int) -> int:
    """Half-width of the TemporalOT band for a learner of length ``T``."""
    if T == n:
        return ALIGNED_WINDOW
    return math.ceil(n / 10)


def build_mask(T: int, n: int, k_w: int) -> np.ndarray:
    """
    Diagonal band of half-width ``k_w`` stretched along the longer axis.

    For ``T >= n`` row ``t`` is centred on column
    ``round((t + 1) * n / T) - 1``; otherwise the roles are swapped.
    Equal lengths give ``|t - j| <= k_w``.
    """
    if T < 1 or n < 1:
        raise InvalidInputError(f"trajectory lengths must be >= 1, got {T} and {n}")
    if int(k_w) != k_w or k_w < 0:
        raise InvalidInputError(f"k_w must be a non-negative integer, got {k_w}")
    t = np.arange(T)[:, None]
    j = np.arange(n)[None, :]
    if T >= n:
        # round half up, in integer arithmetic
        center = (2 * (t + 1) * n + T) // (2 * T) - 1
        mask = np.abs(j - center) <= k_w
    else:
        center = (2 * (j + 1) * T + n) // (2 * n) - 1
        mask = np.abs(t - center) <= k_w
    if not mask.any(axis=1).all() or not mask.any(axis=0).all():
        raise InvalidInputError(f"band of half-width {k_w} is infeasible for {T}x{n}")
    return mask


def _solve(cost, epsilon, max_iter, tol, mask, strict) -> Coupling:
    if epsilon == 0 and cost.size <= EXACT_SIZE_LIMIT:
        return exact_transport(cost, mask)
    return sinkhorn(cost, epsilon, max_iter, tol, mask=mask, strict=strict)


def transport_rewards(cost: np.ndarray, coupling: Coupling) -> np.ndarray:
    return -np.sum(cost * coupling.matrix, axis=1)


def ot_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    metric: Metric = "euclidean",
    epsilon: float = 1.0,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
    context_window: int = 1,
    strict: bool = False,
) -> np.ndarray:
    """
    ``r[t] = -sum_j cost[t, j] * mu[t, j]`` for the optimal coupling of the
    whole learner trajectory. Rewards are not causal.
    """
    cost = cost_matrix(learner, demo, metric)
    if context_window > 1:
        cost = context_smooth(cost, context_window)
    coupling = _solve(cost, epsilon, max_iter, tol, None, strict)
    return transport_rewards(cost, coupling)


def temporal_ot_rewards(
    learner: TrajectoryLike,
    demo: TrajectoryLike,
    metric: Metric = "euclidean",
    epsilon: float = 1.0,
    k_w: Optional[int] = None,
    max_iter: int = SINKHORN_MAX_ITER,
    tol: float = SINKHORN_TOL,
    context_window: int = 1,
    strict: bool = False,
) -> np.ndarray:
    cost = cost_matrix(learner, demo, metric)
    if context_window > 1:
        cost = context_smooth(cost, context_window)
    T, n = cost.shape
    if k_w is None:
        k_w = default_window(T, n)
    mask = build_mask(T, n, k_w)
    logger.debug("temporal mask k_w=%d keeps %d of %d entries", k_w, mask.sum(), mask.size)
    coupling = _solve(cost, epsilon, max_iter, tol, mask, strict)
    return transport_rewards(cost, coupling)
