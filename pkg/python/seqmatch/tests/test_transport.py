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

import numpy as np
import pytest

from seqmatch import Trajectory
from seqmatch.common import ConvergenceError, ConvergenceWarning, InvalidInputError
from seqmatch.config import SINKHORN_SMALL_EPSILON_MAX_ITER
from seqmatch.functions import cost_matrix
from seqmatch.transport import (
    build_mask,
    default_window,
    exact_transport,
    marginal_violation,
    ot_rewards,
    sinkhorn,
    temporal_ot_rewards,
)

from . import generic as helpers


def _separated_cost(rng, size):
    """Square integer cost with a unique zero-cost assignment."""
    cost = rng.integers(1, 6, size=(size, size)).astype(np.float64)
    np.fill_diagonal(cost, 0.0)
    return cost[:, rng.permutation(size)]


def test_sinkhorn_zero_cost():
    coupling = sinkhorn(np.zeros((2, 2)), epsilon=1.0)
    np.testing.assert_allclose(coupling.matrix, np.full((2, 2), 0.25), atol=1e-12)
    assert coupling.converged


@pytest.mark.parametrize("epsilon", [1.0, 0.1, 1e-3])
def test_sinkhorn_single_entry(epsilon):
    coupling = sinkhorn([[3.5]], epsilon=epsilon)
    np.testing.assert_allclose(coupling.matrix, [[1.0]])


def test_sinkhorn_matches_reference(rng):
    cost = helpers.random_cost(rng, 6, 4)
    coupling = sinkhorn(cost, epsilon=1.0, max_iter=10000, tol=1e-10)
    assert coupling.converged
    np.testing.assert_allclose(
        coupling.matrix, helpers.reference_sinkhorn(cost, 1.0), atol=1e-9
    )


@pytest.mark.parametrize("epsilon", [1.0, 0.1])
def test_sinkhorn_marginals(rng, epsilon):
    for size in [(2, 3), (7, 7), (20, 13), (50, 50)]:
        cost = helpers.random_cost(rng, *size, high=1.0)
        coupling = sinkhorn(cost, epsilon=epsilon)
        assert coupling.converged
        assert marginal_violation(coupling.matrix) <= 1e-6
        assert coupling.violation == pytest.approx(marginal_violation(coupling.matrix))
        assert np.all(coupling.matrix >= 0)


@pytest.mark.parametrize("size", [(3, 4), (12, 9), (30, 30), (50, 50)])
def test_sinkhorn_marginals_small_epsilon(rng, size):
    cost = helpers.random_cost(rng, *size, high=1.0)
    coupling = sinkhorn(cost, epsilon=1e-3, max_iter=SINKHORN_SMALL_EPSILON_MAX_ITER)
    assert coupling.converged
    assert coupling.iterations <= SINKHORN_SMALL_EPSILON_MAX_ITER
    assert marginal_violation(coupling.matrix) <= 1e-6
    assert np.all(coupling.matrix >= 0)


def test_sinkhorn_small_epsilon_converges(rng):
    for size in range(2, 7):
        cost = _separated_cost(rng, size)
        coupling = sinkhorn(cost, epsilon=1e-3)
        assert coupling.converged
        assert marginal_violation(coupling.matrix) <= 1e-6


def test_masked_support_is_exact(rng):
    for T, n, k_w in [(5, 5, 1), (10, 5, 1), (4, 9, 2), (17, 4, 1)]:
        mask = build_mask(T, n, k_w)
        coupling = sinkhorn(helpers.random_cost(rng, T, n), epsilon=0.5, mask=mask)
        assert np.all(coupling.matrix[~mask] == 0.0)
        assert coupling.converged


@pytest.mark.filterwarnings("ignore::seqmatch.common.ConvergenceWarning")
def test_epsilon_limit_is_monotone(rng):
    cost = helpers.integer_cost(rng, 5, 4)
    totals = [
        float(np.sum(cost * sinkhorn(cost, epsilon=eps, max_iter=10000).matrix))
        for eps in (1.0, 0.1, 0.01)
    ]
    assert totals[1] <= totals[0] + 1e-5
    assert totals[2] <= totals[1] + 1e-5


@pytest.mark.filterwarnings("ignore::seqmatch.common.ConvergenceWarning")
def test_small_epsilon_approaches_linear_program(rng):
    for _ in range(10):
        T, n = rng.integers(2, 7, size=2)
        cost = helpers.random_cost(rng, T, n, high=1.0)
        exact = exact_transport(cost)
        approx = sinkhorn(cost, epsilon=1e-3)
        assert marginal_violation(exact.matrix) <= 1e-9
        gap = np.sum(cost * approx.matrix) - np.sum(cost * exact.matrix)
        assert abs(gap) <= 1e-2


def test_exact_transport_respects_mask(rng):
    mask = build_mask(6, 3, 1)
    coupling = exact_transport(helpers.random_cost(rng, 6, 3), mask)
    assert np.all(coupling.matrix[~mask] == 0.0)
    assert coupling.epsilon == 0.0


def test_sinkhorn_zero_epsilon_warns(rng):
    with pytest.warns(UserWarning, match="approximated"):
        coupling = sinkhorn(_separated_cost(rng, 3), epsilon=0.0)
    assert coupling.epsilon == 1e-3


def test_sinkhorn_not_converged(rng, caplog):
    cost = helpers.random_cost(rng, 8, 6)
    with pytest.raises(ConvergenceError, match="did not converge"):
        sinkhorn(cost, epsilon=0.01, max_iter=1, strict=True)

    with caplog.at_level(logging.WARNING, logger="seqmatch.transport"):
        with pytest.warns(ConvergenceWarning):
            coupling = sinkhorn(cost, epsilon=0.01, max_iter=1)
    assert not coupling.converged
    assert coupling.iterations == 1
    assert "did not converge" in caplog.text


def test_sinkhorn_invalid_input():
    with pytest.raises(InvalidInputError, match="NaN"):
        sinkhorn([[0.0, np.nan]])
    with pytest.raises(InvalidInputError, match="Inf"):
        sinkhorn([[0.0, np.inf]])
    with pytest.raises(InvalidInputError, match="epsilon"):
        sinkhorn([[0.0]], epsilon=-1.0)
    with pytest.raises(InvalidInputError, match="mask shape"):
        sinkhorn(np.zeros((2, 2)), mask=np.ones((2, 3), dtype=bool))
    with pytest.raises(InvalidInputError, match="without support"):
        sinkhorn(np.zeros((2, 2)), mask=np.array([[True, True], [False, False]]))


def test_build_mask_examples():
    np.testing.assert_array_equal(build_mask(3, 3, 0), np.eye(3, dtype=bool))
    tridiagonal = np.abs(np.subtract.outer(np.arange(3), np.arange(3))) <= 1
    np.testing.assert_array_equal(build_mask(3, 3, 1), tridiagonal)

    mask = build_mask(10, 5, 1)
    for t in range(10):
        expected = [abs(j - t // 2) <= 1 for j in range(5)]
        np.testing.assert_array_equal(mask[t], expected)


def test_build_mask_transposes_for_short_learner():
    np.testing.assert_array_equal(build_mask(5, 10, 1), build_mask(10, 5, 1).T)


def test_build_mask_infeasible():
    with pytest.raises(InvalidInputError, match="infeasible"):
        build_mask(10, 2, 0)
    with pytest.raises(InvalidInputError, match="k_w"):
        build_mask(3, 3, -1)


def test_default_window():
    assert default_window(5, 5) == 10
    assert default_window(17, 4) == 1
    assert default_window(10, 25) == 3


def test_ot_rewards_zero_cost():
    frames = np.ones((4, 2))
    np.testing.assert_array_equal(ot_rewards(frames, frames[:3]), np.zeros(4))


def test_ot_rewards_single_frame():
    np.testing.assert_allclose(ot_rewards([[0.0]], [[2.5]]), [-2.5])
    np.testing.assert_allclose(temporal_ot_rewards([[0.0]], [[2.5]]), [-2.5])


def test_ot_rewards_exact_for_zero_epsilon(rng):
    learner = helpers.random_trajectory(rng, 6)
    demo = helpers.random_trajectory(rng, 4)
    cost = cost_matrix(learner, demo)
    expected = -np.sum(cost * exact_transport(cost).matrix, axis=1)
    np.testing.assert_allclose(ot_rewards(learner, demo, epsilon=0.0), expected)


def test_ot_rewards_permutation_insensitive(rng):
    for _ in range(50):
        T, n = rng.integers(2, 12, size=2)
        learner = helpers.random_trajectory(rng, T)
        demo = helpers.random_trajectory(rng, n)
        shuffled = learner[rng.permutation(T)]
        total = ot_rewards(learner, demo).sum()
        assert abs(total - ot_rewards(shuffled, demo).sum()) <= 1e-6


def test_temporal_ot_full_mask_matches_ot(rng):
    demo = Trajectory(helpers.random_trajectory(rng, 6))
    np.testing.assert_allclose(
        temporal_ot_rewards(demo, demo, k_w=6), ot_rewards(demo, demo), atol=1e-8
    )


def test_temporal_ot_identity_mask(rng):
    learner = helpers.random_trajectory(rng, 5)
    demo = helpers.random_trajectory(rng, 5)
    cost = cost_matrix(learner, demo)
    rewards = temporal_ot_rewards(learner, demo, k_w=0)
    np.testing.assert_allclose(rewards, -np.diag(cost) / 5, atol=1e-6)


def test_temporal_ot_is_order_sensitive(tot_slow):
    plus = temporal_ot_rewards(tot_slow.xi_plus, tot_slow.demo, "manhattan")
    minus = temporal_ot_rewards(tot_slow.xi_minus, tot_slow.demo, "manhattan")
    assert minus.sum() - plus.sum() == pytest.approx(8 / 17, abs=1e-4)
