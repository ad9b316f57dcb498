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

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from seqmatch import ConfidenceStats, Trajectory
from seqmatch.common import InvalidInputError
from seqmatch.functions import (
    METRICS,
    confidence_scale,
    confidence_scaled_rewards,
    confidence_stats,
    context_smooth,
    cosine_distance,
    cost_matrix,
    euclidean_distance,
    manhattan_distance,
    probability_matrix,
)

from . import generic as helpers

finite = st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((0, 0), (0, 0), 0.0),
        ((0, 0), (3, 4), 5.0),
        ((1, 2, 2), (0, 0, 0), 3.0),
    ],
)
def test_euclidean_distance(a, b, expected):
    assert euclidean_distance(a, b) == pytest.approx(expected)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((1, 0), (1, 0), 0.0),
        ((1, 0), (0, 1), 1.0),
        ((1, 0), (-1, 0), 2.0),
    ],
)
def test_cosine_distance(a, b, expected):
    assert cosine_distance(a, b) == pytest.approx(expected)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((0, 0), (0, 0), 0.0),
        ((0, 0), (2, 3), 5.0),
        ((1, 1), (4, 0), 4.0),
    ],
)
def test_manhattan_distance(a, b, expected):
    assert manhattan_distance(a, b) == pytest.approx(expected)


def test_distance_errors():
    with pytest.raises(InvalidInputError, match="dimension mismatch"):
        euclidean_distance((0, 0), (0, 0, 0))
    with pytest.raises(InvalidInputError, match="NaN or Inf"):
        manhattan_distance((0, float("nan")), (0, 0))
    with pytest.raises(InvalidInputError, match="zero-norm"):
        cosine_distance((0, 0), (1, 0))


@given(
    arrays(np.float64, 3, elements=finite),
    arrays(np.float64, 3, elements=finite),
)
@settings(max_examples=100, deadline=None)
def test_metric_axioms(a, b):
    for distance in (euclidean_distance, manhattan_distance):
        assert distance(a, b) == pytest.approx(distance(b, a))
        assert distance(a, b) >= 0
        assert distance(a, a) == 0
    if np.linalg.norm(a) > 1e-3 and np.linalg.norm(b) > 1e-3:
        assert cosine_distance(a, b) == pytest.approx(cosine_distance(b, a))
        assert 0 <= cosine_distance(a, b) <= 2
        assert cosine_distance(a, a) == 0


def test_pairwise_matches_per_pair(rng):
    x = helpers.random_trajectory(rng, 5, dim=3)
    y = helpers.random_trajectory(rng, 4, dim=3)
    per_pair = {
        "euclidean": euclidean_distance,
        "cosine": cosine_distance,
        "manhattan": manhattan_distance,
    }
    for name, distance in per_pair.items():
        expected = np.array([[distance(a, b) for b in y] for a in x])
        np.testing.assert_allclose(cost_matrix(x, y, name), expected, atol=1e-12)
        np.testing.assert_allclose(METRICS[name](x, y), expected, atol=1e-12)


def test_cost_matrix_examples():
    np.testing.assert_array_equal(cost_matrix([[0.0]], [[0.0]]), [[0.0]])
    cost = cost_matrix([0.0, 1.0, 2.0], [0.0, 2.0], "manhattan")
    np.testing.assert_array_equal(cost, [[0, 2], [1, 1], [2, 0]])

    traj = Trajectory([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    np.testing.assert_array_equal(np.diag(cost_matrix(traj, traj)), np.zeros(3))


def test_cost_matrix_callable_metric():
    cost = cost_matrix([0.0, 1.0], [0.0, 3.0], lambda a, b: float(abs(a - b).max()) * 2)
    np.testing.assert_array_equal(cost, [[0, 6], [2, 4]])


def test_cost_matrix_errors():
    with pytest.raises(InvalidInputError, match="does not match"):
        cost_matrix(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(InvalidInputError, match="unknown metric"):
        cost_matrix([0.0], [0.0], "chebyshev")
    with pytest.raises(InvalidInputError, match="at least one frame"):
        cost_matrix(np.zeros((0, 2)), np.zeros((3, 2)))
    with pytest.raises(InvalidInputError, match="negative or non-finite"):
        cost_matrix([0.0], [1.0], lambda a, b: -1.0)


def test_context_smooth():
    cost = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]])
    np.testing.assert_array_equal(context_smooth(cost, 1), cost)
    smoothed = context_smooth(cost, 2)
    assert smoothed[0, 0] == pytest.approx(0.5)
    # clamped at the last row and column
    assert smoothed[2, 1] == pytest.approx(0.0)
    assert smoothed[1, 1] == pytest.approx(0.5)
    np.testing.assert_array_equal(context_smooth(np.zeros((4, 3)), 3), np.zeros((4, 3)))


def test_context_smooth_invalid_window():
    with pytest.raises(InvalidInputError, match="context window"):
        context_smooth(np.zeros((2, 2)), 0)
    with pytest.raises(InvalidInputError, match="context window"):
        context_smooth(np.zeros((2, 2)), 1.5)


def test_probability_matrix():
    assert probability_matrix([[0.0]], 1.0)[0, 0] == 1.0
    assert probability_matrix([[1.0]], 1.0)[0, 0] == pytest.approx(0.367879, abs=1e-6)
    assert probability_matrix([[2.0]], 0.5)[0, 0] == pytest.approx(0.367879, abs=1e-6)
    with pytest.raises(InvalidInputError, match="lambda"):
        probability_matrix([[1.0]], 0.0)
    with pytest.raises(InvalidInputError, match="negative"):
        probability_matrix([[-1.0]], 1.0)


def test_probability_matrix_is_monotone(rng):
    cost = helpers.random_cost(rng, 6, 5)
    P = probability_matrix(cost, 1.3)
    order = np.argsort(cost.ravel())
    assert np.all(np.diff(P.ravel()[order]) <= 0)


def test_confidence_scale():
    stats = ConfidenceStats(mean_reco=1.0, sigma_reco=0.5, k_sigma=2.0)
    assert confidence_scale(0.0, stats) == 1.0
    assert confidence_scale(1.0, stats) == 1.0
    assert confidence_scale(1.0 + 2 * 0.5 * 2.0, stats) == pytest.approx(
        math.exp(-2.0), abs=1e-12
    )


def test_confidence_scale_far_out_of_distribution():
    # (loss - mean)^2 / (2 s^2) == 2 for loss - mean == 2 s
    stats = ConfidenceStats(mean_reco=0.0, sigma_reco=1.0, k_sigma=1.0)
    assert confidence_scale(2.0, stats) == pytest.approx(0.135335, abs=1e-6)


def test_confidence_scale_nonincreasing():
    stats = ConfidenceStats(mean_reco=2.0, sigma_reco=0.3)
    losses = np.linspace(0.0, 6.0, 61)
    scales = [confidence_scale(z, stats) for z in losses]
    assert all(a >= b for a, b in zip(scales, scales[1:]))
    assert confidence_scale(2.0 + 1e-9, stats) == pytest.approx(1.0)


def test_confidence_stats_and_scaled_rewards():
    stats = confidence_stats([1.0, 2.0, 3.0])
    assert stats.mean_reco == pytest.approx(2.0)
    assert stats.sigma_reco == pytest.approx(math.sqrt(2.0 / 3.0))
    assert stats.k_sigma == 2.0

    rewards = confidence_scaled_rewards([1.0, 2.0], [0.5, 2.0], stats)
    np.testing.assert_allclose(rewards, [1.0, 2.0])
    with pytest.raises(InvalidInputError, match="differ in length"):
        confidence_scaled_rewards([1.0], [1.0, 2.0], stats)
    with pytest.raises(InvalidInputError, match="zero spread"):
        confidence_stats([1.0, 1.0])


def test_confidence_stats_validation():
    with pytest.raises(InvalidInputError, match="sigma_reco"):
        ConfidenceStats(mean_reco=0.0, sigma_reco=0.0)
