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

import numpy as np
import pytest

from seqmatch.common import InvalidInputError
from seqmatch.dtw import dtw_align, dtw_rewards, path_indicator

from . import generic as helpers


def _assert_valid_path(path, shape):
    T, n = shape
    assert path[0] == (0, 0)
    assert path[-1] == (T - 1, n - 1)
    for (t0, j0), (t1, j1) in zip(path, path[1:]):
        assert (t1 - t0, j1 - j0) in {(1, 1), (1, 0), (0, 1)}


def test_identical_sequences():
    frames = np.arange(5.0)
    path, total = dtw_align(np.abs(np.subtract.outer(frames, frames)))
    assert path == [(t, t) for t in range(5)]
    assert total == 0.0
    np.testing.assert_array_equal(dtw_rewards(frames, frames), np.zeros(5))


def test_hand_example():
    cost = np.array([[0.0, 2.0], [0.0, 2.0], [2.0, 0.0]])
    path, total = dtw_align(cost)
    assert path == [(0, 0), (1, 0), (2, 1)]
    assert total == 0.0
    # the same costs arise from 1-D frames [0, 0, 2] against [0, 2]
    np.testing.assert_array_equal(
        dtw_rewards([0.0, 0.0, 2.0], [0.0, 2.0], "manhattan"), np.zeros(3)
    )


def test_single_row_covers_all_columns():
    path, total = dtw_align([[1.0, 2.0, 3.0, 4.0]])
    assert path == [(0, 0), (0, 1), (0, 2), (0, 3)]
    assert total == 10.0
    # one learner frame matched to every subgoal pays for all of them
    np.testing.assert_array_equal(dtw_rewards([[0.0]], [[1.0], [2.0]], "manhattan"), [-3.0])


def test_tie_break_prefers_diagonal():
    path, _ = dtw_align(np.zeros((3, 3)))
    assert path == [(0, 0), (1, 1), (2, 2)]


def test_paths_are_valid(rng):
    for _ in range(100):
        T, n = rng.integers(1, 21, size=2)
        cost = helpers.random_cost(rng, T, n)
        path, total = dtw_align(cost)
        _assert_valid_path(path, (T, n))
        assert total == pytest.approx(sum(cost[t, j] for t, j in path))


def test_total_cost_is_optimal(rng):
    for _ in range(500):
        T, n = rng.integers(1, 7, size=2)
        cost = helpers.integer_cost(rng, T, n, high=9)
        _, total = dtw_align(cost)
        assert total == helpers.brute_force_dtw(cost)


def test_path_indicator():
    mu = path_indicator([(0, 0), (1, 0), (2, 1)], (3, 2))
    np.testing.assert_array_equal(mu, [[1, 0], [1, 0], [0, 1]])


def test_reversal_changes_reward(ot_ordering):
    plus = dtw_rewards(ot_ordering.xi_plus, ot_ordering.demo, "manhattan").sum()
    minus = dtw_rewards(ot_ordering.xi_minus, ot_ordering.demo, "manhattan").sum()
    assert plus > minus


def test_invalid_cost():
    with pytest.raises(InvalidInputError, match="NaN"):
        dtw_align([[np.nan]])
    with pytest.raises(InvalidInputError, match="non-empty"):
        dtw_align(np.zeros((0, 2)))
