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
Sequence-matching rewards for imitation from a single demonstration.
"""

from .common import (
    ConfidenceStats,
    ConvergenceError,
    ConvergenceWarning,
    InvalidInputError,
    ScenarioClaimError,
    SeqMatchError,
    Trajectory,
    UnknownKeyError,
    package_version,
)
from .config import RewardConfig, TrainConfig
from .functions import (
    confidence_scale,
    confidence_scaled_rewards,
    context_smooth,
    cosine_distance,
    cost_matrix,
    euclidean_distance,
    manhattan_distance,
    probability_matrix,
)
from .orca import coverage_matrix, orca_rewards
from .transport import Coupling, ot_rewards, sinkhorn, temporal_ot_rewards
from .dtw import dtw_align, dtw_rewards
from .threshold import threshold_rewards
from .rewards import RewardSeries, compare_rewards, compute_rewards
from .gridworld import GridAction, GridSpec, Scenario, check_claims, ground_truth_rewards
from .misalign import PerturbSpec, perturb_segments, rank_misalignment, subsample_tail
from .rl import QTable, evaluate, train
from .input import read_trajectory, write_trajectory

__version__ = package_version()

__all__ = [
    "ConfidenceStats",
    "ConvergenceError",
    "ConvergenceWarning",
    "Coupling",
    "GridAction",
    "GridSpec",
    "InvalidInputError",
    "PerturbSpec",
    "QTable",
    "RewardConfig",
    "RewardSeries",
    "Scenario",
    "ScenarioClaimError",
    "SeqMatchError",
    "TrainConfig",
    "Trajectory",
    "UnknownKeyError",
    "check_claims",
    "compare_rewards",
    "compute_rewards",
    "confidence_scale",
    "confidence_scaled_rewards",
    "context_smooth",
    "cosine_distance",
    "cost_matrix",
    "coverage_matrix",
    "dtw_align",
    "dtw_rewards",
    "euclidean_distance",
    "evaluate",
    "ground_truth_rewards",
    "manhattan_distance",
    "orca_rewards",
    "ot_rewards",
    "perturb_segments",
    "probability_matrix",
    "rank_misalignment",
    "read_trajectory",
    "sinkhorn",
    "subsample_tail",
    "temporal_ot_rewards",
    "threshold_rewards",
    "train",
    "write_trajectory",
]
