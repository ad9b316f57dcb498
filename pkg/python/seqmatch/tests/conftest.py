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

from seqmatch import Trajectory
from seqmatch.gridworld import scenario_dtw_stall, scenario_ot_ordering, scenario_tot_slow


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def line_learner():
    return Trajectory([0.0, 1.0, 2.0])


@pytest.fixture
def line_demo():
    return Trajectory([0.0, 2.0])


@pytest.fixture
def ot_ordering():
    return scenario_ot_ordering()


@pytest.fixture
def dtw_stall():
    return scenario_dtw_stall()


@pytest.fixture
def tot_slow():
    return scenario_tot_slow()


@pytest.fixture
def trajectory_files(tmp_path, line_learner, line_demo):
    from seqmatch.input import write_trajectory

    learner = write_trajectory(line_learner, tmp_path / "learner.json")
    demo = write_trajectory(line_demo, tmp_path / "demo.json")
    return learner, demo
