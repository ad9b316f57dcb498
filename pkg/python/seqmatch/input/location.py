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

import json
import os
from typing import Any, List, Optional

import pyarrow as pa
import pyarrow.parquet as pq

from seqmatch.common import InvalidInputError, Trajectory
from seqmatch.input.base import BaseInputSource


def _format(path: str) -> str:
    _, extension = os.path.splitext(str(path))
    return extension.lstrip(".").lower()


class JsonInputSource(BaseInputSource):
    """``{"dim": int, "frames": [[float, ...], ...]}`` with frames in time order."""

    def is_correct_input(self, input_item: Any, **kwargs) -> bool:
        return isinstance(input_item, (str, os.PathLike)) and _format(input_item) == "json"

    def build_trajectory(self, input_file: Any, **kwargs) -> Trajectory:
        try:
            with open(input_file, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise InvalidInputError(f"cannot parse {input_file}: {e}") from e
        return Trajectory.from_dict(document)


class ParquetInputSource(BaseInputSource):
    """One numeric column per embedding dimension, one row per frame."""

    def is_correct_input(self, input_item: Any, **kwargs) -> bool:
        return isinstance(input_item, (str, os.PathLike)) and _format(input_item) == "parquet"

    def build_trajectory(self, input_file: Any, **kwargs) -> Trajectory:
        try:
            table = pq.read_table(input_file)
        except pa.ArrowInvalid as e:
            raise InvalidInputError(f"cannot read {input_file}: {e}") from e
        for column in table.schema:
            if not (pa.types.is_floating(column.type) or pa.types.is_integer(column.type)):
                raise InvalidInputError(
                    f"column `{column.name}` of {input_file} is not numeric"
                )
        return Trajectory.from_arrow(table)


class LocationInputPlugin:
    """
    Reads a trajectory from a file on disk, dispatching on the file
    extension. Extra sources are tried first, in order.
    """

    def __init__(self, sources: Optional[List[BaseInputSource]] = None):
        self.sources = list(sources or []) + [JsonInputSource(), ParquetInputSource()]

    def build_trajectory(self, input_file: Any, **kwargs) -> Trajectory:
        for source in self.sources:
            if source.is_correct_input(input_file, **kwargs):
                return source.build_trajectory(input_file, **kwargs)
        raise InvalidInputError(
            f"Input of format: `{_format(input_file)}` is currently not supported."
            " Only JSON and Parquet."
        )


def read_trajectory(path: Any) -> Trajectory:
    return LocationInputPlugin().build_trajectory(path)


def write_trajectory(traj: Trajectory, path: Any) -> str:
    format = _format(path)
    if format == "json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump(traj.to_dict(), f)
    elif format == "parquet":
        pq.write_table(traj.to_arrow(), path)
    else:
        raise InvalidInputError(f"cannot write trajectories as `{format}`")
    return str(path)
