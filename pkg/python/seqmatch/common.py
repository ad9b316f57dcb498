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
Shared data model: trajectories, confidence statistics and the error
hierarchy used across the package.
"""

import importlib.metadata as importlib_metadata
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Sequence, Union

import numpy as np
import pyarrow as pa


def package_version() -> str:
    try:
        return importlib_metadata.version("seqmatch")
    except importlib_metadata.PackageNotFoundError:
        # running from a source checkout
        return "0.0.0+unknown"


class SeqMatchError(Exception):
    """Base class for every error raised by seqmatch."""


class InvalidInputError(SeqMatchError, ValueError):
    pass


class UnknownKeyError(InvalidInputError, KeyError):
    """A configuration key that does not exist."""

    __str__ = InvalidInputError.__str__


class ConvergenceError(SeqMatchError, RuntimeError):
    pass


class ScenarioClaimError(SeqMatchError, AssertionError):
    pass


class ConvergenceWarning(UserWarning):
    pass


def as_frame(values: Any) -> np.ndarray:
    """
    Convert a single frame embedding to a finite 1-D float vector.
    """
    try:
        frame = np.atleast_1d(np.asarray(values, dtype=np.float64))
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"frame is not numeric: {e}") from e
    if frame.ndim != 1 or frame.shape[0] < 1:
        raise InvalidInputError(f"frame must be a non-empty vector, got {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise InvalidInputError("frame contains NaN or Inf")
    return frame


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Ordered sequence of frame embeddings, stored as a ``T x dim`` array.

    Learner rollouts and demonstrations share this type. Frames are
    indexed by time along the first axis.
    """

    frames: np.ndarray

    def __post_init__(self):
        try:
            frames = np.array(self.frames, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InvalidInputError(f"frames are not a numeric array: {e}") from e
        if frames.ndim == 1:
            # a 1-D sequence of scalars is a trajectory of 1-D frames
            frames = frames.reshape(-1, 1)
        if frames.ndim != 2:
            raise InvalidInputError(
                f"frames must be a 2-D array (T x dim), got shape {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise InvalidInputError("trajectory must contain at least one frame")
        if frames.shape[1] < 1:
            raise InvalidInputError("frame dimension must be at least 1")
        if not np.all(np.isfinite(frames)):
            raise InvalidInputError("trajectory contains NaN or Inf")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @classmethod
    def from_frames(cls, frames: Iterable[Any]) -> "Trajectory":
        rows = [as_frame(f) for f in frames]
        if not rows:
            raise InvalidInputError("trajectory must contain at least one frame")
        dims = {r.shape[0] for r in rows}
        if len(dims) != 1:
            raise InvalidInputError(f"frames have differing dims: {sorted(dims)}")
        return cls(np.vstack(rows))

    @property
    def length(self) -> int:
        return int(self.frames.shape[0])

    @property
    def dim(self) -> int:
        return int(self.frames.shape[1])

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, index):
        if isinstance(index, slice):
            return Trajectory(self.frames[index])
        return self.frames[index]

    def prefix(self, t: int) -> "Trajectory":
        """First ``t`` frames."""
        if not 1 <= t <= self.length:
            raise InvalidInputError(f"prefix length {t} outside [1, {self.length}]")
        return Trajectory(self.frames[:t])

    def reversed(self) -> "Trajectory":
        return Trajectory(self.frames[::-1])

    def equals(self, other: "Trajectory") -> bool:
        return self.frames.shape == other.frames.shape and bool(
            np.array_equal(self.frames, other.frames)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self.dim, "frames": self.frames.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trajectory":
        if not isinstance(data, dict) or "frames" not in data:
            raise InvalidInputError("trajectory document must be an object with 'frames'")
        traj = cls.from_frames(data["frames"])
        dim = data.get("dim")
        if dim is not None and (isinstance(dim, bool) or not isinstance(dim, int)):
            raise InvalidInputError(f"declared dim must be an integer, got {dim!r}")
        if dim is not None and dim != traj.dim:
            raise InvalidInputError(
                f"declared dim {dim} does not match frame dim {traj.dim}"
            )
        return traj

    def to_arrow(self) -> pa.Table:
        """One float64 column per embedding dimension, one row per frame."""
        return pa.Table.from_arrays(
            [pa.array(self.frames[:, k]) for k in range(self.dim)],
            names=[f"d{k}" for k in range(self.dim)],
        )

    @classmethod
    def from_arrow(cls, table: pa.Table) -> "Trajectory":
        if table.num_columns < 1 or table.num_rows < 1:
            raise InvalidInputError("trajectory table must have rows and columns")
        columns = [
            table.column(k).to_numpy(zero_copy_only=False).astype(np.float64)
            for k in range(table.num_columns)
        ]
        return cls(np.column_stack(columns))


TrajectoryLike = Union[Trajectory, np.ndarray, Sequence[Any]]


def as_trajectory(value: TrajectoryLike) -> Trajectory:
    if isinstance(value, Trajectory):
        return value
    return Trajectory(np.asarray(value, dtype=np.float64))


def check_same_dim(learner: Trajectory, demo: Trajectory) -> None:
    if learner.dim != demo.dim:
        raise InvalidInputError(
            f"learner dim {learner.dim} does not match demonstration dim {demo.dim}"
        )


@dataclass(frozen=True)
class ConfidenceStats:
    """
    Reconstruction-loss statistics of a learned encoder. Frames whose loss
    sits far above ``mean_reco`` are treated as out of distribution.
    """

    mean_reco: float
    sigma_reco: float
    k_sigma: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.mean_reco):
            raise InvalidInputError("mean_reco must be finite")
        if not self.sigma_reco > 0:
            raise InvalidInputError(f"sigma_reco must be > 0, got {self.sigma_reco}")
        if not self.k_sigma > 0:
            raise InvalidInputError(f"k_sigma must be > 0, got {self.k_sigma}")
