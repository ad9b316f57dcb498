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
Generators of temporally misaligned demonstrations.

``subsample_tail`` keeps the opening of a demonstration at its original
speed and fast-forwards the rest. ``perturb_segments`` splits a
demonstration into equal segments and speeds up or slows down a random
subset of them; ``rank_misalignment`` then labels a batch Low or High by
the spread of the resulting segment lengths.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from seqmatch.common import InvalidInputError, Trajectory

logger = logging.getLogger(__name__)

SPEEDUP_FACTORS = (2, 4, 6, 8, 10)
SLOWDOWN_FACTORS = (2, 3, 4, 5, 6)
SUBSAMPLE_SPEEDUP_RANGE = (5, 10)
N_SEGMENTS = 5
FASTER = "faster"
SLOWER = "slower"
LOW = "Low"
HIGH = "High"


def subsample_tail(demo: Trajectory, keep_frac: float = 0.2, speedup: int = 5) -> Trajectory:
    lo, hi = SUBSAMPLE_SPEEDUP_RANGE
    if not 0 < keep_frac < 1:
        raise InvalidInputError(f"keep_frac must lie in (0, 1), got {keep_frac}")
    if int(speedup) != speedup or not lo <= speedup <= hi:
        raise InvalidInputError(f"speedup must be an integer in [{lo}, {hi}], got {speedup}")
    n = demo.length
    head = int(math.floor(keep_frac * n))
    # the speedup-th, 2*speedup-th, ... frame of the tail
    index = list(range(head)) + list(range(head + int(speedup) - 1, n, int(speedup)))
    if n - 1 not in index:
        index.append(n - 1)
    if not index:
        raise InvalidInputError("subsampling produced an empty demonstration")
    return Trajectory(demo.frames[index])


def segment_bounds(length: int, n_segments: int = N_SEGMENTS) -> List[Tuple[int, int]]:
    """Half-open segment ranges; remainder frames go to the last segment."""
    size = length // n_segments
    bounds = [(k * size, (k + 1) * size) for k in range(n_segments)]
    bounds[-1] = (bounds[-1][0], length)
    return bounds


def mean_absolute_deviation(lengths: Sequence[int]) -> float:
    lengths = np.asarray(lengths, dtype=np.float64)
    return float(np.mean(np.abs(lengths - lengths.mean())))


@dataclass(frozen=True)
class PerturbSpec:
    seed: int = 0
    n_segments: int = N_SEGMENTS
    segments_changed: int = 1
    speedup_factors: Tuple[int, ...] = SPEEDUP_FACTORS
    slowdown_factors: Tuple[int, ...] = SLOWDOWN_FACTORS
    direction: str = FASTER

    def __post_init__(self):
        if self.direction not in (FASTER, SLOWER):
            raise InvalidInputError(f"direction must be `{FASTER}` or `{SLOWER}`")
        if self.n_segments < 1:
            raise InvalidInputError("n_segments must be >= 1")
        if not 0 <= self.segments_changed <= self.n_segments:
            raise InvalidInputError(
                f"segments_changed must lie in [0, {self.n_segments}], "
                f"got {self.segments_changed}"
            )
        if not set(self.speedup_factors) <= set(SPEEDUP_FACTORS) or not self.speedup_factors:
            raise InvalidInputError(f"speedup factors must be drawn from {SPEEDUP_FACTORS}")
        if not set(self.slowdown_factors) <= set(SLOWDOWN_FACTORS) or not self.slowdown_factors:
            raise InvalidInputError(f"slowdown factors must be drawn from {SLOWDOWN_FACTORS}")

    def factors(self) -> Tuple[int, ...]:
        if self.direction == FASTER:
            return tuple(self.speedup_factors)
        return tuple(self.slowdown_factors)


@dataclass(frozen=True, eq=False)
class PerturbedDemo:
    demo: Trajectory
    mad: float
    spec: PerturbSpec
    # segment index -> factor applied
    changes: Dict[int, int] = field(default_factory=dict)
    label: str = ""

    @property
    def seed(self) -> int:
        return self.spec.seed

    def with_label(self, label: str) -> "PerturbedDemo":
        return PerturbedDemo(self.demo, self.mad, self.spec, self.changes, label)

    def manifest_row(self) -> Dict[str, Any]:
        return {
            "seed": self.spec.seed,
            "direction": self.spec.direction,
            "segments_changed": self.spec.segments_changed,
            "factors": ";".join(f"{k}:{f}" for k, f in sorted(self.changes.items())),
            "mad": self.mad,
            "label": self.label,
        }


def _decimate(start: int, stop: int, factor: int) -> List[int]:
    """ceil(len / factor) indices stepping back from the segment's last frame."""
    index = list(range(stop - 1, start - 1, -factor))
    index.reverse()
    return index


def perturb_segments(demo: Trajectory, spec: PerturbSpec) -> Tuple[Trajectory, float]:
    perturbed = perturb(demo, spec)
    return perturbed.demo, perturbed.mad


def perturb(demo: Trajectory, spec: PerturbSpec) -> PerturbedDemo:
    """Like ``perturb_segments`` but keeps the drawn changes for manifests."""
    if demo.length < spec.n_segments:
        raise InvalidInputError(
            f"demonstration of {demo.length} frames cannot be split into "
            f"{spec.n_segments} segments"
        )
    rng = np.random.default_rng(spec.seed)
    bounds = segment_bounds(demo.length, spec.n_segments)
    chosen = rng.choice(spec.n_segments, size=spec.segments_changed, replace=False)
    factors = spec.factors()
    changes = {int(k): int(factors[rng.integers(len(factors))]) for k in sorted(chosen)}

    index: List[int] = []
    lengths = []
    for k, (start, stop) in enumerate(bounds):
        segment = list(range(start, stop))
        if k in changes:
            factor = changes[k]
            if spec.direction == FASTER:
                segment = _decimate(start, stop, factor)
            else:
                segment = [i for i in segment for _ in range(factor)]
        lengths.append(len(segment))
        index.extend(segment)
    if index[0] != 0:
        # keep the task's starting frame
        index.insert(0, 0)
        lengths[0] += 1
    mad = mean_absolute_deviation(lengths)
    logger.debug("perturbed segments %s -> lengths %s, mad %.4g", changes, lengths, mad)
    return PerturbedDemo(Trajectory(demo.frames[index]), mad, spec, changes)


def perturbation_batch(
    demo: Trajectory,
    direction: str = FASTER,
    seeds: Sequence[int] = tuple(range(6)),
) -> List[PerturbedDemo]:
    """
    One perturbed demonstration per seed: the first half of the batch
    changes one segment, the rest change three.
    """
    half = len(seeds) // 2
    batch = []
    for i, seed in enumerate(seeds):
        spec = PerturbSpec(
            seed=int(seed), segments_changed=1 if i < half else 3, direction=direction
        )
        batch.append(perturb(demo, spec))
    return batch


def rank_misalignment(batch: Sequence[PerturbedDemo]) -> List[PerturbedDemo]:
    """
    Sort by mad (ties by seed) and label the lower half Low, the rest High.
    """
    if len(batch) < 2:
        raise InvalidInputError("need at least two perturbed demonstrations to rank")
    ordered = sorted(batch, key=lambda p: (p.mad, p.seed))
    n_low = len(ordered) // 2
    return [p.with_label(LOW if i < n_low else HIGH) for i, p in enumerate(ordered)]
