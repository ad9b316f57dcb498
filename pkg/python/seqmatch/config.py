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
Reward and training configuration.

``RewardConfig`` can be built fluently::

    config = RewardConfig().with_metric("manhattan").with_lambda(1.0)

or addressed by dotted keys, mirroring a session config::

    config.set("seqmatch.transport.epsilon", "0.1")
    config.get("seqmatch.transport.epsilon")  # 0.1
"""

import dataclasses
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import toml

from seqmatch.common import InvalidInputError, UnknownKeyError
from seqmatch.functions import METRICS

LAMBDA_DEFAULT = 1.0
EPSILON_DEFAULT = 1.0
CONTEXT_WINDOW_DEFAULT = 3
THETA_MANIPULATION = 0.90
THETA_UNSTABLE = 0.70
SINKHORN_MAX_ITER = 1000
SINKHORN_TOL = 1e-6
# iteration budget for epsilon down to 1e-3 on unit-range costs up to 50x50
SINKHORN_SMALL_EPSILON_MAX_ITER = 500_000
GAMMA_DEFAULT = 0.9


def _optional_int(value: Any) -> Optional[int]:
    if value is None or (isinstance(value, str) and value.lower() in ("", "none", "auto")):
        return None
    return int(value)


def _metric(value: Any) -> str:
    return str(value).lower()


# dotted key -> (field name, coercion)
_KEYS: Dict[str, Tuple[str, Callable[[Any], Any]]] = {
    "seqmatch.core.metric": ("metric", _metric),
    "seqmatch.core.context_window": ("context_window", int),
    "seqmatch.orca.lambda": ("lam", float),
    "seqmatch.transport.epsilon": ("epsilon", float),
    "seqmatch.transport.k_w": ("k_w", _optional_int),
    "seqmatch.transport.max_iter": ("max_iter", int),
    "seqmatch.transport.tol": ("tol", float),
    "seqmatch.threshold.theta": ("theta", float),
}


@dataclass
class RewardConfig:
    """
    Hyperparameters shared by the reward functions.

    ``k_w = None`` selects the default TemporalOT window for the pair of
    trajectory lengths being compared.
    """

    metric: str = "euclidean"
    lam: float = LAMBDA_DEFAULT
    context_window: int = 1
    epsilon: float = EPSILON_DEFAULT
    k_w: Optional[int] = None
    max_iter: int = SINKHORN_MAX_ITER
    tol: float = SINKHORN_TOL
    theta: float = THETA_MANIPULATION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.metric not in METRICS:
            raise InvalidInputError(
                f"unknown metric `{self.metric}`; expected one of {sorted(METRICS)}"
            )
        if not self.lam > 0:
            raise InvalidInputError(f"lambda must be > 0, got {self.lam}")
        if self.context_window < 1:
            raise InvalidInputError(
                f"context window must be >= 1, got {self.context_window}"
            )
        if not self.epsilon >= 0 or math.isinf(self.epsilon):
            raise InvalidInputError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if self.k_w is not None and self.k_w < 0:
            raise InvalidInputError(f"k_w must be >= 0, got {self.k_w}")
        if self.max_iter < 1:
            raise InvalidInputError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be > 0, got {self.tol}")
        if not 0 < self.theta < 1:
            raise InvalidInputError(f"theta must lie in (0, 1), got {self.theta}")

    @classmethod
    def visual(cls) -> "RewardConfig":
        """Defaults for encoder embeddings of camera frames."""
        return cls(metric="cosine", context_window=CONTEXT_WINDOW_DEFAULT)

    @classmethod
    def grid(cls) -> "RewardConfig":
        """Defaults for raw gridworld cell coordinates."""
        return cls(metric="manhattan")

    def _replace(self, **changes) -> "RewardConfig":
        return dataclasses.replace(self, **changes)

    def with_metric(self, metric: str) -> "RewardConfig":
        return self._replace(metric=_metric(metric))

    def with_lambda(self, lam: float) -> "RewardConfig":
        return self._replace(lam=float(lam))

    def with_context_window(self, window: int) -> "RewardConfig":
        return self._replace(context_window=int(window))

    def with_epsilon(self, epsilon: float) -> "RewardConfig":
        return self._replace(epsilon=float(epsilon))

    def with_window(self, k_w: Optional[int]) -> "RewardConfig":
        return self._replace(k_w=_optional_int(k_w))

    def with_max_iter(self, max_iter: int) -> "RewardConfig":
        return self._replace(max_iter=int(max_iter))

    def with_tol(self, tol: float) -> "RewardConfig":
        return self._replace(tol=float(tol))

    def with_threshold(self, theta: float) -> "RewardConfig":
        return self._replace(theta=float(theta))

    def set(self, key: str, value: Any) -> None:
        name, coerce = _lookup(key)
        previous = getattr(self, name)
        try:
            setattr(self, name, coerce(value))
            self.validate()
        except (TypeError, ValueError) as e:
            setattr(self, name, previous)
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidInputError(f"invalid value {value!r} for `{key}`") from e

    def get(self, key: str) -> Any:
        name, _ = _lookup(key)
        return getattr(self, name)

    def get_all(self) -> Dict[str, Any]:
        return {key: getattr(self, name) for key, (name, _) in _KEYS.items()}

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RewardConfig":
        """Accepts dotted keys or plain field names."""
        config = cls()
        fields = {name: key for key, (name, _) in _KEYS.items()}
        for key, value in values.items():
            config.set(fields.get(key, key), value)
        return config


def _lookup(key: str) -> Tuple[str, Callable[[Any], Any]]:
    try:
        return _KEYS[key]
    except KeyError:
        raise UnknownKeyError(f"unknown configuration key `{key}`") from None


@dataclass
class TrainConfig:
    """
    Tabular training run. ``pretrain_fraction = 0`` disables the
    pretraining phase; ``horizon`` and ``time_buckets`` default to the
    task's horizon when left unset. ``reward = None`` uses the reward
    hyperparameters bundled with the task.
    """

    task: str = "tot_slow"
    reward_fn: str = "orca"
    pretrain_reward_fn: str = "tot"
    pretrain_fraction: float = 0.5
    episodes: int = 3000
    horizon: Optional[int] = None
    gamma: float = GAMMA_DEFAULT
    alpha: float = 0.5
    q_init: float = 0.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.5
    seed: int = 0
    time_buckets: Optional[int] = None
    eval_interval: int = 100
    eval_seeds: int = 3
    reward: Optional[RewardConfig] = None

    def __post_init__(self):
        if isinstance(self.reward, dict):
            self.reward = RewardConfig.from_dict(self.reward)
        elif self.reward is not None and not isinstance(self.reward, RewardConfig):
            raise InvalidInputError(
                f"reward must be a mapping of configuration keys, got {self.reward!r}"
            )
        self.validate()

    def validate(self) -> None:
        from seqmatch.rewards import GROUND_TRUTH, canonical_name

        if self.reward_fn != GROUND_TRUTH:
            self.reward_fn = canonical_name(self.reward_fn)
        if self.pretrain_reward_fn != GROUND_TRUTH:
            self.pretrain_reward_fn = canonical_name(self.pretrain_reward_fn)
        if not 0 <= self.pretrain_fraction <= 1:
            raise InvalidInputError(
                f"pretrain_fraction must lie in [0, 1], got {self.pretrain_fraction}"
            )
        if self.episodes < 1:
            raise InvalidInputError(f"episodes must be >= 1, got {self.episodes}")
        if self.horizon is not None and self.horizon < 2:
            raise InvalidInputError(f"horizon must be >= 2, got {self.horizon}")
        if not 0 < self.gamma <= 1:
            raise InvalidInputError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0 < self.alpha <= 1:
            raise InvalidInputError(f"alpha must lie in (0, 1], got {self.alpha}")
        for name in ("epsilon_start", "epsilon_end", "epsilon_decay"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {value}")
        if self.time_buckets is not None and self.time_buckets < 1:
            raise InvalidInputError(f"time_buckets must be >= 1, got {self.time_buckets}")
        if self.eval_interval < 1 or self.eval_seeds < 1:
            raise InvalidInputError("eval_interval and eval_seeds must be >= 1")

    def pretrain_episodes(self) -> int:
        """Episodes ``e < pretrain_episodes()`` use the pretrain reward."""
        return math.ceil(self.pretrain_fraction * self.episodes)

    def reward_source(self, episode: int) -> str:
        if episode < self.pretrain_fraction * self.episodes:
            return self.pretrain_reward_fn
        return self.reward_fn

    def epsilon(self, episode: int) -> float:
        decay_episodes = self.epsilon_decay * self.episodes
        if decay_episodes <= 0 or episode >= decay_episodes:
            return self.epsilon_end
        frac = episode / decay_episodes
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)

    def with_seed(self, seed: int) -> "TrainConfig":
        return dataclasses.replace(self, seed=int(seed))

    def to_dict(self) -> Dict[str, Any]:
        values = dataclasses.asdict(self)
        values["reward"] = None if self.reward is None else self.reward.get_all()
        return values

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "TrainConfig":
        if not isinstance(values, dict):
            raise InvalidInputError("train config must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidInputError(f"unknown train config fields: {unknown}")
        try:
            return cls(**values)
        except TypeError as e:
            raise InvalidInputError(str(e)) from e

    @classmethod
    def from_file(cls, path: str) -> "TrainConfig":
        _, extension = os.path.splitext(path)
        format = extension.lstrip(".").lower()
        try:
            with open(path, "r", encoding="utf-8") as f:
                if format == "json":
                    values = json.load(f)
                elif format == "toml":
                    values = toml.load(f)
                else:
                    raise InvalidInputError(
                        f"Config of format: `{format}` is currently not supported."
                        " Only JSON and TOML."
                    )
        except (json.JSONDecodeError, toml.TomlDecodeError, UnicodeDecodeError) as e:
            raise InvalidInputError(f"cannot parse {path}: {e}") from e
        return cls.from_dict(values)
