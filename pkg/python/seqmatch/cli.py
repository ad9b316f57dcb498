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
``seqmatch`` command line: reward computation on trajectory files,
scenario replay, demonstration perturbation, training and evaluation.

Exit codes: 0 success, 2 input error, 3 solver non-convergence, 4 a
scenario claim failed.
"""

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from seqmatch.common import (
    ConvergenceError,
    InvalidInputError,
    ScenarioClaimError,
)
from seqmatch.config import RewardConfig, TrainConfig
from seqmatch.gridworld import SCENARIOS, check_claims, get_task, scenario_rewards
from seqmatch.input import read_trajectory, write_trajectory
from seqmatch.misalign import (
    FASTER,
    SLOWER,
    PerturbSpec,
    perturb,
    rank_misalignment,
    subsample_tail,
)
from seqmatch.report import (
    RunManifest,
    render_svg,
    write_json,
    write_rewards_csv,
    write_rows_csv,
    write_table_csv,
)
from seqmatch.rewards import (
    COMPARE_COLUMNS,
    REWARD_FUNCTIONS,
    canonical_name,
    compare_rewards,
    compute_rewards,
)
from seqmatch.rl import QTable, ScriptedPolicy, evaluate, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_CLAIM = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXPERT = "expert"


def _env_seed() -> Optional[int]:
    value = os.getenv("SEQMATCH_SEED")
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise InvalidInputError(f"SEQMATCH_SEED must be an integer, got `{value}`") from None


def _resolve_seed(args: argparse.Namespace, default: Optional[int] = None) -> Optional[int]:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = _env_seed()
    return env if env is not None else default


def _out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _map(fn: Callable[[Any], Any], items: Sequence[Any], jobs: int) -> List[Any]:
    """Apply ``fn`` to every item; results always come back in item order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))


def _reward_config(args: argparse.Namespace) -> RewardConfig:
    config = RewardConfig()
    if getattr(args, "metric", None) is not None:
        config = config.with_metric(args.metric)
    if getattr(args, "lam", None) is not None:
        config = config.with_lambda(args.lam)
    if getattr(args, "epsilon", None) is not None:
        config = config.with_epsilon(args.epsilon)
    if getattr(args, "max_iter", None) is not None:
        config = config.with_max_iter(args.max_iter)
    if getattr(args, "kw", None) is not None:
        config = config.with_window(args.kw)
    if getattr(args, "cw", None) is not None:
        config = config.with_context_window(args.cw)
    if getattr(args, "theta", None) is not None:
        config = config.with_threshold(args.theta)
    return config


def cmd_reward(args: argparse.Namespace) -> int:
    learner = read_trajectory(args.learner)
    demo = read_trajectory(args.demo)
    config = _reward_config(args)
    series = compute_rewards(args.fn, learner, demo, config, strict=args.strict)

    out = _out_dir(args.out)
    manifest = RunManifest(
        "reward",
        {
            "fn": series.fn,
            "learner": os.path.basename(args.learner),
            "demo": os.path.basename(args.demo),
            "reward": config.get_all(),
            "strict": args.strict,
        },
    )
    manifest.add(write_rewards_csv(series.rewards, os.path.join(out, "rewards.csv")))
    manifest.add(write_json(series.summary(), os.path.join(out, "summary.json")))
    manifest.write(out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    learner = read_trajectory(args.learner)
    demo = read_trajectory(args.demo)
    config = _reward_config(args)
    series = compare_rewards(learner, demo, config, strict=args.strict)

    out = _out_dir(args.out)
    manifest = RunManifest(
        "compare",
        {
            "learner": os.path.basename(args.learner),
            "demo": os.path.basename(args.demo),
            "reward": config.get_all(),
            "strict": args.strict,
        },
    )
    columns: Dict[str, Any] = {"t": np.arange(learner.length, dtype=np.int64)}
    columns.update({name: s.rewards for name, s in series.items()})
    manifest.add(write_table_csv(columns, os.path.join(out, "compare.csv")))
    if args.plot:
        manifest.add(
            render_svg(
                {name: s.rewards for name, s in series.items()},
                os.path.join(out, "compare.svg"),
                title=f"{os.path.basename(args.learner)} vs {os.path.basename(args.demo)}",
            )
        )
    manifest.write(out)
    return EXIT_OK


def _run_scenario(name: str) -> Dict[str, Any]:
    scenario = SCENARIOS[name]()
    config = RewardConfig.grid()
    return {
        "scenario": scenario.to_json(),
        "series": scenario_rewards(scenario, config),
        "claims": [r.to_dict() for r in check_claims(scenario, config)],
    }


def cmd_scenario(args: argparse.Namespace) -> int:
    names = sorted(SCENARIOS) if args.name == "all" else [args.name]
    results = _map(_run_scenario, names, args.jobs)

    out = _out_dir(args.out)
    manifest = RunManifest(
        "scenario", {"names": names, "reward": RewardConfig.grid().get_all()}
    )
    failed = []
    for name, result in zip(names, results):
        passed = all(c["passed"] for c in result["claims"])
        report = dict(result["scenario"])
        report.update(status="pass" if passed else "fail", results=result["claims"])
        manifest.add(write_json(report, os.path.join(out, f"{name}.json")))
        for label, series in result["series"].items():
            length = len(next(iter(series.values())))
            columns: Dict[str, Any] = {"t": np.arange(length, dtype=np.int64)}
            columns.update({COMPARE_COLUMNS.get(k, k): v for k, v in series.items()})
            manifest.add(write_table_csv(columns, os.path.join(out, f"{name}_{label}.csv")))
        if not passed:
            failed.extend(
                f"{name}: {c['description']}" for c in result["claims"] if not c["passed"]
            )
    manifest.write(out)
    if failed:
        raise ScenarioClaimError("claims failed: " + "; ".join(failed))
    return EXIT_OK


def _perturb_one(job) -> Any:
    demo, spec = job
    return perturb(demo, spec)


def cmd_perturb(args: argparse.Namespace) -> int:
    demo = read_trajectory(args.demo)
    out = _out_dir(args.out)

    if args.mode == "subsample":
        result = subsample_tail(demo, args.keep, args.speedup)
        manifest = RunManifest(
            "perturb",
            {
                "mode": "subsample",
                "demo": os.path.basename(args.demo),
                "keep": args.keep,
                "speedup": args.speedup,
            },
        )
        manifest.add(write_trajectory(result, os.path.join(out, "subsampled.json")))
        manifest.add(
            write_rows_csv(
                [
                    {
                        "file": "subsampled.json",
                        "keep": args.keep,
                        "speedup": args.speedup,
                        "length": result.length,
                    }
                ],
                os.path.join(out, "perturbations.csv"),
            )
        )
        manifest.write(out)
        return EXIT_OK

    if args.count < 1:
        raise InvalidInputError(f"--count must be >= 1, got {args.count}")
    base = _resolve_seed(args, default=0)
    seeds = [base + i for i in range(args.count)]
    half = len(seeds) // 2
    specs = []
    for i, seed in enumerate(seeds):
        changed = args.segments_changed
        if changed is None:
            changed = 1 if i < half else 3
        specs.append(
            PerturbSpec(
                seed=seed,
                n_segments=args.segments,
                segments_changed=changed,
                direction=args.direction,
            )
        )
    batch = _map(_perturb_one, [(demo, spec) for spec in specs], args.jobs)
    ranked = rank_misalignment(batch) if len(batch) >= 2 else batch

    manifest = RunManifest(
        "perturb",
        {
            "mode": "random",
            "demo": os.path.basename(args.demo),
            "direction": args.direction,
            "count": args.count,
            "segments": args.segments,
            "segments_changed": args.segments_changed,
        },
        seed=base,
    )
    rows = []
    for p in sorted(ranked, key=lambda p: p.seed):
        name = f"perturbed_{p.seed}.json"
        manifest.add(write_trajectory(p.demo, os.path.join(out, name)))
        row = {"file": name}
        row.update(p.manifest_row())
        row["length"] = p.demo.length
        rows.append(row)
    manifest.add(write_rows_csv(rows, os.path.join(out, "perturbations.csv")))
    manifest.write(out)
    return EXIT_OK


def _train_one(config: TrainConfig):
    return train(config)


def cmd_train(args: argparse.Namespace) -> int:
    config = TrainConfig.from_file(args.config)
    seed = _resolve_seed(args)
    if seed is not None:
        config = config.with_seed(seed)
    configs = [config.with_seed(config.seed + k) for k in range(args.seeds)]
    results = _map(_train_one, configs, args.jobs)

    out = _out_dir(args.out)
    # the first result carries the reward hyperparameters resolved from the task
    manifest = RunManifest("train", results[0].config.to_dict(), seed=config.seed)
    rows = []
    finals = []
    for result in results:
        for point in result.curve:
            row = {"seed": result.config.seed}
            row.update(point.to_dict())
            rows.append(row)
        finals.append(result.curve[-1])
        name = f"policy_{result.config.seed}.json"
        manifest.add(write_json(result.qtable.to_json(), os.path.join(out, name)))
    manifest.add(write_rows_csv(rows, os.path.join(out, "curve.csv")))

    success = np.asarray([p.eval_success for p in finals], dtype=np.float64)
    returns = np.asarray([p.eval_return for p in finals], dtype=np.float64)
    n = len(finals)
    summary = {
        "task": config.task,
        "reward_fn": config.reward_fn,
        "seeds": [r.config.seed for r in results],
        "success_rate": float(success.mean()),
        "success_stderr": float(success.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "mean_return": float(returns.mean()),
        "return_stderr": float(returns.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
    }
    manifest.add(write_json(summary, os.path.join(out, "summary.json")))
    manifest.write(out)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    task = get_task(args.task)
    if args.policy == EXPERT:
        policy = ScriptedPolicy.from_trajectory(task.expert)
    else:
        try:
            with open(args.policy, encoding="utf-8") as f:
                policy = QTable.from_json(json.load(f))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise InvalidInputError(f"cannot parse {args.policy}: {e}") from e
        if policy.horizon != task.horizon:
            task = task.with_horizon(policy.horizon)
    result = evaluate(policy, task, args.seeds)

    out = _out_dir(args.out)
    manifest = RunManifest(
        "eval",
        {"policy": os.path.basename(args.policy), "task": task.name, "seeds": args.seeds},
    )
    summary = result.to_dict()
    summary["task"] = task.name
    manifest.add(write_json(summary, os.path.join(out, "eval.json")))
    manifest.write(out)
    return EXIT_OK


def _add_reward_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", choices=["euclidean", "cosine", "manhattan"])
    parser.add_argument("--lambda", dest="lam", type=float, help="softmax temperature")
    parser.add_argument("--epsilon", type=float, help="entropic regularization")
    parser.add_argument("--max-iter", type=int, help="Sinkhorn iteration budget")
    parser.add_argument("--kw", type=int, help="temporal mask half-width")
    parser.add_argument("--cw", type=int, help="context smoothing window")
    parser.add_argument("--theta", type=float, help="threshold reward advance level")
    parser.add_argument(
        "--strict",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="fail with exit code 3 when a transport solve does not converge",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqmatch", description=__doc__.split("\n\n")[0])
    parser.add_argument(
        "--log-level",
        default=os.getenv("SEQMATCH_LOG_LEVEL", "WARNING"),
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reward = sub.add_parser("reward", help="per-timestep rewards of one learner trajectory")
    reward.add_argument("learner")
    reward.add_argument("demo")
    reward.add_argument(
        "--fn",
        default="orca",
        choices=sorted(REWARD_FUNCTIONS) + ["temporal_ot"],
        type=str.lower,
    )
    reward.add_argument("--out", required=True)
    _add_reward_flags(reward)
    reward.set_defaults(handler=cmd_reward)

    compare = sub.add_parser("compare", help="every reward function on one pair")
    compare.add_argument("learner")
    compare.add_argument("demo")
    compare.add_argument("--out", required=True)
    compare.add_argument("--plot", action="store_true", help="also write an SVG chart")
    _add_reward_flags(compare)
    compare.set_defaults(handler=cmd_compare)

    scenario = sub.add_parser("scenario", help="replay the counterexample scenarios")
    scenario.add_argument("--name", default="all", choices=sorted(SCENARIOS) + ["all"])
    scenario.add_argument("--out", required=True)
    scenario.add_argument("--jobs", type=int, default=1)
    scenario.set_defaults(handler=cmd_scenario)

    perturb_cmd = sub.add_parser("perturb", help="generate misaligned demonstrations")
    perturb_cmd.add_argument("demo")
    perturb_cmd.add_argument("--mode", choices=["subsample", "random"], default="random")
    perturb_cmd.add_argument("--keep", type=float, default=0.2)
    perturb_cmd.add_argument("--speedup", type=int, default=5)
    perturb_cmd.add_argument("--direction", choices=[FASTER, SLOWER], default=FASTER)
    perturb_cmd.add_argument("--count", type=int, default=6)
    perturb_cmd.add_argument("--segments", type=int, default=5)
    perturb_cmd.add_argument("--segments-changed", type=int)
    perturb_cmd.add_argument("--seed", type=int)
    perturb_cmd.add_argument("--out", required=True)
    perturb_cmd.add_argument("--jobs", type=int, default=1)
    perturb_cmd.set_defaults(handler=cmd_perturb)

    train_cmd = sub.add_parser("train", help="train a tabular agent from a config file")
    train_cmd.add_argument("config", help=".json or .toml TrainConfig")
    train_cmd.add_argument("--seed", type=int)
    train_cmd.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    train_cmd.add_argument("--out", required=True)
    train_cmd.add_argument("--jobs", type=int, default=1)
    train_cmd.set_defaults(handler=cmd_train)

    eval_cmd = sub.add_parser("eval", help="evaluate a saved policy or the scripted expert")
    eval_cmd.add_argument("policy", help=f"policy JSON, or `{EXPERT}`")
    eval_cmd.add_argument("task")
    eval_cmd.add_argument("--seeds", type=int, default=3)
    eval_cmd.add_argument("--out", required=True)
    eval_cmd.set_defaults(handler=cmd_eval)
    return parser


def cli(args=None) -> int:
    """Process command line arguments and return the exit code."""
    if args is None:
        args = sys.argv[1:]

    parser = build_parser()
    try:
        args = parser.parse_args(args)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        if getattr(args, "fn", None) is not None:
            args.fn = canonical_name(args.fn)
        return args.handler(args)
    except (InvalidInputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as e:
        print(f"solver did not converge: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ScenarioClaimError as e:
        print(f"scenario check failed: {e}", file=sys.stderr)
        return EXIT_CLAIM


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
