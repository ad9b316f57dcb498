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

import argparse
import time

from seqmatch import TrainConfig, evaluate, train
from seqmatch.gridworld import get_task
from seqmatch.report import write_rows_csv

ORDERING_FNS = ["ground_truth", "orca", "ot", "tot", "dtw", "threshold"]


def run(task, reward_fn, pretrain_fraction, episodes, seed):
    config = TrainConfig(
        task=task,
        reward_fn=reward_fn,
        pretrain_reward_fn="tot",
        pretrain_fraction=pretrain_fraction,
        episodes=episodes,
        q_init=10.0,
        alpha=1.0,
        epsilon_start=0.1,
        epsilon_end=0.0,
        eval_interval=max(1, episodes // 20),
        seed=seed,
    )
    start = time.time()
    result = train(config)
    final = evaluate(result.qtable, get_task(task))
    time_millis = (time.time() - start) * 1000
    return result, final, time_millis


def bench(seeds, ordering_episodes, pretrain_episodes):
    curves = []
    with open("results.csv", "w") as results:
        results.write("experiment,task,reward_fn,pretrain_fraction,seed,success,return,millis\n")
        jobs = [("ordering", "tot_slow", fn, 0.0, ordering_episodes) for fn in ORDERING_FNS]
        jobs += [
            ("pretraining", "stick_push", "orca", fraction, pretrain_episodes)
            for fraction in (0.0, 0.5)
        ]
        total_time_millis = 0
        for experiment, task, reward_fn, fraction, episodes in jobs:
            for seed in range(seeds):
                result, final, time_millis = run(task, reward_fn, fraction, episodes, seed)
                total_time_millis += time_millis
                line = "{},{},{},{},{},{},{},{}".format(
                    experiment,
                    task,
                    reward_fn,
                    fraction,
                    seed,
                    final.success_rate,
                    final.mean_return,
                    round(time_millis, 1),
                )
                print(line)
                results.write(line + "\n")
                results.flush()
                for point in result.curve:
                    row = {
                        "experiment": experiment,
                        "reward_fn": reward_fn,
                        "pretrain_fraction": fraction,
                        "seed": seed,
                    }
                    row.update(point.to_dict())
                    curves.append(row)

        print("total,{}".format(round(total_time_millis, 1)))
    write_rows_csv(curves, "curves.csv")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--ordering-episodes", type=int, default=4000)
    parser.add_argument("--pretrain-episodes", type=int, default=6000)
    args = parser.parse_args()
    bench(args.seeds, args.ordering_episodes, args.pretrain_episodes)
