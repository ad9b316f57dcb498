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
Output writers: CSV tables, JSON summaries, SVG reward charts and the run
manifest placed in every output directory.
"""

import json
import logging
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np
import pyarrow as pa
import pyarrow.csv

from seqmatch.common import package_version

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

_CSV_OPTIONS = pyarrow.csv.WriteOptions(quoting_style="none")

# one colour per series, cycled
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def write_table_csv(columns: Mapping[str, Sequence[Any]], path: str) -> str:
    table = pa.Table.from_arrays(
        [pa.array(list(values)) for values in columns.values()],
        names=list(columns.keys()),
    )
    pyarrow.csv.write_csv(table, path, write_options=_CSV_OPTIONS)
    logger.info("wrote %s", path)
    return str(path)


def write_rows_csv(rows: Sequence[Mapping[str, Any]], path: str) -> str:
    if not rows:
        raise ValueError("no rows to write")
    names = list(rows[0].keys())
    return write_table_csv({name: [row[name] for row in rows] for name in names}, path)


def write_rewards_csv(rewards: Sequence[float], path: str) -> str:
    rewards = np.asarray(rewards, dtype=np.float64)
    return write_table_csv(
        {"t": np.arange(len(rewards), dtype=np.int64), "reward": rewards}, path
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(document: Any, path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True, default=_jsonable)
        f.write("\n")
    logger.info("wrote %s", path)
    return str(path)


def render_svg(
    series: Mapping[str, Sequence[float]],
    path: str,
    title: str = "",
    width: int = 640,
    height: int = 400,
) -> str:
    """
    Line chart of several equally indexed series: axes, one polyline per
    series and a legend.
    """
    margin = 48
    values = [np.asarray(v, dtype=np.float64) for v in series.values()]
    longest = max((len(v) for v in values), default=1)
    lo = min((float(v.min()) for v in values if len(v)), default=0.0)
    hi = max((float(v.max()) for v in values if len(v)), default=1.0)
    if hi == lo:
        hi, lo = hi + 0.5, lo - 0.5
    plot_w, plot_h = width - 2 * margin, height - 2 * margin

    def x_of(t: int) -> float:
        return margin + (t / max(longest - 1, 1)) * plot_w

    def y_of(v: float) -> float:
        return margin + (1.0 - (v - lo) / (hi - lo)) * plot_h

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    if title:
        ET.SubElement(svg, "text", x=str(margin), y=str(margin / 2)).text = title
    axes = {"stroke": "#000000", "stroke-width": "1"}
    bottom = height - margin
    for x2, y1 in ((width - margin, bottom), (margin, margin)):
        ET.SubElement(
            svg, "line", x1=str(margin), y1=str(y1), x2=str(x2), y2=str(bottom), **axes
        )
    ET.SubElement(svg, "text", x="4", y=str(margin)).text = f"{hi:.3g}"
    ET.SubElement(svg, "text", x="4", y=str(bottom)).text = f"{lo:.3g}"
    ET.SubElement(svg, "text", x=str(width - margin), y=str(height - 8)).text = "t"

    for k, (name, v) in enumerate(zip(series.keys(), values)):
        colour = _PALETTE[k % len(_PALETTE)]
        points = " ".join(f"{x_of(t):.2f},{y_of(float(r)):.2f}" for t, r in enumerate(v))
        ET.SubElement(
            svg,
            "polyline",
            points=points,
            fill="none",
            stroke=colour,
            **{"stroke-width": "1.5", "data-series": name},
        )
        legend_y = margin + 14 * (k + 1)
        legend = ET.SubElement(
            svg, "text", x=str(width - margin - 90), y=str(legend_y), fill=colour
        )
        legend.text = name

    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
    logger.info("wrote %s", path)
    return str(path)


@dataclass
class RunManifest:
    """
    Record of one command's inputs and outputs. Contains no timestamps, so
    reruns with the same inputs write identical manifests.
    """

    command: str
    config: Dict[str, Any]
    seed: Any = None
    version: str = field(default_factory=package_version)
    outputs: List[str] = field(default_factory=list)

    def add(self, path: str) -> str:
        self.outputs.append(os.path.basename(str(path)))
        return str(path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "outputs": sorted(self.outputs),
        }

    def write(self, out_dir: str) -> str:
        return write_json(self.to_dict(), os.path.join(out_dir, MANIFEST_NAME))
