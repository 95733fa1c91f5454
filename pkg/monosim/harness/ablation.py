#  Copyright 2022 MonoSIM Contributors
#
#  This file is part of MonoSIM.
#
#  MonoSIM is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  MonoSIM is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with MonoSIM.  If not, see <https://www.gnu.org/licenses/>.

"""
Ablation runs: the same harness trained with different subsets of the simulation losses,
evaluated on held-out scenes, plus the confidence-threshold sweep of the teacher predictions.
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from monosim.common.util import derive_seed, format_real
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import ObjectClass, SoftLabelSet
from monosim.evaluation.average_precision import RecallSet, average_precision
from monosim.harness.evaluate import predict_all
from monosim.harness.scene_generator import generate_scenes
from monosim.harness.student import StudentModel
from monosim.harness.trainer import Trainer
from monosim.simulation.response import ThresholdPolicy, filter_soft_labels

logger = logging.getLogger(__name__)

# Held-out scenes use this salt so they never coincide with training scenes
EVAL_SALT = 11
UNTRAINED = 'untrained'
# Configuration name -> config changes; response-level simulation means training on soft labels
ABLATIONS: Dict[str, Dict[str, bool]] = {
    'baseline': dict(use_soft_labels=False, scene_simulation=False, roi_simulation=False),
    'rls': dict(use_soft_labels=True, scene_simulation=False, roi_simulation=False),
    'rls+sfs': dict(use_soft_labels=True, scene_simulation=True, roi_simulation=False),
    'rls+rfs': dict(use_soft_labels=True, scene_simulation=False, roi_simulation=True),
    'rls+sfs+rfs': dict(use_soft_labels=True, scene_simulation=True, roi_simulation=True),
}
THRESHOLD_GRID = (0.0, 0.3, 0.5, 0.7, 0.9)
ABLATION_COLUMNS = ('configuration', 'seed', 'ap_r11', 'ap_r40')


@dataclass
class AblationResult:
    configuration: str
    seed: int
    ap_r11: float
    ap_r40: float


def evaluation_scenes(config: HarnessConfig, seed: int, count: int):
    return generate_scenes(derive_seed(seed, EVAL_SALT), count, config, first_frame=config.train_scenes)


def _ap(detections: List[SoftLabelSet], scenes, iou: float, object_class: ObjectClass) -> Tuple[float, float]:
    truth = [s.labels for s in scenes]
    return tuple(average_precision(detections, truth, iou, r, object_class).value
                 for r in (RecallSet.R11, RecallSet.R40))


def run_ablation(config: HarnessConfig, seeds: Sequence[int], steps: int, eval_count: int, iou=0.5,
                 object_class=ObjectClass.CAR, configurations: Sequence[str] = tuple(ABLATIONS),
                 wrap: Callable[[Iterable], Iterable] = iter) -> List[AblationResult]:
    """
    For every seed: the untrained student, then every configuration trained for steps
    steps from the same initialisation and scenes.
    """
    results = []
    for seed in seeds:
        scenes = evaluation_scenes(config, seed, eval_count)
        untrained = StudentModel(config, seed)
        results.append(AblationResult(UNTRAINED, seed, *_ap(predict_all(untrained, scenes), scenes, iou,
                                                            object_class)))
        for name in configurations:
            trainer = Trainer(config.updated(**ABLATIONS[name]), seed)
            trainer.run(steps, wrap)
            r11, r40 = _ap(predict_all(trainer.student, scenes), scenes, iou, object_class)
            logger.info(f"Seed {seed}, {name}: AP|R11 {r11:.4f}, AP|R40 {r40:.4f}")
            results.append(AblationResult(name, seed, r11, r40))
    return results


def summarize(results: Sequence[AblationResult]) -> Dict[str, Tuple[float, float]]:
    """Mean (AP|R11, AP|R40) per configuration, ignoring undefined values."""
    summary = {}
    for name in dict.fromkeys(r.configuration for r in results):
        rows = [r for r in results if r.configuration == name]
        r11 = np.array([r.ap_r11 for r in rows])
        r40 = np.array([r.ap_r40 for r in rows])
        summary[name] = (float(np.nanmean(r11)) if np.any(~np.isnan(r11)) else float('nan'),
                         float(np.nanmean(r40)) if np.any(~np.isnan(r40)) else float('nan'))
    return summary


class AblationWriter:
    def __init__(self, results: Sequence[AblationResult]):
        self.results = results

    def write(self) -> bytes:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(ABLATION_COLUMNS)
        for r in self.results:
            writer.writerow([r.configuration, r.seed, format_real(r.ap_r11), format_real(r.ap_r40)])
        return buffer.getvalue().encode('utf-8')


def sweep_thresholds(predictions: Sequence[SoftLabelSet], grid: Sequence[float] = THRESHOLD_GRID) \
        -> List[Tuple[float, Dict[ObjectClass, int]]]:
    """Kept boxes per class when every class is filtered at the same threshold."""
    rows = []
    for threshold in grid:
        policy = ThresholdPolicy.uniform(threshold)
        kept = [filter_soft_labels(p, policy) for p in predictions]
        rows.append((threshold, {c: sum(len(k.of_class(c)) for k in kept) for c in ObjectClass}))
    return rows
