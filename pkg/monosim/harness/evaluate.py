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

"""Evaluation of any detector with a predict(scene) method on synthetic scenes."""

import logging
import warnings
from typing import List, Sequence

from monosim.data.kitti_label.model import ObjectClass, SoftLabelSet
from monosim.data.scene.model import SyntheticScene
from monosim.evaluation.average_precision import RecallSet
from monosim.evaluation.report import ApReportRow, evaluation_report

logger = logging.getLogger(__name__)


def predict_all(predictor, scenes: Sequence[SyntheticScene]) -> List[SoftLabelSet]:
    if hasattr(predictor, 'eval'):
        predictor.eval()
    return [predictor.predict(scene) for scene in scenes]


def evaluate(predictor, scenes: Sequence[SyntheticScene], iou_thresholds: Sequence[float],
             recall_sets: Sequence[RecallSet], classes: Sequence[ObjectClass] = tuple(ObjectClass)) \
        -> List[ApReportRow]:
    """
    Runs the predictor's inference path on every scene and reports AP per class, IoU threshold
    and recall set against the scenes' ground truth.
    """
    detections = predict_all(predictor, scenes)
    rows = evaluation_report(detections, [s.labels for s in scenes], iou_thresholds, recall_sets, classes)
    for row in rows:
        if not row.result.defined:
            warnings.warn(f"AP for {row.object_class} is undefined: {row.result.reason}.")
    logger.info(f"Evaluated {len(scenes)} scenes, {sum(len(d) for d in detections)} detections.")
    return rows
