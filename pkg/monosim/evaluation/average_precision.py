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
Average precision over interpolated recall positions (AP|R11 and AP|R40) with greedy,
confidence-ordered matching of detections to ground truth.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.evaluation.iou import bev_iou_matrix


class RecallSet(Enum):
    R11 = 'R11'
    R40 = 'R40'

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name: str) -> 'RecallSet':
        for member in cls:
            if member.value == name.upper():
                return member
        raise ValueError(f"Unknown recall set: {name}")

    @property
    def positions(self) -> np.ndarray:
        if self == RecallSet.R11:
            return np.arange(11) / 10.0
        return np.arange(1, 41) / 40.0


@dataclass
class ApResult:
    """value is NaN when AP is undefined; reason then says why."""
    value: float
    num_ground_truth: int
    num_detections: int
    reason: Optional[str] = None

    @property
    def defined(self) -> bool:
        return not math.isnan(self.value)


def precision_recall_curve(detections: Sequence[SoftLabelSet], ground_truth: Sequence[SoftLabelSet],
                           iou_threshold: float, object_class: Optional[ObjectClass] = None) \
        -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Returns (recall, precision, number of ground-truth boxes), one curve point per detection
    in descending confidence order. Frames are paired by position. Each ground-truth box is
    matched at most once, by the best-overlapping unmatched box of its class with
    IoU >= iou_threshold.
    """
    if len(detections) != len(ground_truth):
        raise ValueError(f"Got detections for {len(detections)} frames but ground truth for {len(ground_truth)}.")

    def select(boxes: Sequence[DetectionBox]) -> List[DetectionBox]:
        return [b for b in boxes if object_class is None or b.object_class == object_class]

    gt_boxes = [select(g.boxes) for g in ground_truth]
    num_gt = sum(len(g) for g in gt_boxes)
    flat = [(frame, box) for frame, labels in enumerate(detections) for box in select(labels.boxes)]
    order = np.argsort([-box.confidence for _, box in flat], kind='stable')

    matched = [np.zeros(len(g), dtype=bool) for g in gt_boxes]
    gt_rects = [np.array([b.bev_rectangle() for b in g]).reshape(-1, 4) for g in gt_boxes]
    tp = np.zeros(len(flat))
    for rank, i in enumerate(order):
        frame, box = flat[i]
        if not gt_boxes[frame]:
            continue
        iou = bev_iou_matrix(np.array(box.bev_rectangle()), gt_rects[frame])[0]
        same_class = np.array([g.object_class == box.object_class for g in gt_boxes[frame]])
        iou[~same_class | matched[frame]] = -1.0
        best = int(iou.argmax())
        if iou[best] >= iou_threshold:
            matched[frame][best] = True
            tp[rank] = 1.0

    cum_tp = np.cumsum(tp)
    precision = cum_tp / np.arange(1, len(flat) + 1)
    recall = cum_tp / num_gt if num_gt > 0 else np.zeros(len(flat))
    return recall, precision, num_gt


def interpolated_precision(recall: np.ndarray, precision: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """For every recall position r: max precision over curve points with recall >= r, 0 if none."""
    out = np.zeros(len(positions))
    for i, r in enumerate(positions):
        reached = recall >= r
        if np.any(reached):
            out[i] = precision[reached].max()
    return out


def average_precision(detections: Sequence[SoftLabelSet], ground_truth: Sequence[SoftLabelSet],
                      iou_threshold: float, recall_set: RecallSet,
                      object_class: Optional[ObjectClass] = None) -> ApResult:
    """Mean interpolated precision over the recall positions of recall_set."""
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"IoU threshold must be in (0, 1], got {iou_threshold}.")
    recall, precision, num_gt = precision_recall_curve(detections, ground_truth, iou_threshold, object_class)
    if num_gt == 0:
        what = f"class {object_class}" if object_class is not None else "any class"
        return ApResult(float('nan'), 0, len(recall), f"no ground-truth boxes of {what}")
    value = float(interpolated_precision(recall, precision, recall_set.positions).mean())
    return ApResult(value, num_gt, len(recall))
