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

"""Bird's-eye-view overlap of boxes and greedy BEV non-maximum suppression."""

from typing import Sequence

import numpy as np

from monosim.data.kitti_label.model import DetectionBox, SoftLabelSet


def _rectangle_area(rects: np.ndarray) -> np.ndarray:
    return (rects[..., 2] - rects[..., 0]) * (rects[..., 3] - rects[..., 1])


def bev_iou_matrix(rects_a: np.ndarray, rects_b: np.ndarray) -> np.ndarray:
    """
    Pairwise IoU of axis-aligned rectangles (x_min, z_min, x_max, z_max).
    Returns an A x B matrix.
    """
    rects_a = np.asarray(rects_a, dtype=np.float64).reshape(-1, 4)
    rects_b = np.asarray(rects_b, dtype=np.float64).reshape(-1, 4)
    lo = np.maximum(rects_a[:, None, :2], rects_b[None, :, :2])
    hi = np.minimum(rects_a[:, None, 2:], rects_b[None, :, 2:])
    inter = np.prod(np.clip(hi - lo, 0.0, None), axis=2)
    union = _rectangle_area(rects_a)[:, None] + _rectangle_area(rects_b)[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def bev_iou(a: DetectionBox, b: DetectionBox) -> float:
    """Intersection over union of the axis-aligned ground footprints. Yaw is ignored."""
    return float(bev_iou_matrix(np.array(a.bev_rectangle()), np.array(b.bev_rectangle()))[0, 0])


def nms_bev(labels: SoftLabelSet, iou_threshold: float) -> SoftLabelSet:
    """
    Greedy per-class suppression: boxes are visited by descending confidence and dropped
    when their BEV IoU with an already kept box of the same class exceeds iou_threshold.
    """
    boxes: Sequence[DetectionBox] = labels.boxes
    if not boxes:
        return SoftLabelSet(labels.frame_id, [])
    order = np.argsort([-b.confidence for b in boxes], kind='stable')
    rects = np.array([b.bev_rectangle() for b in boxes])
    iou = bev_iou_matrix(rects, rects)
    kept = []
    for i in order:
        if all(boxes[k].object_class != boxes[i].object_class or iou[i, k] <= iou_threshold for k in kept):
            kept.append(i)
    return SoftLabelSet(labels.frame_id, [boxes[i] for i in kept])
