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
Response-level simulation: confidence filtering of teacher predictions into soft labels,
anchor assignment and the toy detection loss supervised by those soft labels.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.evaluation.iou import bev_iou_matrix
from monosim.numerics import functional as F
from monosim.numerics.tensor import Tensor, ensure_tensor

# Box parameters per anchor: dx, dy, dz, log(h/ha), log(w/wa), log(l/la), yaw
BOX_PARAMS = 7
# Head outputs per anchor: box parameters + objectness logit
ANCHOR_OUTPUTS = BOX_PARAMS + 1
# Assignment codes for anchors that are not positive
NEGATIVE = -1
IGNORED = -2
# Log size ratios are clipped to this range when decoding
MAX_LOG_RATIO = 3.0


@dataclass
class ThresholdPolicy:
    """Per-class confidence thresholds. Defaults: Car 0.7, Pedestrian and Cyclist 0."""
    thresholds: Dict[ObjectClass, float] = field(default_factory=lambda: {
        ObjectClass.CAR: 0.7,
        ObjectClass.PEDESTRIAN: 0.0,
        ObjectClass.CYCLIST: 0.0,
    })

    def __post_init__(self):
        for cls, value in self.thresholds.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Threshold for {cls} must be in [0, 1], got {value}.")

    @classmethod
    def uniform(cls, value: float) -> 'ThresholdPolicy':
        return cls({c: value for c in ObjectClass})

    def threshold(self, object_class: ObjectClass) -> float:
        if object_class not in self.thresholds:
            raise ValueError(f"No confidence threshold for class {object_class}.")
        return self.thresholds[object_class]


def filter_soft_labels(predictions: SoftLabelSet, policy: ThresholdPolicy) -> SoftLabelSet:
    """Keeps boxes with confidence >= their class threshold, in order. Kept boxes are the same objects."""
    kept = [box for box in predictions.boxes if box.confidence >= policy.threshold(box.object_class)]
    return SoftLabelSet(predictions.frame_id, kept)


def confidence_histogram(predictions: Sequence[SoftLabelSet], bins: int) -> Dict[ObjectClass, np.ndarray]:
    """Per-class counts over uniform bins of [0, 1]; the last bin includes 1."""
    if bins < 1:
        raise ValueError(f"bins must be at least 1, got {bins}.")
    counts = {c: np.zeros(bins, dtype=np.int64) for c in ObjectClass}
    for labels in predictions:
        for box in labels:
            counts[box.object_class][min(int(box.confidence * bins), bins - 1)] += 1
    return counts


def sample_counts(ground_truth: Sequence[SoftLabelSet], soft_labels: Sequence[SoftLabelSet]) \
        -> Dict[ObjectClass, Tuple[int, int]]:
    """Per class: (ground-truth samples, filtered soft-label samples)."""
    out = {}
    for c in ObjectClass:
        gt = sum(len(s.of_class(c)) for s in ground_truth)
        soft = sum(len(s.of_class(c)) for s in soft_labels)
        out[c] = (gt, soft)
    return out


class AnchorSet:
    """
    One anchor per class per cell of a H x W ground grid. Anchor a = k*H*W + i*W + j sits at
    the center of cell (i, j), i along the lateral x axis and j along the forward z axis,
    on the ground plane, with the mean dimensions of class k.
    """
    def __init__(self, height: int, width: int, x_range: Tuple[float, float], z_range: Tuple[float, float],
                 ground_y: float, classes: Sequence[ObjectClass] = tuple(ObjectClass)):
        self.height = height
        self.width = width
        self.classes = list(classes)
        xs = x_range[0] + (np.arange(height) + 0.5) * (x_range[1] - x_range[0]) / height
        zs = z_range[0] + (np.arange(width) + 0.5) * (z_range[1] - z_range[0]) / width
        gx, gz = np.meshgrid(xs, zs, indexing='ij')
        cells = height * width
        self.centers = np.tile(np.stack([gx.ravel(), np.full(cells, ground_y), gz.ravel()], axis=1),
                               (len(self.classes), 1))
        self.dimensions = np.repeat(np.array([c.mean_dimensions for c in self.classes]), cells, axis=0)
        self.class_index = np.repeat(np.arange(len(self.classes)), cells)

    def __len__(self):
        return self.centers.shape[0]

    def object_class(self, anchor: int) -> ObjectClass:
        return self.classes[self.class_index[anchor]]

    def rectangles(self) -> np.ndarray:
        """A x 4 axis-aligned footprints (x_min, z_min, x_max, z_max), length along x."""
        half_l = self.dimensions[:, 2] / 2
        half_w = self.dimensions[:, 1] / 2
        x, z = self.centers[:, 0], self.centers[:, 2]
        return np.stack([x - half_l, z - half_w, x + half_l, z + half_w], axis=1)

    def encode(self, anchor: int, box: DetectionBox) -> np.ndarray:
        ca = self.centers[anchor]
        da = self.dimensions[anchor]
        return np.array([
            box.center[0] - ca[0], box.center[1] - ca[1], box.center[2] - ca[2],
            np.log(box.dimensions[0] / da[0]), np.log(box.dimensions[1] / da[1]), np.log(box.dimensions[2] / da[2]),
            box.yaw,
        ])

    def decode(self, anchor: int, params: np.ndarray, confidence: float) -> DetectionBox:
        ca = self.centers[anchor]
        da = self.dimensions[anchor]
        ratios = np.exp(np.clip(params[3:6], -MAX_LOG_RATIO, MAX_LOG_RATIO))
        return DetectionBox(
            object_class=self.object_class(anchor),
            center=tuple(float(v) for v in ca + params[:3]),
            dimensions=tuple(float(v) for v in da * ratios),
            yaw=float(params[6]),
            confidence=float(np.clip(confidence, 0.0, 1.0)),
        )


@dataclass
class AnchorAssignment:
    """matched[a] is a label index for positive anchors, NEGATIVE or IGNORED otherwise."""
    anchors: AnchorSet
    matched: np.ndarray

    @property
    def positives(self) -> np.ndarray:
        return np.nonzero(self.matched >= 0)[0]

    @property
    def negatives(self) -> np.ndarray:
        return np.nonzero(self.matched == NEGATIVE)[0]


def match_anchors(anchors: AnchorSet, labels: SoftLabelSet, positive_iou=0.5, negative_iou=0.3) -> AnchorAssignment:
    """
    Same-class BEV IoU matching: IoU >= positive_iou is positive, < negative_iou negative,
    anything between ignored. Every label also claims its best overlapping anchor.
    """
    matched = np.full(len(anchors), NEGATIVE, dtype=np.int64)
    if len(labels) == 0 or len(anchors) == 0:
        return AnchorAssignment(anchors, matched)
    label_rects = np.array([b.bev_rectangle() for b in labels.boxes])
    label_class = np.array([anchors.classes.index(b.object_class) if b.object_class in anchors.classes else -1
                            for b in labels.boxes])
    iou = bev_iou_matrix(anchors.rectangles(), label_rects)
    iou[anchors.class_index[:, None] != label_class[None, :]] = 0.0
    best_label = iou.argmax(axis=1)
    best_iou = iou[np.arange(len(anchors)), best_label]
    matched[best_iou >= negative_iou] = IGNORED
    positive = best_iou >= positive_iou
    matched[positive] = best_label[positive]
    for j in range(len(labels)):
        a = int(iou[:, j].argmax())
        if iou[a, j] > 0:
            matched[a] = j
    return AnchorAssignment(anchors, matched)


def regression_targets(assignment: AnchorAssignment, labels: SoftLabelSet) -> np.ndarray:
    targets = np.zeros((len(assignment.anchors), BOX_PARAMS))
    for a in assignment.positives:
        targets[a] = assignment.anchors.encode(a, labels.boxes[assignment.matched[a]])
    return targets


def response_loss(box_params: Tensor, objectness: Tensor, labels: SoftLabelSet,
                  assignment: AnchorAssignment) -> Tensor:
    """
    Smooth-L1 over the box parameters of positive anchors (normalised by the positive count)
    plus binary cross-entropy of the objectness probabilities, averaged separately over the
    positive and the negative anchors. Logs are clamped.
    """
    box_params = ensure_tensor(box_params)
    objectness = ensure_tensor(objectness)
    count = len(assignment.anchors)
    if count == 0:
        raise ValueError("response_loss needs at least one anchor.")
    if box_params.shape != (count, BOX_PARAMS) or objectness.shape != (count,):
        raise ValueError(f"Predictions must be ({count}, {BOX_PARAMS}) and ({count},), "
                         f"got {box_params.shape} and {objectness.shape}.")
    if np.any(assignment.matched >= len(labels)):
        raise ValueError("Anchor assignment refers to a label that does not exist.")

    positive = (assignment.matched >= 0).astype(np.float64)
    negative = (assignment.matched == NEGATIVE).astype(np.float64)
    targets = regression_targets(assignment, labels)

    reg = F.total(F.mul(F.smooth_l1(F.sub(box_params, targets)), positive[:, None]))
    reg = reg / max(1.0, positive.sum())

    pos_bce = F.total(F.mul(F.clamped_log(objectness), positive))
    neg_bce = F.total(F.mul(F.clamped_log(F.sub(1.0, objectness)), negative))
    cls = F.add(F.scale(pos_bce, -1.0 / max(1.0, positive.sum())),
                F.scale(neg_bce, -1.0 / max(1.0, negative.sum())))
    return F.add(reg, cls)


def decode_predictions(box_params: np.ndarray, probabilities: np.ndarray, anchors: AnchorSet,
                       frame_id: int, score_threshold: float) -> SoftLabelSet:
    """
    Decodes every anchor whose objectness reaches score_threshold into a DetectionBox.
    A threshold of 0 keeps every anchor, leaving the ranking to AP.
    """
    boxes: List[DetectionBox] = []
    for a in np.nonzero(probabilities >= score_threshold)[0]:
        boxes.append(anchors.decode(a, box_params[a], probabilities[a]))
    return SoftLabelSet(frame_id, boxes)
