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

"""Finite-difference verification of every differentiable piece of the training objective."""

import logging
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from monosim.common.util import seeded_rng
from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.numerics import functional as F
from monosim.numerics.gradcheck import GradCheckReport, finite_difference_check
from monosim.numerics.parameters import ParameterSet
from monosim.simulation.composition import LossWeights, fuse_global_local, total_loss
from monosim.simulation.response import BOX_PARAMS, AnchorSet, match_anchors, response_loss
from monosim.simulation.roi import adaptive_avg_pool, roi_loss
from monosim.simulation.scene import AlignmentHead, align_channels, scene_loss

logger = logging.getLogger(__name__)

EPSILON = 1e-5
TOLERANCE = 1e-3

Case = Tuple[Callable, Sequence[np.ndarray]]


def _align_channels(rng: np.random.Generator) -> Case:
    head = AlignmentHead(ParameterSet(), 'check', 4, 5, rng)
    projection = rng.normal(size=(5, 3, 3))

    def op(x, weight, bias, scale, shift):
        head.weight, head.bias, head.scale, head.shift = weight, bias, scale, shift
        return F.total(F.mul(align_channels(head, x, update_stats=False), projection))
    return op, [rng.normal(size=(4, 3, 3)), rng.normal(size=(5, 4)), rng.normal(size=5),
                rng.uniform(0.5, 1.5, 5), rng.normal(size=5)]


def _masked_loss(rng: np.random.Generator, loss, shape) -> Case:
    teacher = rng.uniform(0, 1, shape)
    mask = (rng.uniform(size=shape[1:]) < 0.6).astype(np.float64)
    mask.flat[0] = 1.0
    return (lambda student: loss(student, teacher, mask)), [teacher + rng.choice([-1, 1], shape) *
                                                             rng.uniform(0.1, 0.5, shape)]


def _adaptive_avg_pool(rng: np.random.Generator) -> Case:
    projection = rng.normal(size=(2, 3, 2))
    return (lambda x: F.total(F.mul(adaptive_avg_pool(x, 3, 2), projection))), [rng.normal(size=(2, 7, 5))]


def _response_loss(rng: np.random.Generator) -> Case:
    anchors = AnchorSet(2, 2, (-4.0, 4.0), (4.0, 12.0), 1.65)
    label = DetectionBox(ObjectClass.CAR, (-2.0 + 0.3, 1.65, 6.0 + 0.2), (1.5, 1.6, 3.9), 0.1)
    labels = SoftLabelSet(0, [label])
    assignment = match_anchors(anchors, labels)
    # Box parameters stay within the quadratic zone of smooth-L1 around the targets
    box = rng.uniform(-0.4, 0.4, (len(anchors), BOX_PARAMS))

    def op(box_params, logits):
        return response_loss(box_params, F.sigmoid(logits), labels, assignment)
    return op, [box, rng.normal(size=len(anchors))]


def _total_loss(rng: np.random.Generator) -> Case:
    weights = LossWeights(0.7, 1.3)
    return (lambda a, b, c: total_loss(a, b, c, weights)), [np.array(v) for v in rng.uniform(0, 2, 3)]


def _fuse_global_local(rng: np.random.Generator) -> Case:
    return fuse_global_local, [np.array(rng.uniform(0, 2)), np.array(rng.uniform(0, 2)), np.array(rng.normal())]


def _scatter_mean(rng: np.random.Generator) -> Case:
    index = rng.integers(-1, 5, 12)
    projection = rng.normal(size=(3, 5))
    return (lambda x: F.total(F.mul(F.scatter_mean(x, index, 5), projection))), [rng.normal(size=(3, 12))]


def gradient_cases(seed=0) -> Dict[str, Case]:
    rng = seeded_rng(seed)
    return {
        'align_channels': _align_channels(rng),
        'scene_loss': _masked_loss(rng, scene_loss, (3, 4, 5)),
        'roi_loss': _masked_loss(rng, roi_loss, (4, 3, 3)),
        'adaptive_avg_pool': _adaptive_avg_pool(rng),
        'response_loss': _response_loss(rng),
        'total_loss': _total_loss(rng),
        'fuse_global_local': _fuse_global_local(rng),
        'scatter_mean': _scatter_mean(rng),
    }


def run_gradient_suite(seed=0, epsilon=EPSILON, tolerance=TOLERANCE) -> List[GradCheckReport]:
    reports = []
    for name, (op, inputs) in gradient_cases(seed).items():
        report = finite_difference_check(op, inputs, epsilon, tolerance, name)
        logger.info(repr(report))
        reports.append(report)
    return reports
