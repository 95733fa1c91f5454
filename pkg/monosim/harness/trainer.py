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
The training loop: teacher targets per scene, the composed objective and one gradient-descent
update per step.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from monosim.common.util import format_real
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import SoftLabelSet
from monosim.data.scene.model import SyntheticScene
from monosim.harness.scene_generator import generate_scenes
from monosim.harness.student import StudentModel
from monosim.harness.teacher import AnalyticTeacher, TeacherOutput, teacher_forward
from monosim.numerics import functional as F
from monosim.numerics.parameters import GradientDescent
from monosim.numerics.tensor import Tensor
from monosim.simulation.composition import LossWeights, fuse_global_local, total_loss
from monosim.simulation.render import PointFeatureSet, compute_validity_mask, render_points
from monosim.simulation.response import (AnchorAssignment, AnchorSet, ThresholdPolicy, filter_soft_labels,
                                         match_anchors, response_loss)
from monosim.simulation.roi import roi_loss, roi_teacher_map, to_bev_frame
from monosim.simulation.scene import scene_loss

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ('step', 'L', 'L_response', 'L_scene', 'L_RoI', 'alpha', 'beta')


class NonFiniteLossError(FloatingPointError):
    def __init__(self, component: str, value: float, frame_id: int):
        super().__init__(f"Loss component {component} is not finite ({value}) on scene {frame_id}.")
        self.component = component
        self.value = value


@dataclass
class LossReport:
    step: int
    total: float
    response: float
    scene: float
    roi: float
    alpha: float = math.nan
    beta: float = math.nan


@dataclass
class TeacherTargets:
    """Everything the student is supervised with on one scene. Computed once per scene."""
    scene_map: np.ndarray
    scene_mask: np.ndarray
    roi_map: np.ndarray
    roi_mask: np.ndarray
    labels: SoftLabelSet
    assignment: AnchorAssignment


def teacher_roi_map(config: HarnessConfig, scene: SyntheticScene, teacher: TeacherOutput):
    """RoI target map and mask, on the pooled BEV grid or, with roi_alignment=image, rendered at scene resolution."""
    points = teacher.all_roi_points(config.teacher_roi_channels)
    if config.roi_alignment == 'image':
        rendered = render_points(points, scene.camera.scaled(config.image_scale),
                                 config.scene_feature_height, config.scene_feature_width)
        return rendered, compute_validity_mask(rendered)
    bev_points = PointFeatureSet(points.features, to_bev_frame(points.coordinates, scene.ground_y))
    bounds = (np.array([config.bev_x_min, config.bev_z_min, config.bev_up_min]),
              np.array([config.bev_x_max, config.bev_z_max, config.bev_up_max]))
    return roi_teacher_map(bev_points, (config.voxel_x, config.voxel_y, config.voxel_z), bounds,
                           config.roi_map_height, config.roi_map_width)


def build_targets(config: HarnessConfig, scene: SyntheticScene, teacher: TeacherOutput,
                  policy: ThresholdPolicy, anchors: AnchorSet) -> TeacherTargets:
    scene_map = render_points(teacher.scene_points, scene.camera.scaled(config.image_scale),
                              config.scene_feature_height, config.scene_feature_width)
    roi_map, roi_mask = teacher_roi_map(config, scene, teacher)
    if config.use_soft_labels:
        labels = filter_soft_labels(teacher.predictions, policy)
    else:
        labels = scene.labels
    assignment = match_anchors(anchors, labels, config.positive_iou, config.negative_iou)
    return TeacherTargets(scene_map, compute_validity_mask(scene_map), roi_map, roi_mask, labels, assignment)


def compute_losses(student: StudentModel, scene: SyntheticScene, targets: TeacherTargets,
                   weights: LossWeights, update_stats=True) -> Dict[str, Tensor]:
    """The total objective and its components, as tensors connected to the student parameters."""
    config = student.config
    out = student.forward(scene)
    losses = {'response': response_loss(out.box_params, out.objectness, targets.labels, targets.assignment)}

    scene_terms, roi_terms = {}, {}
    for b in student.branches:
        if config.scene_simulation:
            aligned = student.scene_align[b](out.scene_features[b], update_stats)
            scene_terms[b] = scene_loss(aligned, targets.scene_map, targets.scene_mask)
        if config.roi_simulation:
            if config.roi_alignment == 'image':
                features = F.adaptive_avg_pool2d(out.roi_pixel_features[b], config.scene_feature_height,
                                                 config.scene_feature_width)
            else:
                features = out.roi_features[b]
            aligned = student.roi_align[b](features, update_stats)
            roi_terms[b] = roi_loss(aligned, targets.roi_map, targets.roi_mask)

    losses['scene'] = _combine(scene_terms, student.fusion.raw_alpha if student.fusion else None)
    losses['roi'] = _combine(roi_terms, student.fusion.raw_beta if student.fusion else None)
    losses['total'] = total_loss(losses['response'], losses['scene'], losses['roi'], weights)
    return losses


def _combine(terms: Dict[str, Tensor], raw_weight: Optional[Tensor]) -> Tensor:
    if not terms:
        return Tensor(0.0)
    if raw_weight is None:
        return terms['']
    return fuse_global_local(terms['glo'], terms['loc'], raw_weight)


def _report(step: int, student: StudentModel, losses: Dict[str, Tensor]) -> LossReport:
    report = LossReport(step, losses['total'].item(), losses['response'].item(), losses['scene'].item(),
                        losses['roi'].item())
    if student.fusion is not None:
        report.alpha = student.fusion.alpha
        report.beta = student.fusion.beta
    return report


def check_losses(losses: Dict[str, Tensor], frame_id: int):
    for name in ('response', 'scene', 'roi', 'total'):
        value = losses[name].item()
        if not math.isfinite(value):
            raise NonFiniteLossError(name, value, frame_id)


def train_step(student: StudentModel, scene: SyntheticScene, teacher: TeacherOutput, weights: LossWeights,
               policy: ThresholdPolicy, optimizer: GradientDescent, targets: Optional[TeacherTargets] = None,
               step=0) -> LossReport:
    """
    One update of the student, its alignment heads and fusion weights. The teacher output
    is only read. Raises NonFiniteLossError before touching any parameter.
    """
    if targets is None:
        targets = build_targets(student.config, scene, teacher, policy, student.anchors)
    student.train()
    student.params.zero_grad()
    losses = compute_losses(student, scene, targets, weights)
    check_losses(losses, scene.frame_id)
    losses['total'].backward()
    optimizer.step()
    report = _report(step, student, losses)
    logger.debug(f"Step {step}: {report}")
    return report


class Trainer:
    """Owns the training scenes, the frozen teacher, the student and the optimizer state."""
    def __init__(self, config: HarnessConfig, seed: Optional[int] = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.scenes = generate_scenes(self.seed, config.train_scenes, config)
        self.teacher = AnalyticTeacher(config)
        self.student = StudentModel(config, self.seed)
        self.optimizer = GradientDescent(self.student.params, config.learning_rate)
        self.weights = LossWeights(config.lambda_scene, config.lambda_roi)
        self.policy = ThresholdPolicy(config.thresholds)
        self.step_count = 0
        self._outputs: Dict[int, TeacherOutput] = {}
        self._targets: Dict[int, TeacherTargets] = {}

    def teacher_output(self, index: int) -> TeacherOutput:
        if index not in self._outputs:
            self._outputs[index] = teacher_forward(self.teacher, self.scenes[index])
        return self._outputs[index]

    def targets(self, index: int) -> TeacherTargets:
        if index not in self._targets:
            self._targets[index] = build_targets(self.config, self.scenes[index], self.teacher_output(index),
                                                 self.policy, self.student.anchors)
        return self._targets[index]

    def step(self) -> LossReport:
        index = self.step_count % len(self.scenes)
        report = train_step(self.student, self.scenes[index], self.teacher_output(index), self.weights,
                            self.policy, self.optimizer, self.targets(index), self.step_count)
        self.step_count += 1
        return report

    def run(self, steps: int, wrap: Callable[[Iterable], Iterable] = iter) -> List[LossReport]:
        return [self.step() for _ in wrap(range(steps))]

    def measure(self, index=0) -> LossReport:
        """Losses on one training scene without updating anything."""
        self.student.train()
        losses = compute_losses(self.student, self.scenes[index], self.targets(index), self.weights,
                                update_stats=False)
        return _report(self.step_count, self.student, losses)


class MetricsWriter:
    def __init__(self, reports: Iterable[LossReport]):
        self.reports = reports

    def write(self) -> bytes:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(METRICS_COLUMNS)
        for r in self.reports:
            writer.writerow([r.step] + [format_real(v, 9) for v in (r.total, r.response, r.scene, r.roi,
                                                                    r.alpha, r.beta)])
        return buffer.getvalue().encode('utf-8')
