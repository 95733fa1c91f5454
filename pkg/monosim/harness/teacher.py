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
The frozen analytic teacher. It stands in for a trained point-cloud detector: point features
are a fixed random projection of geometric descriptors, and its predictions are perturbed
ground-truth boxes whose confidence follows how visible the box is to the camera.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import List

import numpy as np

from monosim.common.util import array_checksum, derive_seed, seeded_rng
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.data.scene.model import SyntheticScene
from monosim.harness.scene_generator import DEPTH_SCALE, draw_class, project_box_2d
from monosim.simulation.render import PointFeatureSet, project_to_pixels

logger = logging.getLogger(__name__)

# Seed of the fixed projection weights
TEACHER_SEED = 20220601
# Salt separating the teacher's prediction noise from the scene stream
PREDICTION_SALT = 7
# A box point counts as occluded when a point of another box on its pixel is nearer by more than this (meters)
OCCLUSION_TOLERANCE = 0.3
# Scene descriptor: height, upward normal, membership, scaled depth
SCENE_DESCRIPTOR = 4
# RoI descriptor: box-relative position (3) and class one-hot (3)
ROI_DESCRIPTOR = 6
# Confidence range of spurious predictions
FALSE_POSITIVE_CONFIDENCE = (0.02, 0.3)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


@dataclass
class TeacherOutput:
    scene_points: PointFeatureSet
    roi_points: List[PointFeatureSet]
    predictions: SoftLabelSet
    visibility: np.ndarray

    def all_roi_points(self, channels: int) -> PointFeatureSet:
        return PointFeatureSet.concatenate(self.roi_points, channels)


class AnalyticTeacher:
    """
    Features are sigmoid(W d + b) for a per-point descriptor d, so every feature is strictly
    positive. The weights are drawn once from a fixed seed and never change.
    """
    def __init__(self, config: HarnessConfig, seed=TEACHER_SEED):
        self.config = config
        rng = seeded_rng(seed)
        self.scene_weight = rng.normal(0.0, 1.0, (config.teacher_scene_channels, SCENE_DESCRIPTOR))
        self.scene_bias = rng.normal(0.0, 0.5, config.teacher_scene_channels)
        self.roi_weight = rng.normal(0.0, 1.0, (config.teacher_roi_channels, ROI_DESCRIPTOR))
        self.roi_bias = rng.normal(0.0, 0.5, config.teacher_roi_channels)
        for array in (self.scene_weight, self.scene_bias, self.roi_weight, self.roi_bias):
            array.flags.writeable = False

    def checksum(self) -> str:
        return array_checksum([self.scene_weight, self.scene_bias, self.roi_weight, self.roi_bias])

    def __call__(self, scene: SyntheticScene) -> TeacherOutput:
        return teacher_forward(self, scene)

    def scene_features(self, scene: SyntheticScene) -> PointFeatureSet:
        depth = scene.camera.world_to_camera(scene.points)[:, 2] / DEPTH_SCALE
        descriptor = np.column_stack([scene.point_channels, depth])
        return PointFeatureSet(_sigmoid(descriptor @ self.scene_weight.T + self.scene_bias), scene.points)

    def roi_features(self, scene: SyntheticScene, index: int) -> PointFeatureSet:
        box = scene.labels.boxes[index]
        selection = scene.points_of_box(index)
        local = scene.points[selection] - np.array(box.center)
        c, s = np.cos(box.yaw), np.sin(box.yaw)
        h, w, l = box.dimensions
        relative = np.stack([(c * local[:, 0] - s * local[:, 2]) / l,
                             -local[:, 1] / h,
                             (s * local[:, 0] + c * local[:, 2]) / w], axis=1)
        one_hot = np.zeros((len(selection), len(ObjectClass)))
        one_hot[:, box.object_class.index] = 1.0
        descriptor = np.column_stack([relative, one_hot])
        return PointFeatureSet(_sigmoid(descriptor @ self.roi_weight.T + self.roi_bias), scene.points[selection])


def box_visibility(scene: SyntheticScene) -> np.ndarray:
    """
    Per box: the fraction of its points that land inside the image and are not hidden
    behind a point of another box.
    """
    height, width = scene.image_height, scene.image_width
    cloud = PointFeatureSet(np.zeros((scene.point_count, 1)), scene.points)
    idx, rows, cols, depth = project_to_pixels(cloud, scene.camera, height, width)
    owner = scene.box_index[idx]
    visibility = np.zeros(len(scene.labels))
    for i in range(len(scene.labels)):
        total = len(scene.points_of_box(i))
        if total == 0:
            continue
        others = (owner >= 0) & (owner != i)
        nearest = np.full(height * width, np.inf)
        np.minimum.at(nearest, rows[others] * width + cols[others], depth[others])
        mine = owner == i
        hidden = nearest[rows[mine] * width + cols[mine]] < depth[mine] - OCCLUSION_TOLERANCE
        visibility[i] = np.count_nonzero(~hidden) / total
    return visibility


def teacher_predictions(teacher: AnalyticTeacher, scene: SyntheticScene, visibility: np.ndarray) -> SoftLabelSet:
    """
    Ground-truth boxes with seeded noise on center, dimensions and yaw, confidence
    clamp(visibility + noise, 0, 1). Scenes with boxes also get a few low-confidence spurious boxes.
    """
    config = teacher.config
    rng = seeded_rng(derive_seed(scene.seed, PREDICTION_SALT))
    sigma = config.teacher_box_noise
    spread = config.teacher_confidence_noise
    boxes: List[DetectionBox] = []
    for box, visible in zip(scene.labels.boxes, visibility):
        center = np.array(box.center) + rng.normal(0.0, sigma, 3)
        dims = np.maximum(np.array(box.dimensions) + rng.normal(0.0, sigma, 3), sigma)
        yaw = box.yaw + rng.normal(0.0, sigma)
        confidence = float(np.clip(visible + rng.uniform(-spread, spread), 0.0, 1.0))
        boxes.append(_predicted_box(scene, box.object_class, center, dims, yaw, confidence))
    if len(scene.labels):
        for _ in range(int(rng.integers(0, config.teacher_max_false_positives + 1))):
            cls = draw_class(rng, config)
            center = np.array([rng.uniform(config.area_x_min, config.area_x_max), scene.ground_y,
                               rng.uniform(config.area_z_min, config.area_z_max)])
            confidence = float(rng.uniform(*FALSE_POSITIVE_CONFIDENCE))
            boxes.append(_predicted_box(scene, cls, center, np.array(cls.mean_dimensions), 0.0, confidence))
    return SoftLabelSet(scene.frame_id, boxes)


def _predicted_box(scene: SyntheticScene, cls: ObjectClass, center: np.ndarray, dims: np.ndarray,
                   yaw: float, confidence: float) -> DetectionBox:
    box = DetectionBox(cls, tuple(float(v) for v in center), tuple(float(v) for v in dims), float(yaw),
                       confidence, alpha=float(yaw - np.arctan2(center[0], center[2])))
    bbox = project_box_2d(box, scene.camera, scene.image_width, scene.image_height)
    return DetectionBox(box.object_class, box.center, box.dimensions, box.yaw, confidence, bbox, alpha=box.alpha)


def teacher_forward(teacher: AnalyticTeacher, scene: SyntheticScene) -> TeacherOutput:
    """Deterministic for a given scene. Never changes the teacher."""
    visibility = box_visibility(scene)
    for i, v in enumerate(visibility):
        if v == 0:
            warnings.warn(f"Scene {scene.frame_id}: box {i} has no visible points.")
    predictions = teacher_predictions(teacher, scene, visibility)
    logger.debug(f"Teacher: scene {scene.frame_id}, {len(predictions)} predictions.")
    return TeacherOutput(
        scene_points=teacher.scene_features(scene),
        roi_points=[teacher.roi_features(scene, i) for i in range(len(scene.labels))],
        predictions=predictions,
        visibility=visibility,
    )
