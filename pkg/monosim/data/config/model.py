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

from dataclasses import dataclass, fields, replace
from typing import Dict

from monosim.data.kitti_label.model import ObjectClass

ROI_ALIGNMENTS = ('bev', 'image')


@dataclass
class HarnessConfig:
    """Every tunable of the synthetic harness. Serialised as flat key=value text."""
    seed: int = 0

    # Camera and student input image
    image_height: int = 32
    image_width: int = 64
    focal_length: float = 32.0
    camera_height: float = 1.65

    # Scene-level branch: student C_ms -> teacher C_ps at the scene feature resolution
    scene_feature_height: int = 16
    scene_feature_width: int = 32
    trunk_channels: int = 16
    student_scene_channels: int = 8
    teacher_scene_channels: int = 16

    # RoI-level branch: student C_mr -> teacher C_pr on the pooled BEV map
    student_roi_channels: int = 8
    teacher_roi_channels: int = 16
    voxel_x: int = 16
    voxel_y: int = 16
    voxel_z: int = 8
    roi_map_height: int = 12
    roi_map_width: int = 12
    roi_alignment: str = 'bev'
    bev_x_min: float = -12.0
    bev_x_max: float = 12.0
    bev_z_min: float = 4.0
    bev_z_max: float = 28.0
    bev_up_min: float = -0.5
    bev_up_max: float = 3.0

    # Scene generation
    min_boxes: int = 2
    max_boxes: int = 5
    area_x_min: float = -10.0
    area_x_max: float = 10.0
    area_z_min: float = 6.0
    area_z_max: float = 26.0
    ground_points: int = 2500
    points_per_box: int = 80
    car_probability: float = 0.7
    pedestrian_probability: float = 0.2
    placement_retries: int = 200

    # Analytic teacher
    teacher_box_noise: float = 0.05
    teacher_confidence_noise: float = 0.05
    teacher_max_false_positives: int = 2

    # Objective and optimisation
    lambda_scene: float = 1.0
    lambda_roi: float = 1.0
    learning_rate: float = 0.01
    bn_momentum: float = 0.1
    use_soft_labels: bool = True
    scene_simulation: bool = True
    roi_simulation: bool = True
    branch_pair: bool = False
    train_scenes: int = 8

    # Soft-label thresholds
    car_threshold: float = 0.7
    pedestrian_threshold: float = 0.0
    cyclist_threshold: float = 0.0

    # Anchor matching and decoding
    positive_iou: float = 0.5
    negative_iou: float = 0.3
    score_threshold: float = 0.0
    nms_iou: float = 0.1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.roi_alignment not in ROI_ALIGNMENTS:
            raise ValueError(f"roi_alignment must be one of {ROI_ALIGNMENTS}, got {self.roi_alignment}.")
        for name in ('image_height', 'image_width', 'scene_feature_height', 'scene_feature_width',
                     'trunk_channels', 'student_scene_channels', 'teacher_scene_channels',
                     'student_roi_channels', 'teacher_roi_channels', 'voxel_x', 'voxel_y', 'voxel_z',
                     'roi_map_height', 'roi_map_width', 'train_scenes'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}.")
        if not 0 <= self.min_boxes <= self.max_boxes:
            raise ValueError(f"Box count range [{self.min_boxes}, {self.max_boxes}] is invalid.")
        if self.points_per_box < 20:
            raise ValueError(f"points_per_box must be at least 20, got {self.points_per_box}.")
        if self.lambda_scene < 0 or self.lambda_roi < 0:
            raise ValueError("Loss weights must be non-negative.")
        for name in ('car_threshold', 'pedestrian_threshold', 'cyclist_threshold'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {getattr(self, name)}.")
        if not self.negative_iou <= self.positive_iou:
            raise ValueError("negative_iou must not exceed positive_iou.")
        for name in ('score_threshold', 'nms_iou'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {getattr(self, name)}.")
        for lo, hi in (('bev_x_min', 'bev_x_max'), ('bev_z_min', 'bev_z_max'), ('bev_up_min', 'bev_up_max'),
                       ('area_x_min', 'area_x_max'), ('area_z_min', 'area_z_max')):
            if not getattr(self, lo) < getattr(self, hi):
                raise ValueError(f"{lo} must be below {hi}.")

    @property
    def thresholds(self) -> Dict[ObjectClass, float]:
        return {
            ObjectClass.CAR: self.car_threshold,
            ObjectClass.PEDESTRIAN: self.pedestrian_threshold,
            ObjectClass.CYCLIST: self.cyclist_threshold,
        }

    @property
    def image_scale(self) -> float:
        """Scene feature resolution relative to the input image."""
        return self.scene_feature_width / self.image_width

    def updated(self, **changes) -> 'HarnessConfig':
        return replace(self, **changes)

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]
