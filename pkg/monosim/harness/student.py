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
The toy monocular student: a 1x1 convolutional trunk over the scene image, a scene head,
a RoI head lifted into a bird's-eye-view grid with the image depth, and an anchor-based
prediction head on the pooled BEV map. Alignment heads only exist for training.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from monosim.common.util import derive_seed, seeded_rng
from monosim.data.checkpoint.model import StudentCheckpoint
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import SoftLabelSet
from monosim.data.scene.model import SyntheticScene
from monosim.evaluation.iou import nms_bev
from monosim.harness.scene_generator import DEPTH_SCALE
from monosim.numerics import functional as F
from monosim.numerics.parameters import ParameterSet
from monosim.numerics.tensor import Tensor
from monosim.simulation.composition import FusionWeights
from monosim.simulation.response import ANCHOR_OUTPUTS, BOX_PARAMS, AnchorSet, decode_predictions
from monosim.simulation.scene import AlignmentHead

logger = logging.getLogger(__name__)

STUDENT_SALT = 3
# Initial objectness bias, a low prior probability for every anchor
OBJECTNESS_PRIOR = -2.0
IMAGE_CHANNELS = 3
SCENE_ALIGN = 'scene_align'
ROI_ALIGN = 'roi_align'


@dataclass
class StudentOutput:
    scene_features: Dict[str, Tensor]  # per branch, C_ms x H_ms x W_ms
    roi_features: Dict[str, Tensor]  # per branch, C_mr x H_mr x W_mr (BEV)
    roi_pixel_features: Dict[str, Tensor]  # per branch, C_mr x H x W (image space)
    box_params: Tensor  # A x 7
    objectness: Tensor  # A, probabilities


class StudentModel:
    def __init__(self, config: HarnessConfig, seed=0):
        self.config = config
        self.params = ParameterSet()
        rng = seeded_rng(derive_seed(seed, STUDENT_SALT))
        c = config
        self.branches: List[str] = ['glo', 'loc'] if c.branch_pair else ['']
        self.params.add_uniform('trunk.weight', (c.trunk_channels, IMAGE_CHANNELS), IMAGE_CHANNELS, rng)
        self.params.add_constant('trunk.bias', (c.trunk_channels,))
        for b in self.branches:
            self.params.add_uniform(self._name('scene', b, 'weight'), (c.student_scene_channels, c.trunk_channels),
                                    c.trunk_channels, rng)
            self.params.add_constant(self._name('scene', b, 'bias'), (c.student_scene_channels,))
            self.params.add_uniform(self._name('roi', b, 'weight'), (c.student_roi_channels, c.trunk_channels),
                                    c.trunk_channels, rng)
            self.params.add_constant(self._name('roi', b, 'bias'), (c.student_roi_channels,))
        self.anchors = AnchorSet(c.roi_map_height, c.roi_map_width, (c.bev_x_min, c.bev_x_max),
                                 (c.bev_z_min, c.bev_z_max), c.camera_height)
        classes = len(self.anchors.classes)
        self.params.add_uniform('head.weight', (classes * ANCHOR_OUTPUTS, c.student_roi_channels),
                                c.student_roi_channels, rng)
        bias = np.zeros((classes, ANCHOR_OUTPUTS))
        bias[:, BOX_PARAMS] = OBJECTNESS_PRIOR
        self.params.add('head.bias', bias.ravel())

        self.scene_align: Dict[str, AlignmentHead] = {}
        self.roi_align: Dict[str, AlignmentHead] = {}
        for b in self.branches:
            self.scene_align[b] = AlignmentHead(self.params, self._name(SCENE_ALIGN, b), c.student_scene_channels,
                                                c.teacher_scene_channels, rng, c.bn_momentum)
            self.roi_align[b] = AlignmentHead(self.params, self._name(ROI_ALIGN, b), c.student_roi_channels,
                                              c.teacher_roi_channels, rng, c.bn_momentum)
        self.fusion: Optional[FusionWeights] = FusionWeights(self.params) if c.branch_pair else None

    @staticmethod
    def _name(part: str, branch: str, leaf: Optional[str] = None) -> str:
        name = f'{part}_{branch}' if branch else part
        return f'{name}.{leaf}' if leaf else name

    @property
    def has_alignment_heads(self) -> bool:
        return bool(self.scene_align or self.roi_align)

    def alignment_heads(self) -> List[AlignmentHead]:
        return list(self.scene_align.values()) + list(self.roi_align.values())

    def train(self):
        for head in self.alignment_heads():
            head.train()

    def eval(self):
        for head in self.alignment_heads():
            head.eval()

    def remove_alignment_heads(self):
        """Drops the alignment heads and their parameters. The inference path does not use them."""
        self.scene_align = {}
        self.roi_align = {}
        self.params.remove_prefix(SCENE_ALIGN)
        self.params.remove_prefix(ROI_ALIGN)

    def bev_index(self, scene: SyntheticScene) -> np.ndarray:
        """
        BEV cell (x-major) of every image pixel, back-projected with the depth channel of the
        image. Pixels without depth or outside the BEV bounds get -1.
        """
        c = self.config
        height, width = scene.image_height, scene.image_width
        depth = scene.image[0].ravel() * DEPTH_SCALE
        cols = np.tile(np.arange(width), height)
        x = (cols - scene.camera.cx) * depth / scene.camera.fx
        i = np.floor((x - c.bev_x_min) / (c.bev_x_max - c.bev_x_min) * c.voxel_x).astype(np.int64)
        j = np.floor((depth - c.bev_z_min) / (c.bev_z_max - c.bev_z_min) * c.voxel_y).astype(np.int64)
        valid = (depth > 0) & (i >= 0) & (i < c.voxel_x) & (j >= 0) & (j < c.voxel_y)
        return np.where(valid, i * c.voxel_y + j, -1)

    def forward(self, scene: SyntheticScene) -> StudentOutput:
        c = self.config
        p = self.params
        image = Tensor(scene.image)
        height, width = scene.image_height, scene.image_width
        trunk = F.relu(F.conv1x1(p['trunk.weight'], image, p['trunk.bias']))
        pooled_trunk = F.adaptive_avg_pool2d(trunk, c.scene_feature_height, c.scene_feature_width)
        index = self.bev_index(scene)

        scene_features, roi_features, roi_pixels = {}, {}, {}
        for b in self.branches:
            scene_features[b] = F.conv1x1(p[self._name('scene', b, 'weight')], pooled_trunk,
                                          p[self._name('scene', b, 'bias')])
            pixels = F.relu(F.conv1x1(p[self._name('roi', b, 'weight')], trunk, p[self._name('roi', b, 'bias')]))
            roi_pixels[b] = pixels
            flat = F.reshape(pixels, (c.student_roi_channels, height * width))
            bev = F.reshape(F.scatter_mean(flat, index, c.voxel_x * c.voxel_y),
                            (c.student_roi_channels, c.voxel_x, c.voxel_y))
            roi_features[b] = F.adaptive_avg_pool2d(bev, c.roi_map_height, c.roi_map_width)

        head_input = roi_features[self.branches[0]]
        if len(self.branches) > 1:
            head_input = F.scale(F.add(roi_features['glo'], roi_features['loc']), 0.5)
        raw = F.conv1x1(p['head.weight'], head_input, p['head.bias'])
        classes = len(self.anchors.classes)
        per_anchor = F.reshape(
            F.transpose(F.reshape(raw, (classes, ANCHOR_OUTPUTS, c.roi_map_height, c.roi_map_width)), (0, 2, 3, 1)),
            (len(self.anchors), ANCHOR_OUTPUTS)
        )
        box_params = F.index(per_anchor, (slice(None), slice(0, BOX_PARAMS)))
        objectness = F.sigmoid(F.index(per_anchor, (slice(None), BOX_PARAMS)))
        return StudentOutput(scene_features, roi_features, roi_pixels, box_params, objectness)

    def predict(self, scene: SyntheticScene) -> SoftLabelSet:
        """Inference path only: decoded anchors above the score threshold, after BEV NMS."""
        out = self.forward(scene)
        decoded = decode_predictions(out.box_params.data, out.objectness.data, self.anchors, scene.frame_id,
                                     self.config.score_threshold)
        return nms_bev(decoded, self.config.nms_iou)

    def to_checkpoint(self, step=0) -> StudentCheckpoint:
        statistics = {}
        for head in self.alignment_heads():
            statistics.update(head.state())
        return StudentCheckpoint(self.config, self.params.state(), statistics, step)

    @classmethod
    def from_checkpoint(cls, checkpoint: StudentCheckpoint) -> 'StudentModel':
        student = cls(checkpoint.config)
        if not any(name.startswith((SCENE_ALIGN, ROI_ALIGN)) for name in checkpoint.parameters):
            student.remove_alignment_heads()
        student.params.load_state(checkpoint.parameters)
        for head in student.alignment_heads():
            head.load_state(checkpoint.statistics)
        logger.debug(f"Restored student from step {checkpoint.step}.")
        return student
