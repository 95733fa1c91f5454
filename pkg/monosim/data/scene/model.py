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

from dataclasses import dataclass

import numpy as np

from monosim.data.camera.model import CameraModel
from monosim.data.kitti_label.model import SoftLabelSet

# Per-point channels of the LiDAR-like cloud
POINT_CHANNELS = ('height', 'normal_up', 'membership')
# Channels of the rendered student input image
IMAGE_CHANNELS = ('depth', 'intensity', 'semantic')
# box_index of points sampled on the ground plane
GROUND = -1


@dataclass
class SyntheticScene:
    """
    One synthetic frame. Points are in the camera frame (x right, y down, z forward).
    point_channels holds height above ground, the upward component of the surface normal
    and a box-membership flag per point; box_index names the box a point was sampled on.
    """
    frame_id: int
    seed: int
    labels: SoftLabelSet
    points: np.ndarray  # N x 3
    point_channels: np.ndarray  # N x 3
    box_index: np.ndarray  # N
    camera: CameraModel
    image: np.ndarray  # 3 x H x W
    ground_y: float

    def __post_init__(self):
        n = self.points.shape[0]
        if self.points.shape != (n, 3) or self.point_channels.shape != (n, len(POINT_CHANNELS)) \
                or self.box_index.shape != (n,):
            raise ValueError(f"Inconsistent point arrays: {self.points.shape}, {self.point_channels.shape}, "
                             f"{self.box_index.shape}.")
        if self.image.ndim != 3 or self.image.shape[0] != len(IMAGE_CHANNELS):
            raise ValueError(f"Scene image must be {len(IMAGE_CHANNELS)} x H x W, got {self.image.shape}.")
        if np.any(self.box_index >= len(self.labels)):
            raise ValueError("A point refers to a box that does not exist.")

    @property
    def point_count(self) -> int:
        return self.points.shape[0]

    @property
    def image_height(self) -> int:
        return self.image.shape[1]

    @property
    def image_width(self) -> int:
        return self.image.shape[2]

    def points_of_box(self, index: int) -> np.ndarray:
        return np.nonzero(self.box_index == index)[0]

    def file_name(self) -> str:
        return f"{self.frame_id:06d}.npz"
