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

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

# Typical object dimensions (h, w, l) in meters, used for anchors and scene generation
MEAN_DIMENSIONS = {
    'Car': (1.52, 1.63, 3.88),
    'Pedestrian': (1.73, 0.60, 0.80),
    'Cyclist': (1.73, 0.60, 1.76),
}


class ObjectClass(Enum):
    CAR = 'Car'
    PEDESTRIAN = 'Pedestrian'
    CYCLIST = 'Cyclist'

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name: str) -> 'ObjectClass':
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"Unknown object class: {name}")

    @property
    def index(self) -> int:
        return list(ObjectClass).index(self)

    @property
    def mean_dimensions(self) -> Tuple[float, float, float]:
        return MEAN_DIMENSIONS[self.value]


@dataclass(frozen=True)
class DetectionBox:
    """
    One 3D box in KITTI camera convention: center is the bottom-face center (x right,
    y down, z forward), dimensions are (h, w, l), yaw is rotation_y.
    """
    object_class: ObjectClass
    center: Tuple[float, float, float]
    dimensions: Tuple[float, float, float]
    yaw: float = 0.0
    confidence: float = 1.0
    bbox_2d: Optional[Tuple[float, float, float, float]] = None
    truncation: float = 0.0
    occlusion: int = 0
    alpha: float = 0.0

    def __post_init__(self):
        if len(self.center) != 3 or len(self.dimensions) != 3:
            raise ValueError("Box center and dimensions need three values each.")
        if not all(d > 0 for d in self.dimensions):
            raise ValueError(f"Box dimensions must be positive, got {self.dimensions}.")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"Box confidence must be in [0, 1], got {self.confidence}.")
        if not np.all(np.isfinite(list(self.center) + list(self.dimensions) + [self.yaw])):
            raise ValueError("Box parameters must be finite.")

    @property
    def height(self) -> float:
        return self.dimensions[0]

    @property
    def width(self) -> float:
        return self.dimensions[1]

    @property
    def length(self) -> float:
        return self.dimensions[2]

    def bev_rectangle(self) -> Tuple[float, float, float, float]:
        """
        Axis-aligned footprint (x_min, z_min, x_max, z_max) on the ground plane.
        Length extends along x and width along z; yaw is ignored.
        """
        x, _, z = self.center
        return x - self.length / 2, z - self.width / 2, x + self.length / 2, z + self.width / 2

    def corners(self) -> np.ndarray:
        """The 8 corners (8 x 3) in the camera frame, yaw applied."""
        h, w, l = self.dimensions
        xs = np.array([1, 1, -1, -1, 1, 1, -1, -1]) * l / 2
        zs = np.array([1, -1, -1, 1, 1, -1, -1, 1]) * w / 2
        ys = np.array([0, 0, 0, 0, -h, -h, -h, -h], dtype=np.float64)
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        rx = c * xs + s * zs
        rz = -s * xs + c * zs
        return np.stack([rx, ys, rz], axis=1) + np.array(self.center)

    def contains(self, points: np.ndarray, margin=1e-9) -> np.ndarray:
        """Membership flags for an N x 3 matrix of camera-frame points."""
        local = np.asarray(points, dtype=np.float64) - np.array(self.center)
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        lx = c * local[:, 0] - s * local[:, 2]
        lz = s * local[:, 0] + c * local[:, 2]
        h, w, l = self.dimensions
        return (np.abs(lx) <= l / 2 + margin) & (np.abs(lz) <= w / 2 + margin) \
            & (local[:, 1] <= margin) & (local[:, 1] >= -h - margin)

    def with_confidence(self, confidence: float) -> 'DetectionBox':
        return replace(self, confidence=confidence)


@dataclass
class SoftLabelSet:
    """All boxes of one frame, sharing the frame's coordinate frame."""
    frame_id: int
    boxes: List[DetectionBox] = field(default_factory=list)

    def __len__(self):
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def of_class(self, object_class: ObjectClass) -> List[DetectionBox]:
        return [b for b in self.boxes if b.object_class == object_class]

    def file_name(self) -> str:
        return f"{self.frame_id:06d}.txt"
