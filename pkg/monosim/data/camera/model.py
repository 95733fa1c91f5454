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

from typing import Tuple

import numpy as np

from monosim.common.util import check_finite, check_shape

# Tolerance for the orthonormality check of the rotation block
ROTATION_TOLERANCE = 1e-9
# Points at or below this camera depth (meters) are behind the camera
MIN_DEPTH = 1e-6


class CameraModel:
    """
    Pinhole camera: intrinsic matrix K (zero skew) and extrinsic RT mapping world
    coordinates to camera coordinates (x right, y down, z forward).
    """
    def __init__(self, k: np.ndarray, rt: np.ndarray):
        k = np.array(k, dtype=np.float64)
        rt = np.array(rt, dtype=np.float64)
        check_shape(k, (3, 3), 'K')
        check_shape(rt, (3, 4), 'RT')
        check_finite(k, 'K')
        check_finite(rt, 'RT')
        if not (k[0, 0] > 0 and k[1, 1] > 0):
            raise ValueError(f"Focal lengths must be positive, got fx={k[0, 0]}, fy={k[1, 1]}.")
        if k[0, 1] != 0 or k[1, 0] != 0 or k[2, 0] != 0 or k[2, 1] != 0 or k[2, 2] != 1:
            raise ValueError(f"K must be a zero-skew intrinsic matrix, got {k.tolist()}.")
        rotation = rt[:, :3]
        if np.max(np.abs(rotation @ rotation.T - np.eye(3))) > ROTATION_TOLERANCE:
            raise ValueError("The rotation block of RT is not orthonormal.")
        self.k = k
        self.rt = rt

    def __eq__(self, other):
        if isinstance(other, CameraModel):
            return np.array_equal(self.k, other.k) and np.array_equal(self.rt, other.rt)
        return False

    def __repr__(self):
        return f"<CameraModel fx={self.fx} fy={self.fy} cx={self.cx} cy={self.cy}>"

    @property
    def fx(self) -> float:
        return float(self.k[0, 0])

    @property
    def fy(self) -> float:
        return float(self.k[1, 1])

    @property
    def cx(self) -> float:
        return float(self.k[0, 2])

    @property
    def cy(self) -> float:
        return float(self.k[1, 2])

    @classmethod
    def from_intrinsics(cls, fx: float, fy: float, cx: float, cy: float, rt: np.ndarray = None) -> 'CameraModel':
        k = np.array([[fx, 0, cx], [0, fy, cy], [0, 0, 1]], dtype=np.float64)
        if rt is None:
            rt = np.hstack([np.eye(3), np.zeros((3, 1))])
        return cls(k, rt)

    def world_to_camera(self, coordinates: np.ndarray) -> np.ndarray:
        """p_c = RT [q; 1] for every row of an N x 3 matrix."""
        coordinates = np.asarray(coordinates, dtype=np.float64).reshape(-1, 3)
        return coordinates @ self.rt[:, :3].T + self.rt[:, 3]

    def camera_to_world(self, coordinates: np.ndarray) -> np.ndarray:
        coordinates = np.asarray(coordinates, dtype=np.float64).reshape(-1, 3)
        return (coordinates - self.rt[:, 3]) @ self.rt[:, :3]

    def project(self, camera_coordinates: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns (column, row, in_front) for camera-frame points. Pixel coordinates are
        rounded half away from zero; in_front flags depth > MIN_DEPTH.
        """
        x, y, z = camera_coordinates[:, 0], camera_coordinates[:, 1], camera_coordinates[:, 2]
        in_front = z > MIN_DEPTH
        safe_z = np.where(in_front, z, 1.0)
        u = round_half_away(self.fx * x / safe_z + self.cx)
        v = round_half_away(self.fy * y / safe_z + self.cy)
        return u, v, in_front

    def scaled(self, factor: float) -> 'CameraModel':
        """The same camera for an image resized by factor (focal lengths and principal point scale)."""
        k = self.k.copy()
        k[0, :] *= factor
        k[1, :] *= factor
        return CameraModel(k, self.rt)

    def with_extrinsics(self, rt: np.ndarray) -> 'CameraModel':
        return CameraModel(self.k, rt)


def round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)
