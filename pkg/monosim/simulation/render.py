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
Rendering of point features into image space and the validity mask of rendered features.

Feature maps are C x H x W float64 arrays; validity masks are H x W float64 arrays of 0/1.
"""

from dataclasses import dataclass

import numpy as np

from monosim.common.util import check_finite
from monosim.data.camera.model import CameraModel


@dataclass
class PointFeatureSet:
    """N feature vectors (N x C) with their N world coordinates (N x 3, meters)."""
    features: np.ndarray
    coordinates: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.coordinates = np.asarray(self.coordinates, dtype=np.float64)
        if self.features.ndim != 2 or self.coordinates.ndim != 2 or self.coordinates.shape[1] != 3:
            raise ValueError(f"Point features must be N x C and coordinates N x 3, got "
                             f"{self.features.shape} and {self.coordinates.shape}.")
        if self.features.shape[0] != self.coordinates.shape[0]:
            raise ValueError(f"Point count mismatch: {self.features.shape[0]} features, "
                             f"{self.coordinates.shape[0]} coordinates.")
        check_finite(self.features, 'Point features')
        check_finite(self.coordinates, 'Point coordinates')

    @property
    def count(self) -> int:
        return self.features.shape[0]

    @property
    def channels(self) -> int:
        return self.features.shape[1]

    @classmethod
    def empty(cls, channels: int) -> 'PointFeatureSet':
        return cls(np.zeros((0, channels)), np.zeros((0, 3)))

    @classmethod
    def concatenate(cls, sets, channels: int) -> 'PointFeatureSet':
        sets = list(sets)
        if not sets:
            return cls.empty(channels)
        return cls(np.concatenate([s.features for s in sets]), np.concatenate([s.coordinates for s in sets]))


def project_to_pixels(points: PointFeatureSet, camera: CameraModel, out_height: int, out_width: int):
    """
    Returns (point_index, row, column, depth) of the points that land inside the image,
    in input order.
    """
    cam = camera.world_to_camera(points.coordinates)
    u, v, in_front = camera.project(cam)
    inside = in_front & (u >= 0) & (u < out_width) & (v >= 0) & (v < out_height)
    idx = np.nonzero(inside)[0]
    return idx, v[idx].astype(np.int64), u[idx].astype(np.int64), cam[idx, 2]


def zbuffer_winners(points: PointFeatureSet, camera: CameraModel, out_height: int, out_width: int):
    """
    Per-pixel nearest point: returns (point_index, row, column) of the winning point of every
    covered pixel. Ties on depth go to the lowest input index.
    """
    idx, rows, cols, depth = project_to_pixels(points, camera, out_height, out_width)
    pixel = rows * out_width + cols
    # Sort by pixel, then depth, then input index; the first of each pixel wins
    order = np.lexsort((idx, depth, pixel))
    _, first = np.unique(pixel[order], return_index=True)
    win = order[first]
    return idx[win], rows[win], cols[win]


def render_points(points: PointFeatureSet, camera: CameraModel, out_height: int, out_width: int) -> np.ndarray:
    """
    Renders point features into a C x H x W map with a z-buffer.
    Pixels that receive no point hold exactly 0 in every channel.
    """
    if out_height < 1 or out_width < 1:
        raise ValueError(f"Render size must be at least 1x1, got {out_height}x{out_width}.")
    out = np.zeros((points.channels, out_height, out_width), dtype=np.float64)
    if points.count == 0:
        return out
    winners, rows, cols = zbuffer_winners(points, camera, out_height, out_width)
    out[:, rows, cols] = points.features[winners].T
    return out


def compute_validity_mask(rendered: np.ndarray) -> np.ndarray:
    """mask(u, v) = 0 iff the channel sum of the rendered features is exactly 0."""
    if rendered.ndim != 3 or rendered.shape[0] < 1:
        raise ValueError(f"Expected a C x H x W map with C >= 1, got shape {rendered.shape}.")
    return (rendered.sum(axis=0) != 0).astype(np.float64)


def count_valid(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask == 1))
