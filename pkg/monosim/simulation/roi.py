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
RoI-level simulation: voxelization of RoI point features, bird's-eye-view collapse,
adaptive average pooling to the student's RoI map size, and the masked L1 RoI loss.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from monosim.numerics import functional as F
from monosim.numerics.tensor import Tensor
from monosim.simulation.render import PointFeatureSet, compute_validity_mask
from monosim.simulation.scene import masked_l1

# Expansion of the default bounds around the RoI points (meters)
BOUNDS_MARGIN = 1e-6

Bounds = Tuple[np.ndarray, np.ndarray]


@dataclass
class VoxelGrid:
    """X x Y x Z cells over axis-aligned bounds; cell features are the mean of their points."""
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    features: np.ndarray  # X x Y x Z x C
    counts: np.ndarray  # X x Y x Z

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.counts.shape


def default_bounds(points: PointFeatureSet) -> Bounds:
    """Axis-aligned bounding box of the points expanded by BOUNDS_MARGIN."""
    if points.count == 0:
        return np.zeros(3), np.ones(3)
    return points.coordinates.min(axis=0) - BOUNDS_MARGIN, points.coordinates.max(axis=0) + BOUNDS_MARGIN


def cell_indices(coordinates: np.ndarray, dims: Tuple[int, int, int], bounds: Bounds):
    """
    Returns (inside flags, N x 3 integer cell indices of the inside points).
    Points on the upper boundary are clamped into the last cell.
    """
    lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    dims_a = np.array(dims)
    inside = np.all((coordinates >= lo) & (coordinates <= hi), axis=1)
    size = (hi - lo) / dims_a
    idx = np.floor((coordinates[inside] - lo) / size).astype(np.int64)
    idx = np.minimum(np.maximum(idx, 0), dims_a - 1)
    return inside, idx


def voxelize(points: PointFeatureSet, dims: Tuple[int, int, int], bounds: Optional[Bounds] = None) -> VoxelGrid:
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"Voxel grid dims must be three positive integers, got {dims}.")
    if bounds is None:
        bounds = default_bounds(points)
    lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    if not np.all(lo < hi):
        raise ValueError(f"Degenerate voxel bounds: min {lo.tolist()}, max {hi.tolist()}.")
    x, y, z = dims
    features = np.zeros((x, y, z, points.channels), dtype=np.float64)
    counts = np.zeros((x, y, z), dtype=np.int64)
    inside, idx = cell_indices(points.coordinates, dims, (lo, hi))
    if len(idx):
        flat = np.ravel_multi_index(idx.T, dims)
        counts_flat = np.bincount(flat, minlength=x * y * z)
        sums = np.zeros((x * y * z, points.channels), dtype=np.float64)
        np.add.at(sums, flat, points.features[inside])
        occupied = counts_flat > 0
        sums[occupied] /= counts_flat[occupied, None]
        features = sums.reshape(x, y, z, points.channels)
        counts = counts_flat.reshape(x, y, z)
    return VoxelGrid(lo, hi, features, counts)


def bev_collapse(grid: VoxelGrid) -> np.ndarray:
    """
    C x X x Y map averaging the occupied cells of every (x, y) column.
    Columns without occupied cells hold 0.
    """
    occupied = grid.counts > 0
    per_column = occupied.sum(axis=2)
    sums = (grid.features * occupied[..., None]).sum(axis=2)
    bev = np.zeros_like(sums)
    has = per_column > 0
    bev[has] = sums[has] / per_column[has, None]
    return np.transpose(bev, (2, 0, 1))


def adaptive_avg_pool(x: Union[np.ndarray, Tensor], out_height: int, out_width: int):
    """
    Adaptive average pooling of a C x A x B map to C x H x W. Accepts a Tensor (differentiable)
    or a plain array (returns an array).
    """
    if isinstance(x, Tensor):
        return F.adaptive_avg_pool2d(x, out_height, out_width)
    return F.adaptive_avg_pool2d(Tensor(np.asarray(x, dtype=np.float64)), out_height, out_width).data


def roi_teacher_map(points: PointFeatureSet, dims: Tuple[int, int, int], bounds: Optional[Bounds],
                    out_height: int, out_width: int) -> Tuple[np.ndarray, np.ndarray]:
    """voxelize -> bev_collapse -> adaptive_avg_pool, plus the validity mask of the pooled map."""
    bev = bev_collapse(voxelize(points, dims, bounds))
    pooled = adaptive_avg_pool(bev, out_height, out_width)
    return pooled, compute_validity_mask(pooled)


def roi_loss(student: Tensor, teacher: np.ndarray, mask: np.ndarray) -> Tensor:
    """Masked L1 between aligned student RoI features and the teacher RoI map."""
    return masked_l1(student, teacher, mask)


def to_bev_frame(coordinates: np.ndarray, ground_y: float) -> np.ndarray:
    """
    Camera-frame points (x right, y down, z forward) to the BEV frame
    (lateral, forward, height above ground) used for voxelization.
    """
    coordinates = np.asarray(coordinates, dtype=np.float64)
    return np.stack([coordinates[:, 0], coordinates[:, 2], ground_y - coordinates[:, 1]], axis=1)
