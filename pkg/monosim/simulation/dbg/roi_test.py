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

import numpy as np
import pytest

from monosim.numerics.tensor import Tensor
from monosim.simulation.render import PointFeatureSet
from monosim.simulation.roi import (VoxelGrid, adaptive_avg_pool, bev_collapse, roi_loss, roi_teacher_map,
                                    to_bev_frame, voxelize)

BOUNDS = (np.zeros(3), np.array([4.0, 4.0, 2.0]))


def _voxel_oracle(points: PointFeatureSet, dims, bounds) -> np.ndarray:
    lo, hi = bounds
    size = (hi - lo) / np.array(dims)
    sums = np.zeros(dims + (points.channels,))
    counts = np.zeros(dims)
    for feature, p in zip(points.features, points.coordinates):
        if np.all(p >= lo) and np.all(p <= hi):
            cell = tuple(min(int(np.floor((p[a] - lo[a]) / size[a])), dims[a] - 1) for a in range(3))
            sums[cell] += feature
            counts[cell] += 1
    out = np.zeros_like(sums)
    for cell in zip(*np.nonzero(counts)):
        out[cell] = sums[cell] / counts[cell]
    return out


def _bev_oracle(features: np.ndarray) -> np.ndarray:
    x, y, z, c = features.shape
    out = np.zeros((c, x, y))
    for i in range(x):
        for j in range(y):
            cells = [features[i, j, k] for k in range(z) if features[i, j, k].any()]
            if cells:
                out[:, i, j] = np.mean(cells, axis=0)
    return out


def test_single_point():
    grid = voxelize(PointFeatureSet([[4.0]], [[1.5, 2.5, 0.5]]), (4, 4, 2), BOUNDS)
    assert grid.counts[1, 2, 0] == 1
    assert grid.counts.sum() == 1
    assert grid.features[1, 2, 0, 0] == 4.0
    assert np.count_nonzero(grid.features) == 1


def test_cell_mean():
    grid = voxelize(PointFeatureSet([[2.0], [4.0]], [[0.1, 0.1, 0.1], [0.2, 0.3, 0.4]]), (4, 4, 2), BOUNDS)
    assert grid.counts[0, 0, 0] == 2
    assert grid.features[0, 0, 0, 0] == 3.0


def test_out_of_bounds_points_are_ignored():
    grid = voxelize(PointFeatureSet([[1.0], [2.0]], [[5.0, 1.0, 1.0], [4.0, 4.0, 2.0]]), (4, 4, 2), BOUNDS)
    # The upper boundary belongs to the last cell
    assert grid.counts.sum() == 1
    assert grid.counts[3, 3, 1] == 1


def test_default_bounds_cover_every_point():
    rng = np.random.default_rng(0)
    points = PointFeatureSet(rng.uniform(size=(30, 2)), rng.normal(size=(30, 3)))
    assert voxelize(points, (3, 3, 3)).counts.sum() == 30


def test_invalid_grids():
    points = PointFeatureSet([[1.0]], [[0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        voxelize(points, (0, 2, 2), BOUNDS)
    with pytest.raises(ValueError):
        voxelize(points, (2, 2, 2), (np.zeros(3), np.array([1.0, 0.0, 1.0])))


def test_voxelize_matches_oracle():
    rng = np.random.default_rng(1)
    coordinates = rng.uniform(-0.5, 4.5, (200, 3)) * np.array([1.0, 1.0, 0.5])
    points = PointFeatureSet(rng.uniform(0.1, 1.0, (200, 3)), coordinates)
    grid = voxelize(points, (4, 4, 2), BOUNDS)
    np.testing.assert_allclose(grid.features, _voxel_oracle(points, (4, 4, 2), BOUNDS), rtol=1e-12, atol=0)


def _grid(features: np.ndarray) -> VoxelGrid:
    counts = (np.abs(features).sum(axis=3) > 0).astype(np.int64)
    return VoxelGrid(np.zeros(3), np.ones(3), features, counts)


def test_column_mean():
    features = np.zeros((1, 1, 3, 1))
    features[0, 0, 0, 0] = 1.0
    features[0, 0, 2, 0] = 3.0
    assert bev_collapse(_grid(features))[0, 0, 0] == 2.0


def test_empty_grid():
    assert not bev_collapse(_grid(np.zeros((2, 3, 4, 2)))).any()


def test_single_cell_columns():
    rng = np.random.default_rng(2)
    features = np.zeros((3, 2, 4, 2))
    levels = rng.integers(0, 4, (3, 2))
    values = rng.uniform(0.1, 1.0, (3, 2, 2))
    for i in range(3):
        for j in range(2):
            features[i, j, levels[i, j]] = values[i, j]
    assert np.array_equal(bev_collapse(_grid(features)), np.transpose(values, (2, 0, 1)))


def test_pool_arrays():
    x = np.array([[1, 1, 1, 1], [3, 3, 3, 3], [5, 5, 5, 5], [7, 7, 7, 7]], dtype=float)[None]
    assert np.array_equal(adaptive_avg_pool(x, 2, 2)[0], [[2, 2], [6, 6]])
    assert isinstance(adaptive_avg_pool(Tensor(x), 2, 2), Tensor)


def test_teacher_map_of_no_points():
    pooled, mask = roi_teacher_map(PointFeatureSet.empty(3), (4, 4, 2), BOUNDS, 2, 2)
    assert not pooled.any() and not mask.any()


def test_teacher_map_of_one_point():
    pooled, mask = roi_teacher_map(PointFeatureSet([[4.0]], [[1.5, 2.5, 0.5]]), (4, 4, 2), BOUNDS, 2, 2)
    assert np.array_equal(mask, [[0.0, 1.0], [0.0, 0.0]])
    assert pooled[0, 0, 1] == 1.0


def test_teacher_map_matches_composed_oracles():
    rng = np.random.default_rng(3)
    points = PointFeatureSet(rng.uniform(0.1, 1.0, (100, 2)), rng.uniform(0.0, 4.0, (100, 3)) * [1.0, 1.0, 0.5])
    bev = _bev_oracle(_voxel_oracle(points, (4, 4, 2), BOUNDS))
    pooled_oracle = np.zeros((2, 3, 3))
    for i in range(3):
        for j in range(3):
            rows = slice(int(np.floor(i * 4 / 3)), int(np.ceil((i + 1) * 4 / 3)))
            cols = slice(int(np.floor(j * 4 / 3)), int(np.ceil((j + 1) * 4 / 3)))
            pooled_oracle[:, i, j] = bev[:, rows, cols].mean(axis=(1, 2))
    pooled, mask = roi_teacher_map(points, (4, 4, 2), BOUNDS, 3, 3)
    np.testing.assert_allclose(pooled, pooled_oracle, rtol=1e-12, atol=1e-15)
    assert np.array_equal(mask, (pooled_oracle.sum(axis=0) != 0).astype(float))


def test_loss_cases():
    student = np.array([[[1.0, 5.0], [2.0, 0.5]]])
    mask = np.array([[1.0, 0.0], [1.0, 1.0]])
    assert roi_loss(Tensor(student), np.zeros((1, 2, 2)), mask).item() == pytest.approx(3.5 / 3, rel=1e-12)
    assert roi_loss(Tensor(student), student, mask).item() == 0.0
    assert roi_loss(Tensor(student), np.zeros((1, 2, 2)), np.zeros((2, 2))).item() == 0.0


def test_bev_frame():
    out = to_bev_frame(np.array([[1.0, 1.0, 10.0]]), 1.65)
    np.testing.assert_allclose(out, [[1.0, 10.0, 0.65]])


def test_voxelize_ignores_point_order():
    rng = np.random.default_rng(9)
    points = PointFeatureSet(rng.normal(size=(300, 3)), rng.uniform(0, 4, (300, 3)) * [1, 1, 0.5])
    order = rng.permutation(points.count)
    shuffled = PointFeatureSet(points.features[order], points.coordinates[order])
    a, b = voxelize(points, (4, 4, 2), BOUNDS), voxelize(shuffled, (4, 4, 2), BOUNDS)
    assert np.array_equal(a.counts, b.counts)
    np.testing.assert_allclose(a.features, b.features, rtol=1e-12, atol=1e-15)


def test_bev_keeps_the_mean_of_a_full_grid():
    rng = np.random.default_rng(10)
    dims = (4, 4, 2)
    cells = np.stack(np.meshgrid(*(np.arange(d) for d in dims), indexing='ij'), axis=-1).reshape(-1, 3)
    size = (BOUNDS[1] - BOUNDS[0]) / np.array(dims)
    points = PointFeatureSet(rng.uniform(0.1, 3.0, (len(cells), 2)), (cells + 0.5) * size)
    grid = voxelize(points, dims, BOUNDS)
    assert np.all(grid.counts == 1)
    bev = bev_collapse(grid)
    np.testing.assert_allclose(bev.mean(axis=(1, 2)), grid.features.mean(axis=(0, 1, 2)), rtol=1e-12)


def test_loss_scales_with_its_inputs():
    rng = np.random.default_rng(11)
    student, teacher = rng.normal(size=(2, 6, 6)), rng.normal(size=(2, 6, 6))
    mask = (rng.uniform(size=(6, 6)) < 0.5).astype(np.float64)
    base = roi_loss(Tensor(student), teacher, mask).item()
    for k in (0.25, 3.0):
        assert roi_loss(Tensor(k * student), k * teacher, mask).item() == pytest.approx(k * base, rel=1e-12)
