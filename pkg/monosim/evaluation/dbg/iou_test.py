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

from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.evaluation.iou import bev_iou, bev_iou_matrix, nms_bev


def _square(x, z, size=2.0, confidence=1.0, cls=ObjectClass.CAR):
    return DetectionBox(cls, (x, 1.65, z), (1.5, size, size), 0.0, confidence)


def test_identical_boxes():
    assert bev_iou(_square(0, 10), _square(0, 10)) == 1.0


def test_disjoint_boxes():
    assert bev_iou(_square(0, 10), _square(5, 10)) == 0.0


def test_offset_squares():
    assert bev_iou(_square(0, 10), _square(1, 10)) == pytest.approx(1 / 3, rel=1e-12)


def test_yaw_is_ignored():
    rotated = DetectionBox(ObjectClass.CAR, (0.0, 1.65, 10.0), (1.5, 2.0, 2.0), 1.0)
    assert bev_iou(_square(0, 10), rotated) == 1.0


def test_matrix_is_symmetric_and_bounded():
    rng = np.random.default_rng(0)
    lo = rng.uniform(-5, 5, (20, 2))
    rects = np.hstack([lo, lo + rng.uniform(0.5, 3, (20, 2))])
    iou = bev_iou_matrix(rects, rects)
    assert iou.shape == (20, 20)
    np.testing.assert_allclose(iou, iou.T)
    np.testing.assert_allclose(np.diag(iou), 1.0)
    assert np.all((iou >= 0) & (iou <= 1))


def test_degenerate_rectangles():
    assert bev_iou_matrix(np.zeros(4), np.zeros(4))[0, 0] == 0.0


def test_nms_keeps_best_per_cluster():
    labels = SoftLabelSet(0, [_square(0, 10, confidence=0.6), _square(0.2, 10, confidence=0.9),
                              _square(6, 10, confidence=0.5)])
    kept = nms_bev(labels, 0.1)
    assert [b.confidence for b in kept] == [0.9, 0.5]


def test_nms_is_per_class():
    labels = SoftLabelSet(0, [_square(0, 10, confidence=0.6),
                              _square(0, 10, confidence=0.9, cls=ObjectClass.PEDESTRIAN)])
    assert len(nms_bev(labels, 0.1)) == 2


def test_nms_of_nothing():
    assert len(nms_bev(SoftLabelSet(3), 0.1)) == 0
