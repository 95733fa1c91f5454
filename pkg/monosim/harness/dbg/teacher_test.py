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

from monosim.data.config.model import HarnessConfig
from monosim.data.scene.model import GROUND
from monosim.harness.scene_generator import generate_scene
from monosim.harness.teacher import AnalyticTeacher, box_visibility, teacher_forward

CONFIG = HarnessConfig(ground_points=500)
# One box straight ahead of the camera
SINGLE = CONFIG.updated(min_boxes=1, max_boxes=1, area_x_min=-0.5, area_x_max=0.5, area_z_min=9.5,
                        area_z_max=10.5)


def test_same_scene_same_output():
    scene = generate_scene(0, CONFIG)
    teacher = AnalyticTeacher(CONFIG)
    a, b = teacher_forward(teacher, scene), teacher_forward(teacher, scene)
    assert a.predictions == b.predictions
    assert np.array_equal(a.scene_points.features, b.scene_points.features)
    assert np.array_equal(a.visibility, b.visibility)
    for x, y in zip(a.roi_points, b.roi_points):
        assert np.array_equal(x.features, y.features)


def test_teacher_is_frozen():
    teacher = AnalyticTeacher(CONFIG)
    checksum = teacher.checksum()
    teacher_forward(teacher, generate_scene(1, CONFIG))
    assert teacher.checksum() == checksum
    assert AnalyticTeacher(CONFIG).checksum() == checksum
    with pytest.raises(ValueError):
        teacher.scene_weight[0, 0] = 1.0


def test_visible_box_is_confident():
    for seed in range(5):
        scene = generate_scene(seed, SINGLE)
        output = teacher_forward(AnalyticTeacher(SINGLE), scene)
        assert output.visibility[0] == 1.0
        confident = [b for b in output.predictions if b.confidence >= 0.9]
        assert len(confident) == 1
        assert confident[0].object_class == scene.labels.boxes[0].object_class


def test_empty_scene():
    scene = generate_scene(2, CONFIG.updated(min_boxes=0, max_boxes=0))
    output = teacher_forward(AnalyticTeacher(CONFIG), scene)
    assert len(output.predictions) == 0
    assert output.roi_points == []
    assert output.scene_points.count == scene.point_count
    assert np.all(scene.box_index == GROUND)
    assert output.all_roi_points(CONFIG.teacher_roi_channels).count == 0


def test_features():
    scene = generate_scene(3, CONFIG)
    output = teacher_forward(AnalyticTeacher(CONFIG), scene)
    assert output.scene_points.channels == CONFIG.teacher_scene_channels
    assert np.all(output.scene_points.features > 0)
    assert len(output.roi_points) == len(scene.labels)
    for i, points in enumerate(output.roi_points):
        assert points.count == len(scene.points_of_box(i))
        assert points.channels == CONFIG.teacher_roi_channels


def test_predictions_follow_visibility():
    scene = generate_scene(4, CONFIG)
    output = teacher_forward(AnalyticTeacher(CONFIG), scene)
    visibility = box_visibility(scene)
    assert np.all((visibility >= 0) & (visibility <= 1))
    for box, visible in zip(output.predictions.boxes, visibility):
        assert abs(box.confidence - visible) <= CONFIG.teacher_confidence_noise + 1e-12
    for box in output.predictions.boxes[len(scene.labels):]:
        assert box.confidence < 0.3
