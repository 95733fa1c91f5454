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

import itertools

import numpy as np
import pytest

from monosim.data.config.model import HarnessConfig
from monosim.data.scene.model import GROUND
from monosim.evaluation.iou import bev_iou
from monosim.harness.scene_generator import SceneGenerationError, generate_scene, generate_scenes

CONFIG = HarnessConfig(ground_points=400)


def test_same_seed_same_scene():
    a, b = generate_scene(0, CONFIG), generate_scene(0, CONFIG)
    assert a.labels == b.labels
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.image, b.image)


def test_different_seeds_differ():
    assert not np.array_equal(generate_scene(0, CONFIG).points, generate_scene(1, CONFIG).points)


def test_fixed_box_count():
    scene = generate_scene(5, CONFIG.updated(min_boxes=1, max_boxes=1))
    assert len(scene.labels) == 1


def test_empty_scene_is_ground_only():
    scene = generate_scene(5, CONFIG.updated(min_boxes=0, max_boxes=0))
    assert len(scene.labels) == 0
    assert np.all(scene.box_index == GROUND)
    assert np.allclose(scene.point_channels[:, 0], 0.0)


def test_boxes_never_overlap():
    for scene in generate_scenes(0, 100, CONFIG.updated(ground_points=50)):
        for a, b in itertools.combinations(scene.labels.boxes, 2):
            assert bev_iou(a, b) == 0.0


def test_every_box_has_points():
    for scene in generate_scenes(1, 10, CONFIG):
        for i, box in enumerate(scene.labels):
            selection = scene.points_of_box(i)
            assert len(selection) >= 20
            assert box.contains(scene.points[selection], margin=1e-6).all()
            assert np.all(scene.point_channels[selection, 2] == 1.0)


def test_points_are_in_front_of_the_camera():
    scene = generate_scene(2, CONFIG)
    assert np.all(scene.camera.world_to_camera(scene.points)[:, 2] > 0)


def test_ground_points_are_outside_boxes():
    scene = generate_scene(3, CONFIG.updated(ground_points=3000))
    ground = scene.points[scene.box_index == GROUND]
    for box in scene.labels:
        assert not box.contains(ground).any()


def test_image():
    scene = generate_scene(4, CONFIG)
    assert scene.image.shape == (3, CONFIG.image_height, CONFIG.image_width)
    # Every covered pixel has a depth
    covered = scene.image.sum(axis=0) != 0
    assert np.all(scene.image[0][covered] > 0)
    assert covered.any()


def test_labels_carry_image_boxes():
    scene = generate_scene(6, CONFIG)
    for box in scene.labels:
        left, top, right, bottom = box.bbox_2d
        assert 0 <= left <= right <= CONFIG.image_width - 1
        assert 0 <= top <= bottom <= CONFIG.image_height - 1


def test_crowded_area_fails():
    config = CONFIG.updated(min_boxes=4, max_boxes=4, area_x_min=-1.0, area_x_max=1.0, area_z_min=10.0,
                            area_z_max=11.0, placement_retries=20)
    with pytest.raises(SceneGenerationError):
        generate_scene(0, config)
