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

from monosim.common.types.file_types import FileType
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import SoftLabelSet
from monosim.data.scene.handler import boxes_from_array, boxes_to_array
from monosim.data.scene.model import SyntheticScene
from monosim.harness.scene_generator import generate_scene


def test_import_export(tmp_path):
    scene = generate_scene(42, HarnessConfig(ground_points=300), frame_id=12)
    path = str(tmp_path / scene.file_name())
    FileType.SCENE.save(scene, path)
    loaded = FileType.SCENE.load(path)
    assert scene.file_name() == '000012.npz'
    assert loaded.frame_id == 12 and loaded.seed == 42
    assert loaded.labels == scene.labels
    assert loaded.camera == scene.camera
    assert loaded.ground_y == scene.ground_y
    for name in ('points', 'point_channels', 'box_index', 'image'):
        assert np.array_equal(getattr(loaded, name), getattr(scene, name))


def test_box_table():
    labels = generate_scene(3, HarnessConfig()).labels
    table = boxes_to_array(labels)
    assert table.shape == (len(labels), 17)
    assert boxes_from_array(labels.frame_id, table) == labels
    assert boxes_to_array(SoftLabelSet(0)).shape == (0, 17)


def test_not_a_scene():
    with pytest.raises(ValueError):
        FileType.SCENE.deserialize(b'not an archive')


def test_inconsistent_arrays():
    scene = generate_scene(1, HarnessConfig(ground_points=100))
    with pytest.raises(ValueError):
        SyntheticScene(scene.frame_id, scene.seed, scene.labels, scene.points, scene.point_channels[:-1],
                       scene.box_index, scene.camera, scene.image, scene.ground_y)
    with pytest.raises(ValueError):
        SyntheticScene(scene.frame_id, scene.seed, SoftLabelSet(0), scene.points, scene.point_channels,
                       np.zeros(scene.point_count, dtype=np.int64), scene.camera, scene.image, scene.ground_y)
