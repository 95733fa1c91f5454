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
from monosim.data.checkpoint.model import StudentCheckpoint
from monosim.data.config.model import HarnessConfig


def test_import_export(tmp_path):
    rng = np.random.default_rng(0)
    checkpoint = StudentCheckpoint(
        HarnessConfig(seed=5, branch_pair=True),
        {'trunk.weight': rng.normal(size=(4, 3)), 'fusion.raw_alpha': np.array(0.25)},
        {'scene_align.running_mean': rng.normal(size=4)},
        step=17,
    )
    path = str(tmp_path / 'student.npz')
    FileType.CHECKPOINT.save(checkpoint, path)
    loaded = FileType.CHECKPOINT.load(path)
    assert loaded.config == checkpoint.config
    assert loaded.step == 17
    assert loaded.parameters.keys() == checkpoint.parameters.keys()
    for name, value in checkpoint.parameters.items():
        assert np.array_equal(loaded.parameters[name], value)
    assert np.array_equal(loaded.statistics['scene_align.running_mean'],
                          checkpoint.statistics['scene_align.running_mean'])


def test_not_a_checkpoint():
    with pytest.raises(ValueError):
        FileType.CHECKPOINT.deserialize(b'garbage')
