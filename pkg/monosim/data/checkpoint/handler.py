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

import io

import numpy as np

from monosim.common.types.data_handler import DataHandler
from monosim.data.checkpoint.model import StudentCheckpoint
from monosim.data.config.handler import ConfigHandler

PARAM_PREFIX = 'param/'
STAT_PREFIX = 'stat/'


class CheckpointHandler(DataHandler[StudentCheckpoint]):
    """
    Checkpoints are numpy .npz archives: the config text as bytes under 'config', the step
    under 'step', parameters under 'param/<name>' and running statistics under 'stat/<name>'.
    """
    @classmethod
    def deserialize(cls, data: bytes, **kwargs) -> StudentCheckpoint:
        try:
            archive = np.load(io.BytesIO(data), allow_pickle=False)
        except (OSError, ValueError) as err:
            raise ValueError(f"Not a checkpoint archive: {err}") from err
        with archive:
            if 'config' not in archive.files or 'step' not in archive.files:
                raise ValueError("Checkpoint archive lacks config or step.")
            config = ConfigHandler.deserialize(archive['config'].tobytes())
            parameters = {n[len(PARAM_PREFIX):]: archive[n] for n in archive.files if n.startswith(PARAM_PREFIX)}
            statistics = {n[len(STAT_PREFIX):]: archive[n] for n in archive.files if n.startswith(STAT_PREFIX)}
            return StudentCheckpoint(config, parameters, statistics, int(archive['step']))

    @classmethod
    def serialize(cls, data: StudentCheckpoint, **kwargs) -> bytes:
        arrays = {
            'config': np.frombuffer(ConfigHandler.serialize(data.config), dtype=np.uint8),
            'step': np.int64(data.step),
        }
        arrays.update({PARAM_PREFIX + name: value for name, value in data.parameters.items()})
        arrays.update({STAT_PREFIX + name: value for name, value in data.statistics.items()})
        buffer = io.BytesIO()
        np.savez(buffer, **arrays)
        return buffer.getvalue()
