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

from monosim.common.types.data_handler import DataHandler
from monosim.common.util import parse_reals
from monosim.data.camera.model import CameraModel
from monosim.data.camera.writer import CameraWriter


class CameraFormatError(ValueError):
    pass


class CameraHandler(DataHandler[CameraModel]):
    @classmethod
    def deserialize(cls, data: bytes, **kwargs) -> CameraModel:
        """Row-major K (9 numbers) followed by RT (12 numbers). Lines starting with # are comments."""
        text = '\n'.join(
            line for line in data.decode('ascii').splitlines() if not line.lstrip().startswith('#')
        )
        try:
            values = parse_reals(text, 21, 'Camera file')
            return CameraModel(np.array(values[:9]).reshape(3, 3), np.array(values[9:]).reshape(3, 4))
        except CameraFormatError:
            raise
        except ValueError as err:
            raise CameraFormatError(str(err)) from err

    @classmethod
    def serialize(cls, data: CameraModel, **kwargs) -> bytes:
        return CameraWriter(data).write()
