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

"""Converts CameraModels back into the plain-text camera file format"""

import numpy as np

from monosim.data.camera.model import CameraModel


class CameraWriter:
    def __init__(self, model: CameraModel):
        self.model = model

    def write(self) -> bytes:
        lines = ['# K']
        for row in self.model.k:
            lines.append(self._row(row))
        lines.append('# RT')
        for row in self.model.rt:
            lines.append(self._row(row))
        return ('\n'.join(lines) + '\n').encode('ascii')

    @staticmethod
    def _row(row) -> str:
        # Shortest decimal that round-trips, never in exponent notation
        return ' '.join(np.format_float_positional(float(v), unique=True, trim='-') for v in row)
