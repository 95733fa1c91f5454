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

"""Converts HarnessConfigs back into flat key=value text"""

from dataclasses import fields

from monosim.data.config.model import HarnessConfig


class ConfigWriter:
    def __init__(self, model: HarnessConfig):
        self.model = model

    def write(self) -> bytes:
        lines = []
        for f in fields(self.model):
            value = getattr(self.model, f.name)
            if isinstance(value, bool):
                value = 'true' if value else 'false'
            else:
                value = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"{f.name}={value}")
        return ('\n'.join(lines) + '\n').encode('utf-8')
