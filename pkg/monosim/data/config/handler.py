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

from dataclasses import fields

from monosim.common.types.data_handler import DataHandler
from monosim.data.config.model import HarnessConfig
from monosim.data.config.writer import ConfigWriter

_TRUE = ('true', 'yes', '1', 'on')
_FALSE = ('false', 'no', '0', 'off')


class ConfigError(ValueError):
    pass


class ConfigHandler(DataHandler[HarnessConfig]):
    @classmethod
    def deserialize(cls, data: bytes, **kwargs) -> HarnessConfig:
        """
        Flat key=value text. # starts a comment, blank lines are ignored,
        missing keys keep their defaults, unknown keys are rejected.
        """
        types = {f.name: f.type for f in fields(HarnessConfig)}
        values = {}
        for line_no, raw in enumerate(data.decode('utf-8').splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f"Config line {line_no}: expected key=value, got {raw!r}.")
            key, value = (part.strip() for part in line.split('=', 1))
            if key not in types:
                raise ConfigError(f"Config line {line_no}: unknown key {key!r}.")
            values[key] = cls._convert(key, value, types[key], line_no)
        try:
            return HarnessConfig(**values)
        except ValueError as err:
            raise ConfigError(str(err)) from err

    @classmethod
    def serialize(cls, data: HarnessConfig, **kwargs) -> bytes:
        return ConfigWriter(data).write()

    @staticmethod
    def _convert(key, value: str, typ, line_no: int):
        if typ in (bool, 'bool'):
            if value.lower() in _TRUE:
                return True
            if value.lower() in _FALSE:
                return False
            raise ConfigError(f"Config line {line_no}: {key} expects true/false, got {value!r}.")
        try:
            if typ in (int, 'int'):
                return int(value)
            if typ in (float, 'float'):
                return float(value)
        except ValueError:
            raise ConfigError(f"Config line {line_no}: {key} expects a number, got {value!r}.")
        return value
