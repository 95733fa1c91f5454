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

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from monosim.data.config.model import HarnessConfig


@dataclass
class StudentCheckpoint:
    """Trained student state: the harness config it was built from, its parameters and running statistics."""
    config: HarnessConfig
    parameters: Dict[str, np.ndarray] = field(default_factory=dict)
    statistics: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
