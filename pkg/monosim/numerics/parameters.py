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

from collections import OrderedDict
from typing import Dict, Iterator, Tuple

import numpy as np

from monosim.common.util import array_checksum
from monosim.numerics.tensor import Tensor, DTYPE


class ParameterSet:
    """
    Named collection of trainable tensors.
    Names are dotted paths ('scene_align.weight'), insertion ordered.
    """
    def __init__(self):
        self._params: Dict[str, Tensor] = OrderedDict()

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params.keys())

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"Parameter {name} already exists.")
        param = Tensor(np.array(value, dtype=DTYPE), requires_grad=True)
        self._params[name] = param
        return param

    def add_uniform(self, name: str, shape: Tuple[int, ...], fan_in: int, rng: np.random.Generator) -> Tensor:
        """Weights drawn uniform in [-a, a] with a = sqrt(1/fan_in)."""
        bound = np.sqrt(1.0 / fan_in)
        return self.add(name, rng.uniform(-bound, bound, size=shape))

    def add_constant(self, name: str, shape: Tuple[int, ...], value=0.0) -> Tensor:
        return self.add(name, np.full(shape, value, dtype=DTYPE))

    def zero_grad(self):
        for _, param in self:
            param.grad = None

    def state(self) -> Dict[str, np.ndarray]:
        return {name: param.data.copy() for name, param in self}

    def load_state(self, state: Dict[str, np.ndarray]):
        for name, param in self:
            if name not in state:
                raise ValueError(f"Missing parameter {name} in state.")
            value = np.asarray(state[name], dtype=DTYPE)
            if value.shape != param.shape:
                raise ValueError(f"Shape mismatch for {name}: {value.shape} != {param.shape}.")
            param.data = value.copy()

    def remove_prefix(self, prefix: str):
        """Drops every parameter whose name starts with prefix."""
        for name in [n for n in self._params if n.startswith(prefix)]:
            del self._params[name]

    def checksum(self) -> str:
        return array_checksum([param.data for _, param in self])


class GradientDescent:
    """Plain gradient descent with a fixed step size."""
    def __init__(self, params: ParameterSet, learning_rate: float):
        if not learning_rate > 0:
            raise ValueError(f"Learning rate must be positive, got {learning_rate}.")
        self.params = params
        self.learning_rate = learning_rate
        self.steps_taken = 0

    def step(self):
        for _, param in self.params:
            if param.grad is not None:
                param.data = param.data - self.learning_rate * param.grad
        self.steps_taken += 1
