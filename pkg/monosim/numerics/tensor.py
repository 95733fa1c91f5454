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

"""
Minimal reverse-mode differentiation over numpy arrays.

Every operation is a Function with an explicit forward and an analytic backward rule.
Calling backward() on a scalar Tensor walks the recorded graph in reverse topological order.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from monosim.common.util import debug_check_finite

DTYPE = np.float64

ArrayLike = Union[np.ndarray, float, int, Sequence]


def as_array(data: ArrayLike) -> np.ndarray:
    return np.array(data, dtype=DTYPE)


class Tensor:
    def __init__(self, data: ArrayLike, requires_grad=False, ctx: Optional['Function'] = None):
        self.data: np.ndarray = data if isinstance(data, np.ndarray) and data.dtype == DTYPE else as_array(data)
        self.requires_grad = requires_grad or ctx is not None
        self.grad: Optional[np.ndarray] = None
        self.ctx = ctx

    def __repr__(self):
        return f"<Tensor {self.shape} grad={'yes' if self.requires_grad else 'no'}>"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> 'Tensor':
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def __add__(self, other):
        from monosim.numerics.functional import add
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from monosim.numerics.functional import sub
        return sub(self, other)

    def __rsub__(self, other):
        from monosim.numerics.functional import sub
        return sub(other, self)

    def __mul__(self, other):
        from monosim.numerics.functional import mul
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from monosim.numerics.functional import scale
        return scale(self, -1.0)

    def __truediv__(self, other: float):
        from monosim.numerics.functional import scale
        if isinstance(other, Tensor):
            raise ValueError("Division by a Tensor is not supported, only by constants.")
        return scale(self, 1.0 / other)

    def sum(self) -> 'Tensor':
        from monosim.numerics.functional import total
        return total(self)

    def reshape(self, *shape) -> 'Tensor':
        from monosim.numerics.functional import reshape
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)

    def transpose(self, *axes) -> 'Tensor':
        from monosim.numerics.functional import transpose
        return transpose(self, axes)

    def backward(self):
        """Accumulate d(self)/d(leaf) into the grad slot of every leaf that requires a gradient."""
        if self.size != 1:
            raise ValueError(f"backward() needs a scalar output, got shape {self.shape}.")
        order = _toposort(self)
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node.ctx is None:
                node.grad = grad if node.grad is None else node.grad + grad
                continue
            for parent, parent_grad in zip(node.ctx.parents, node.ctx.backward(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + parent_grad
                else:
                    grads[id(parent)] = parent_grad


def _toposort(root: Tensor) -> List[Tensor]:
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node.ctx is not None:
            for parent in node.ctx.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
    return order


def tensor(data: ArrayLike, requires_grad=False) -> Tensor:
    return Tensor(as_array(data), requires_grad=requires_grad)


def ensure_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(as_array(value))


class Function:
    """
    Base class for differentiable operations.
    Subclasses implement forward on raw arrays and backward returning one gradient
    (or None) per parent tensor.
    """
    def __init__(self, *parents: Tensor):
        self.parents = parents

    @classmethod
    def apply(cls, *parents, **kwargs) -> Tensor:
        parents = tuple(ensure_tensor(p) for p in parents)
        ctx = cls(*parents)
        out = ctx.forward(*[p.data for p in parents], **kwargs)
        debug_check_finite(out, cls.__name__)
        if any(p.requires_grad for p in parents):
            return Tensor(out, ctx=ctx)
        return Tensor(out)

    def forward(self, *args, **kwargs) -> np.ndarray:
        raise NotImplementedError()

    def backward(self, grad: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        raise NotImplementedError()
