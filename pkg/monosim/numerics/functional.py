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

"""Differentiable operations. Every op ships its analytic backward rule."""

from typing import Optional, Sequence, Tuple

import numpy as np

from monosim.numerics.tensor import Function, Tensor, DTYPE

# Epsilon used by the channel normalisation
NORM_EPS = 1e-5
# Probabilities are clamped to [LOG_EPS, 1] before taking logarithms
LOG_EPS = 1e-12


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum grad down to shape, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Add(Function):
    def forward(self, a, b):
        self.a_shape, self.b_shape = a.shape, b.shape
        return a + b

    def backward(self, grad):
        return _unbroadcast(grad, self.a_shape), _unbroadcast(grad, self.b_shape)


class Sub(Function):
    def forward(self, a, b):
        self.a_shape, self.b_shape = a.shape, b.shape
        return a - b

    def backward(self, grad):
        return _unbroadcast(grad, self.a_shape), _unbroadcast(-grad, self.b_shape)


class Mul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return _unbroadcast(grad * self.b, self.a.shape), _unbroadcast(grad * self.a, self.b.shape)


class Scale(Function):
    def forward(self, x, factor=1.0):
        self.factor = factor
        return x * factor

    def backward(self, grad):
        return grad * self.factor,


class Total(Function):
    def forward(self, x):
        self.shape = x.shape
        return np.asarray(x.sum(), dtype=DTYPE)

    def backward(self, grad):
        return np.full(self.shape, grad, dtype=DTYPE),


class Reshape(Function):
    def forward(self, x, shape=()):
        self.shape = x.shape
        return x.reshape(shape)

    def backward(self, grad):
        return grad.reshape(self.shape),


class Transpose(Function):
    def forward(self, x, axes=()):
        self.axes = axes
        return np.transpose(x, axes)

    def backward(self, grad):
        return np.transpose(grad, np.argsort(self.axes)),


class Index(Function):
    def forward(self, x, key=None):
        self.shape = x.shape
        self.key = key
        return np.array(x[key], dtype=DTYPE)

    def backward(self, grad):
        out = np.zeros(self.shape, dtype=DTYPE)
        np.add.at(out, self.key, grad)
        return out,


class Absolute(Function):
    def forward(self, x):
        # Subgradient at exactly 0 is 0
        self.sign = np.sign(x)
        return np.abs(x)

    def backward(self, grad):
        return grad * self.sign,


class Relu(Function):
    def forward(self, x):
        self.active = x > 0
        return np.where(self.active, x, 0.0)

    def backward(self, grad):
        return grad * self.active,


class Sigmoid(Function):
    def forward(self, x):
        self.out = 0.5 * (1.0 + np.tanh(0.5 * x))
        return self.out

    def backward(self, grad):
        return grad * self.out * (1.0 - self.out),


class ClampedLog(Function):
    def forward(self, x, eps=LOG_EPS):
        self.clamped = np.maximum(x, eps)
        self.inside = x >= eps
        return np.log(self.clamped)

    def backward(self, grad):
        return grad * self.inside / self.clamped,


class SmoothL1(Function):
    def forward(self, x, beta=1.0):
        self.x = x
        self.beta = beta
        ax = np.abs(x)
        return np.where(ax < beta, 0.5 * x * x / beta, ax - 0.5 * beta)

    def backward(self, grad):
        return grad * np.where(np.abs(self.x) < self.beta, self.x / self.beta, np.sign(self.x)),


class Conv1x1(Function):
    """Per-pixel linear map: weight (C_out x C_in) applied to a C_in x H x W map."""
    def forward(self, weight, x):
        if weight.shape[1] != x.shape[0]:
            raise ValueError(f"Conv1x1 expects {weight.shape[1]} input channels, got {x.shape[0]}.")
        self.weight = weight
        self.x_flat = x.reshape(x.shape[0], -1)
        self.x_shape = x.shape
        return (weight @ self.x_flat).reshape((weight.shape[0],) + x.shape[1:])

    def backward(self, grad):
        g = grad.reshape(grad.shape[0], -1)
        return g @ self.x_flat.T, (self.weight.T @ g).reshape(self.x_shape)


class BatchNorm(Function):
    """Channel normalisation with batch statistics over the spatial extent (batch size 1)."""
    def forward(self, x, gamma, beta, eps=NORM_EPS):
        c = x.shape[0]
        flat = x.reshape(c, -1)
        self.n = flat.shape[1]
        self.mean = flat.mean(axis=1)
        self.var = flat.var(axis=1)
        self.inv_std = 1.0 / np.sqrt(self.var + eps)
        self.x_hat = (flat - self.mean[:, None]) * self.inv_std[:, None]
        self.gamma = gamma
        self.x_shape = x.shape
        out = self.x_hat * gamma[:, None] + beta[:, None]
        return out.reshape(x.shape)

    def backward(self, grad):
        g = grad.reshape(grad.shape[0], -1)
        d_gamma = (g * self.x_hat).sum(axis=1)
        d_beta = g.sum(axis=1)
        d_xhat = g * self.gamma[:, None]
        dx = (self.inv_std[:, None] / self.n) * (
            self.n * d_xhat
            - d_xhat.sum(axis=1, keepdims=True)
            - self.x_hat * (d_xhat * self.x_hat).sum(axis=1, keepdims=True)
        )
        return dx.reshape(self.x_shape), d_gamma, d_beta


def pooling_matrix(in_size: int, out_size: int) -> np.ndarray:
    """
    Row-averaging matrix of adaptive pooling: output i averages the input
    range [floor(i*in/out), ceil((i+1)*in/out)).
    """
    if in_size < 1 or out_size < 1:
        raise ValueError(f"Pooling sizes must be positive, got {in_size} -> {out_size}.")
    m = np.zeros((out_size, in_size), dtype=DTYPE)
    for i in range(out_size):
        start = (i * in_size) // out_size
        end = -((-(i + 1) * in_size) // out_size)
        m[i, start:end] = 1.0 / (end - start)
    return m


class AdaptiveAvgPool2d(Function):
    def forward(self, x, out_height=1, out_width=1):
        self.rows = pooling_matrix(x.shape[1], out_height)
        self.cols = pooling_matrix(x.shape[2], out_width)
        if out_height == x.shape[1] and out_width == x.shape[2]:
            return x.copy()
        return np.einsum('ia,cab,jb->cij', self.rows, x, self.cols)

    def backward(self, grad):
        return np.einsum('ia,cij,jb->cab', self.rows, grad, self.cols),


class ScatterMean(Function):
    """
    Averages the columns of a C x P matrix into K buckets given by a fixed index
    vector (-1 drops the column). Empty buckets hold 0.
    """
    def forward(self, x, index=None, buckets=0):
        self.index = np.asarray(index)
        self.keep = self.index >= 0
        self.x_shape = x.shape
        counts = np.bincount(self.index[self.keep], minlength=buckets).astype(DTYPE)
        self.counts = counts
        out = np.zeros((x.shape[0], buckets), dtype=DTYPE)
        np.add.at(out, (slice(None), self.index[self.keep]), x[:, self.keep])
        occupied = counts > 0
        out[:, occupied] /= counts[occupied]
        return out

    def backward(self, grad):
        dx = np.zeros(self.x_shape, dtype=DTYPE)
        idx = self.index[self.keep]
        dx[:, self.keep] = grad[:, idx] / self.counts[idx]
        return dx,


def add(a, b) -> Tensor:
    return Add.apply(a, b)


def sub(a, b) -> Tensor:
    return Sub.apply(a, b)


def mul(a, b) -> Tensor:
    return Mul.apply(a, b)


def scale(x, factor: float) -> Tensor:
    return Scale.apply(x, factor=float(factor))


def total(x) -> Tensor:
    return Total.apply(x)


def reshape(x, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))


def transpose(x, axes: Sequence[int]) -> Tensor:
    return Transpose.apply(x, axes=tuple(axes))


def index(x, key) -> Tensor:
    return Index.apply(x, key=key)


def absolute(x) -> Tensor:
    return Absolute.apply(x)


def relu(x) -> Tensor:
    return Relu.apply(x)


def sigmoid(x) -> Tensor:
    return Sigmoid.apply(x)


def clamped_log(x, eps=LOG_EPS) -> Tensor:
    return ClampedLog.apply(x, eps=eps)


def smooth_l1(x, beta=1.0) -> Tensor:
    return SmoothL1.apply(x, beta=beta)


def conv1x1(weight, x, bias: Optional[Tensor] = None) -> Tensor:
    out = Conv1x1.apply(weight, x)
    if bias is not None:
        out = add(out, reshape(bias, (-1, 1, 1)))
    return out


def batch_norm(x, gamma, beta, eps=NORM_EPS) -> Tensor:
    return BatchNorm.apply(x, gamma, beta, eps=eps)


def adaptive_avg_pool2d(x, out_height: int, out_width: int) -> Tensor:
    return AdaptiveAvgPool2d.apply(x, out_height=out_height, out_width=out_width)


def scatter_mean(x, index: np.ndarray, buckets: int) -> Tensor:
    return ScatterMean.apply(x, index=index, buckets=buckets)
