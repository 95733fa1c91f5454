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

"""Scene-level simulation: channel alignment of student features and the masked L1 scene loss."""

import numpy as np

from monosim.numerics import functional as F
from monosim.numerics.parameters import ParameterSet
from monosim.numerics.tensor import Tensor, ensure_tensor
from monosim.simulation.render import count_valid

DEFAULT_MOMENTUM = 0.1


class AlignmentHead:
    """
    1x1 convolution + channel normalisation + rectifier, mapping C_in student channels
    to the C_out channels of the teacher. Its parameters live in a ParameterSet under a prefix.
    """
    def __init__(self, params: ParameterSet, prefix: str, in_channels: int, out_channels: int,
                 rng: np.random.Generator, momentum=DEFAULT_MOMENTUM, eps=F.NORM_EPS):
        self.prefix = prefix
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.momentum = momentum
        self.eps = eps
        self.weight = params.add_uniform(f'{prefix}.weight', (out_channels, in_channels), in_channels, rng)
        self.bias = params.add_constant(f'{prefix}.bias', (out_channels,), 0.0)
        self.scale = params.add_constant(f'{prefix}.scale', (out_channels,), 1.0)
        self.shift = params.add_constant(f'{prefix}.shift', (out_channels,), 0.0)
        self.running_mean = np.zeros(out_channels)
        self.running_var = np.ones(out_channels)
        self.training = True

    def train(self):
        self.training = True

    def eval(self):
        self.training = False

    def __call__(self, x: Tensor, update_stats=True) -> Tensor:
        return align_channels(self, x, update_stats)

    def state(self):
        return {f'{self.prefix}.running_mean': self.running_mean.copy(),
                f'{self.prefix}.running_var': self.running_var.copy()}

    def load_state(self, state):
        self.running_mean = np.array(state[f'{self.prefix}.running_mean'], dtype=np.float64)
        self.running_var = np.array(state[f'{self.prefix}.running_var'], dtype=np.float64)


def align_channels(head: AlignmentHead, x: Tensor, update_stats=True) -> Tensor:
    """
    Per pixel: weight x + bias, then channel normalisation (batch statistics in training mode,
    running statistics in evaluation mode), then max(0, .).
    """
    x = ensure_tensor(x)
    if x.shape[0] != head.in_channels:
        raise ValueError(f"Alignment head {head.prefix} expects {head.in_channels} channels, got {x.shape[0]}.")
    linear = F.conv1x1(head.weight, x, head.bias)
    if head.training:
        normed = F.batch_norm(linear, head.scale, head.shift, head.eps)
        if update_stats:
            flat = linear.data.reshape(head.out_channels, -1)
            n = flat.shape[1]
            unbiased = flat.var(axis=1) * (n / (n - 1) if n > 1 else 1.0)
            head.running_mean = (1 - head.momentum) * head.running_mean + head.momentum * flat.mean(axis=1)
            head.running_var = (1 - head.momentum) * head.running_var + head.momentum * unbiased
    else:
        inv_std = 1.0 / np.sqrt(head.running_var + head.eps)
        centered = F.sub(linear, head.running_mean.reshape(-1, 1, 1))
        x_hat = F.mul(centered, inv_std.reshape(-1, 1, 1))
        normed = F.add(F.mul(x_hat, F.reshape(head.scale, (-1, 1, 1))), F.reshape(head.shift, (-1, 1, 1)))
    return F.relu(normed)


def masked_l1(student: Tensor, teacher: np.ndarray, mask: np.ndarray) -> Tensor:
    """
    (1/n) * sum over valid pixels and all channels of |student - teacher|, n = number of
    valid pixels. An empty mask yields 0 with zero gradient.
    """
    student = ensure_tensor(student)
    teacher = np.asarray(teacher, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if student.shape != teacher.shape:
        raise ValueError(f"Student and teacher shapes differ: {student.shape} vs {teacher.shape}.")
    if mask.shape != student.shape[1:]:
        raise ValueError(f"Mask shape {mask.shape} does not match feature map {student.shape[1:]}.")
    n = count_valid(mask)
    diff = F.absolute(F.sub(student, teacher))
    gated = F.total(F.mul(diff, mask[None, :, :]))
    return F.scale(gated, 1.0 / n if n > 0 else 0.0)


def scene_loss(student: Tensor, teacher: np.ndarray, mask: np.ndarray) -> Tensor:
    """Masked L1 between aligned student scene features and rendered teacher scene features."""
    return masked_l1(student, teacher, mask)
