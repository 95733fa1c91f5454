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

from monosim.common.util import seeded_rng
from monosim.harness.grad_suite import gradient_cases, run_gradient_suite
from monosim.numerics import functional as F
from monosim.numerics.gradcheck import finite_difference_check
from monosim.numerics.tensor import Function, Tensor
from monosim.simulation.scene import scene_loss


def test_square_passes():
    report = finite_difference_check(lambda x: F.total(F.mul(x, x)), [np.array(3.0)])
    assert report.passed
    assert report.max_relative_error < 1e-6


def test_constant_function_passes():
    report = finite_difference_check(lambda x: F.scale(F.total(x), 0.0), [np.ones(4)])
    assert report.passed
    assert report.max_relative_error == 0.0


def test_scene_loss_random_inputs():
    rng = seeded_rng(5)
    teacher = rng.uniform(size=(3, 4, 4))
    mask = (rng.uniform(size=(4, 4)) < 0.7).astype(float)
    student = teacher + rng.choice([-1, 1], teacher.shape) * rng.uniform(0.05, 0.5, teacher.shape)
    report = finite_difference_check(lambda s: scene_loss(s, teacher, mask), [student])
    assert report.max_relative_error < 1e-4


class _WrongSquare(Function):
    def forward(self, x):
        self.x = x
        return x * x

    def backward(self, grad):
        return grad * 3 * self.x,


def test_wrong_gradient_fails_with_location():
    report = finite_difference_check(lambda x: F.total(_WrongSquare.apply(x)), [np.array([1.0, 2.0])])
    assert not report.passed
    assert report.inputs[0].failures


def test_non_finite_is_a_failure():
    report = finite_difference_check(lambda x: F.total(F.clamped_log(x, eps=0.0)), [np.array([0.0, 1.0])])
    assert not report.passed
    assert any('non-finite' in f for f in report.inputs[0].failures)


def test_gradient_suite_passes():
    for seed in range(3):
        for report in run_gradient_suite(seed):
            assert report.passed, report


def test_gradient_suite_covers_objective():
    assert set(gradient_cases()) >= {'align_channels', 'scene_loss', 'roi_loss', 'adaptive_avg_pool',
                                     'response_loss', 'total_loss', 'fuse_global_local'}
