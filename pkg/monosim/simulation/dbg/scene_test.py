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
import pytest

from monosim.numerics.parameters import ParameterSet
from monosim.numerics.tensor import Tensor
from monosim.simulation.scene import AlignmentHead, align_channels, scene_loss


def _identity_head(channels=2):
    head = AlignmentHead(ParameterSet(), 'align', channels, channels, np.random.default_rng(0))
    head.weight.data = np.eye(channels)
    head.eval()
    return head


def test_identity_head_passes_positive_input():
    out = align_channels(_identity_head(), Tensor(np.full((2, 3, 3), 2.0)))
    assert out.data == pytest.approx(np.full((2, 3, 3), 2.0), abs=1e-4)


def test_identity_head_clamps_negative_input():
    out = align_channels(_identity_head(), Tensor(np.full((2, 3, 3), -3.0)))
    assert np.array_equal(out.data, np.zeros((2, 3, 3)))


def test_training_head_matches_oracle():
    rng = np.random.default_rng(1)
    head = AlignmentHead(ParameterSet(), 'align', 8, 4, rng)
    head.bias.data = rng.normal(size=4)
    head.scale.data = rng.uniform(0.5, 1.5, 4)
    head.shift.data = rng.normal(size=4)
    x = rng.normal(size=(8, 4, 4))
    out = align_channels(head, Tensor(x)).data

    linear = np.einsum('oi,ihw->ohw', head.weight.data, x) + head.bias.data[:, None, None]
    mean = linear.mean(axis=(1, 2))[:, None, None]
    var = linear.var(axis=(1, 2))[:, None, None]
    expected = (linear - mean) / np.sqrt(var + head.eps) * head.scale.data[:, None, None] \
        + head.shift.data[:, None, None]
    np.testing.assert_allclose(out, np.maximum(expected, 0.0), rtol=1e-12, atol=1e-12)


def test_running_statistics():
    rng = np.random.default_rng(2)
    head = AlignmentHead(ParameterSet(), 'align', 3, 2, rng, momentum=0.5)
    x = rng.normal(size=(3, 2, 2))
    align_channels(head, Tensor(x), update_stats=False)
    assert np.array_equal(head.running_mean, np.zeros(2))
    align_channels(head, Tensor(x))
    linear = np.einsum('oi,ihw->ohw', head.weight.data, x).reshape(2, -1)
    np.testing.assert_allclose(head.running_mean, 0.5 * linear.mean(axis=1))
    np.testing.assert_allclose(head.running_var, 0.5 + 0.5 * linear.var(axis=1, ddof=1))


def test_wrong_channel_count():
    with pytest.raises(ValueError):
        align_channels(_identity_head(2), Tensor(np.zeros((3, 2, 2))))


def test_loss_of_identical_maps():
    x = np.random.default_rng(3).uniform(size=(4, 4, 3))
    assert scene_loss(Tensor(x), x, np.ones((4, 3))).item() == 0.0


def test_loss_hand_case():
    student = np.array([[[1.0, 5.0], [2.0, 0.5]]])
    teacher = np.array([[[0.0, 0.0], [0.0, 0.0]]])
    mask = np.array([[1.0, 0.0], [1.0, 1.0]])
    assert scene_loss(Tensor(student), teacher, mask).item() == pytest.approx(3.5 / 3, rel=1e-12)


def test_loss_with_empty_mask():
    rng = np.random.default_rng(4)
    student = Tensor(rng.normal(size=(2, 3, 3)), requires_grad=True)
    loss = scene_loss(student, rng.normal(size=(2, 3, 3)), np.zeros((3, 3)))
    assert loss.item() == 0.0
    loss.backward()
    assert not student.grad.any()


def test_loss_matches_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        c, h, w = (int(v) for v in rng.integers(1, 6, 3))
        student, teacher = rng.normal(size=(c, h, w)), rng.normal(size=(c, h, w))
        mask = (rng.uniform(size=(h, w)) < 0.6).astype(np.float64)
        mask[0, 0] = 1.0
        total = sum(abs(student[k, i, j] - teacher[k, i, j])
                    for k in range(c) for i in range(h) for j in range(w) if mask[i, j])
        assert scene_loss(Tensor(student), teacher, mask).item() == pytest.approx(total / mask.sum(), rel=1e-12)


def test_masked_pixels_do_not_matter():
    rng = np.random.default_rng(6)
    student, teacher = rng.normal(size=(3, 4, 4)), rng.normal(size=(3, 4, 4))
    mask = np.ones((4, 4))
    mask[1, 2] = 0.0
    before = scene_loss(Tensor(student), teacher, mask).item()
    student[:, 1, 2] += 100.0
    teacher[:, 1, 2] -= 7.0
    assert scene_loss(Tensor(student), teacher, mask).item() == before


def test_gradient_only_reaches_valid_pixels():
    rng = np.random.default_rng(7)
    student = Tensor(rng.normal(size=(2, 3, 3)), requires_grad=True)
    mask = np.zeros((3, 3))
    mask[0, 1] = 1.0
    scene_loss(student, rng.normal(size=(2, 3, 3)), mask).backward()
    assert np.count_nonzero(student.grad) == 2
    assert np.all(student.grad[:, 0, 1] != 0)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        scene_loss(Tensor(np.zeros((2, 3, 3))), np.zeros((2, 3, 4)), np.ones((3, 3)))
    with pytest.raises(ValueError):
        scene_loss(Tensor(np.zeros((2, 3, 3))), np.zeros((2, 3, 3)), np.ones((3, 4)))


def test_loss_scales_with_its_inputs():
    rng = np.random.default_rng(8)
    student, teacher = rng.normal(size=(3, 5, 4)), rng.normal(size=(3, 5, 4))
    mask = (rng.uniform(size=(5, 4)) < 0.7).astype(np.float64)
    base = scene_loss(Tensor(student), teacher, mask).item()
    for k in (0.5, 2.0, 13.0):
        assert scene_loss(Tensor(k * student), k * teacher, mask).item() == pytest.approx(k * base, rel=1e-12)
