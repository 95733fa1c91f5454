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

import math

import numpy as np
import pytest

from monosim.data.config.model import HarnessConfig
from monosim.harness.student import StudentModel
from monosim.harness.trainer import (METRICS_COLUMNS, MetricsWriter, NonFiniteLossError, Trainer, compute_losses,
                                     train_step)
from monosim.numerics.parameters import GradientDescent
from monosim.simulation.composition import LossWeights
from monosim.simulation.roi import roi_loss
from monosim.simulation.scene import scene_loss

CONFIG = HarnessConfig(ground_points=800, train_scenes=3)
ALIGNMENT = ('scene_align', 'roi_align')


def _state(student: StudentModel):
    return student.params.state()


def test_zero_weights_leave_alignment_heads_untouched():
    trainer = Trainer(CONFIG.updated(lambda_scene=0.0, lambda_roi=0.0))
    before = _state(trainer.student)
    trainer.step()
    after = _state(trainer.student)
    for name in before:
        if name.startswith(ALIGNMENT):
            assert np.array_equal(before[name], after[name]), name
    assert not np.array_equal(before['head.weight'], after['head.weight'])


def test_zero_weights_equal_response_only_training():
    weighted = Trainer(CONFIG.updated(lambda_scene=0.0, lambda_roi=0.0))
    response_only = Trainer(CONFIG.updated(scene_simulation=False, roi_simulation=False))
    for _ in range(2):
        weighted.step()
        response_only.step()
    a, b = _state(weighted.student), _state(response_only.student)
    for name in a:
        if not name.startswith(ALIGNMENT):
            assert np.array_equal(a[name], b[name]), name


def test_teacher_features_reproduced_exactly_cost_nothing():
    trainer = Trainer(CONFIG)
    student, scene, targets = trainer.student, trainer.scenes[0], trainer.targets(0)
    student.train()
    out = student.forward(scene)
    targets.scene_map = student.scene_align[''](out.scene_features[''], update_stats=False).data
    targets.roi_map = student.roi_align[''](out.roi_features[''], update_stats=False).data
    losses = compute_losses(student, scene, targets, trainer.weights, update_stats=False)
    assert losses['scene'].item() == 0.0
    assert losses['roi'].item() == 0.0
    assert losses['total'].item() == losses['response'].item()


def test_same_seed_same_training():
    a, b = Trainer(CONFIG, 3), Trainer(CONFIG, 3)
    reports_a, reports_b = a.run(4), b.run(4)
    assert reports_a == reports_b
    assert a.student.params.checksum() == b.student.params.checksum()


def test_teacher_never_changes():
    trainer = Trainer(CONFIG)
    checksum = trainer.teacher.checksum()
    trainer.run(3)
    assert trainer.teacher.checksum() == checksum


def test_reports():
    reports = Trainer(CONFIG).run(3)
    assert [r.step for r in reports] == [0, 1, 2]
    for r in reports:
        assert math.isfinite(r.total) and r.scene > 0 and r.roi > 0
        assert r.total == pytest.approx(r.response + r.scene + r.roi, rel=1e-12)
        assert math.isnan(r.alpha)
    lines = MetricsWriter(reports).write().decode('utf-8').splitlines()
    assert lines[0] == ','.join(METRICS_COLUMNS)
    assert len(lines) == 4


def test_branch_pair_fusion():
    trainer = Trainer(CONFIG.updated(branch_pair=True))
    student, scene, targets = trainer.student, trainer.scenes[0], trainer.targets(0)
    student.fusion.raw_alpha.data = np.array(0.7)
    student.train()
    losses = compute_losses(student, scene, targets, trainer.weights, update_stats=False)
    out = student.forward(scene)
    terms = [scene_loss(student.scene_align[b](out.scene_features[b], update_stats=False), targets.scene_map,
                        targets.scene_mask).item() for b in ('glo', 'loc')]
    w = 1.0 / (1.0 + math.exp(-0.7))
    assert losses['scene'].item() == pytest.approx(w * terms[0] + (1 - w) * terms[1], rel=1e-12, abs=1e-12)
    report = trainer.step()
    assert 0 < report.alpha < 1 and 0 < report.beta < 1


def test_fusion_matches_hand_computation_during_training():
    trainer = Trainer(CONFIG.updated(branch_pair=True))
    trainer.run(3)
    student, scene, targets = trainer.student, trainer.scenes[0], trainer.targets(0)
    assert student.fusion.raw_alpha.item() != 0.0 and student.fusion.raw_beta.item() != 0.0
    student.train()
    losses = compute_losses(student, scene, targets, trainer.weights, update_stats=False)
    out = student.forward(scene)
    for name, heads, features, target, mask, weight, loss in (
            ('scene', student.scene_align, out.scene_features, targets.scene_map, targets.scene_mask,
             student.fusion.alpha, scene_loss),
            ('roi', student.roi_align, out.roi_features, targets.roi_map, targets.roi_mask,
             student.fusion.beta, roi_loss)):
        glo, loc = (loss(heads[b](features[b], update_stats=False), target, mask).item() for b in ('glo', 'loc'))
        assert losses[name].item() == pytest.approx(weight * glo + (1 - weight) * loc, rel=1e-12, abs=1e-12)


def test_image_space_roi_alignment():
    trainer = Trainer(CONFIG.updated(roi_alignment='image'))
    targets = trainer.targets(0)
    assert targets.roi_map.shape == (CONFIG.teacher_roi_channels, CONFIG.scene_feature_height,
                                     CONFIG.scene_feature_width)
    assert math.isfinite(trainer.step().roi)


def test_non_finite_loss_stops_before_update():
    trainer = Trainer(CONFIG)
    trainer.student.params['head.bias'].data = np.full_like(trainer.student.params['head.bias'].data, np.nan)
    before = _state(trainer.student)
    with pytest.raises(NonFiniteLossError) as info:
        with np.errstate(invalid='ignore'):
            trainer.step()
    assert info.value.component in ('response', 'total')
    after = _state(trainer.student)
    for name in before:
        assert np.array_equal(before[name], after[name], equal_nan=True), name


def test_train_step_builds_targets():
    trainer = Trainer(CONFIG)
    optimizer = GradientDescent(trainer.student.params, CONFIG.learning_rate)
    report = train_step(trainer.student, trainer.scenes[1], trainer.teacher_output(1), LossWeights(),
                        trainer.policy, optimizer, step=5)
    assert report.step == 5
    assert optimizer.steps_taken == 1


def test_objectness_learns_to_separate_anchors():
    trainer = Trainer(CONFIG.updated(train_scenes=1, use_soft_labels=False, scene_simulation=False,
                                     roi_simulation=False))
    assignment = trainer.targets(0).assignment
    assert len(assignment.positives) > 0

    def gap():
        p = trainer.student.forward(trainer.scenes[0]).objectness.data
        return p[assignment.positives].mean() - p[assignment.negatives].mean()

    start_gap, start = gap(), trainer.measure(0).response
    trainer.run(20)
    assert trainer.measure(0).response < start
    assert gap() > start_gap


@pytest.mark.slow
def test_simulation_losses_go_down():
    trainer = Trainer(HarnessConfig(seed=0))
    start = trainer.measure(0)
    trainer.run(200)
    middle = trainer.measure(0)
    assert middle.scene < start.scene
    trainer.run(300)
    end = trainer.measure(0)
    assert end.scene <= 0.5 * start.scene
    assert end.roi <= 0.5 * start.roi
