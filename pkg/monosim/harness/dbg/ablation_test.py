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

import logging
import math

import pytest

from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.harness.ablation import (ABLATION_COLUMNS, UNTRAINED, AblationResult, AblationWriter, run_ablation,
                                      summarize, sweep_thresholds)

logger = logging.getLogger(__name__)

SMALL = HarnessConfig(ground_points=400, train_scenes=2)


def test_run_ablation():
    results = run_ablation(SMALL, [0], 2, 2, configurations=('baseline', 'rls+sfs+rfs'))
    assert [r.configuration for r in results] == [UNTRAINED, 'baseline', 'rls+sfs+rfs']
    for r in results:
        for value in (r.ap_r11, r.ap_r40):
            assert math.isnan(value) or 0.0 <= value <= 1.0


def test_summarize_skips_undefined_values():
    results = [AblationResult('a', 0, 0.5, float('nan')), AblationResult('a', 1, 0.25, 0.5),
               AblationResult('b', 0, float('nan'), float('nan'))]
    summary = summarize(results)
    assert summary['a'] == (0.375, 0.5)
    assert all(math.isnan(v) for v in summary['b'])


def test_writer():
    lines = AblationWriter([AblationResult('rls', 3, 0.5, 0.25)]).write().decode('utf-8').splitlines()
    assert lines == [','.join(ABLATION_COLUMNS), 'rls,3,0.500000,0.250000']


def test_threshold_sweep():
    labels = SoftLabelSet(0, [DetectionBox(ObjectClass.CAR, (0.0, 1.65, 10.0), (1.5, 1.6, 3.9), 0.0, c)
                              for c in (0.1, 0.4, 0.6, 0.8, 0.95)])
    rows = sweep_thresholds([labels])
    assert [t for t, _ in rows] == [0.0, 0.3, 0.5, 0.7, 0.9]
    assert [counts[ObjectClass.CAR] for _, counts in rows] == [5, 4, 3, 2, 1]
    assert all(counts[ObjectClass.CYCLIST] == 0 for _, counts in rows)


@pytest.mark.slow
def test_simulation_uplift():
    results = run_ablation(HarnessConfig(), range(5), 500, 8, configurations=('rls', 'rls+sfs+rfs'))
    summary = summarize(results)
    for name, (_, r40) in summary.items():
        logger.info(f"{name}: mean AP|R40 {r40:.4f}")
        assert math.isfinite(r40)
    untrained, response_only, full = (summary[name][1] for name in (UNTRAINED, 'rls', 'rls+sfs+rfs'))
    assert response_only > 0.0 and full > 0.0
    assert response_only >= untrained
    assert full >= untrained
    assert full >= response_only
