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

from monosim.common import util
from monosim.common.util import (array_checksum, debug_check_finite, derive_seed, format_real, parse_reals,
                                 seeded_rng)


def test_same_seed_same_stream():
    assert np.array_equal(seeded_rng(0).uniform(size=100), seeded_rng(0).uniform(size=100))


def test_different_seeds_differ():
    assert not np.array_equal(seeded_rng(0).uniform(size=100), seeded_rng(1).uniform(size=100))


def test_uniform_mean():
    assert abs(seeded_rng(42).uniform(size=100_000).mean() - 0.5) < 0.01


def test_seed_range():
    seeded_rng(2 ** 64 - 1)
    with pytest.raises(ValueError):
        seeded_rng(-1)
    with pytest.raises(ValueError):
        seeded_rng(2 ** 64)


def test_derive_seed():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    assert derive_seed(0, 1) != derive_seed(0, 2)
    assert 0 <= derive_seed(5, 3) < 2 ** 64


def test_format_real():
    assert format_real(1.5) == '1.500000'
    assert format_real(-0.0000001) == '0.000000'
    assert format_real(-1.59, 2) == '-1.59'
    assert format_real(float('nan')) == 'nan'


def test_parse_reals():
    assert parse_reals('1 2.5\n-3', 3, 'test') == [1.0, 2.5, -3.0]
    with pytest.raises(ValueError):
        parse_reals('1 2', 3, 'test')
    with pytest.raises(ValueError):
        parse_reals('1 x 3', 3, 'test')
    with pytest.raises(ValueError):
        parse_reals('1 inf 3', 3, 'test')


def test_checksum_sees_shape():
    assert array_checksum([np.zeros(4)]) != array_checksum([np.zeros((2, 2))])
    assert array_checksum([np.arange(3.0)]) == array_checksum([np.arange(3.0)])


def test_debug_check_finite(monkeypatch):
    debug_check_finite(np.array([np.nan]), 'quiet')
    monkeypatch.setattr(util, 'DEBUG', True)
    with pytest.warns(UserWarning):
        debug_check_finite(np.array([np.nan]), 'loud')
