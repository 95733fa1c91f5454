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

"""Composition of the simulation losses and the learned fusion of global/local branch losses."""

from dataclasses import dataclass

import numpy as np

from monosim.numerics import functional as F
from monosim.numerics.parameters import ParameterSet
from monosim.numerics.tensor import Tensor, ensure_tensor


@dataclass(frozen=True)
class LossWeights:
    """Fixed weighting factors of the scene-level and RoI-level losses."""
    scene: float = 1.0
    roi: float = 1.0

    def __post_init__(self):
        for name, value in (('scene', self.scene), ('roi', self.roi)):
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"Loss weight {name} must be finite and non-negative, got {value}.")


class FusionWeights:
    """
    The two learnable raw fusion weights (scene and RoI). Effective weights are their sigmoids,
    so they always lie in (0, 1). Both start at raw 0, i.e. an even split.
    """
    ALPHA = 'fusion.raw_alpha'
    BETA = 'fusion.raw_beta'

    def __init__(self, params: ParameterSet, raw_alpha=0.0, raw_beta=0.0):
        self.raw_alpha = params.add(self.ALPHA, np.array(raw_alpha, dtype=np.float64))
        self.raw_beta = params.add(self.BETA, np.array(raw_beta, dtype=np.float64))

    @property
    def alpha(self) -> float:
        return float(1.0 / (1.0 + np.exp(-self.raw_alpha.data)))

    @property
    def beta(self) -> float:
        return float(1.0 / (1.0 + np.exp(-self.raw_beta.data)))


def total_loss(response, scene, roi, weights: LossWeights) -> Tensor:
    """L = L_response + w_scene * L_scene + w_roi * L_roi."""
    return F.add(F.add(ensure_tensor(response), F.scale(scene, weights.scene)), F.scale(roi, weights.roi))


def fuse_global_local(loss_glo, loss_loc, raw_weight) -> Tensor:
    """sigmoid(raw) * L_glo + (1 - sigmoid(raw)) * L_loc. Differentiable in all three inputs."""
    w = F.sigmoid(raw_weight)
    return F.add(F.mul(w, loss_glo), F.mul(F.sub(1.0, w), loss_loc))
