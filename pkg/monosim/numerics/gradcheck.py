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

"""Central finite-difference verification of analytic gradients."""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from monosim.numerics.tensor import Tensor, DTYPE

# Denominator floor for the relative error
RELATIVE_FLOOR = 1e-6


class InputReport:
    def __init__(self, index: int, max_relative_error: float, worst_location: Optional[Tuple[int, ...]],
                 failures: List[str]):
        self.index = index
        self.max_relative_error = max_relative_error
        self.worst_location = worst_location
        self.failures = failures

    @property
    def passed(self) -> bool:
        return not self.failures

    def __repr__(self):
        return f"<input {self.index}: max_rel={self.max_relative_error:.3e} " \
               f"{'pass' if self.passed else 'FAIL ' + '; '.join(self.failures[:3])}>"


class GradCheckReport:
    def __init__(self, name: str, inputs: List[InputReport]):
        self.name = name
        self.inputs = inputs

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.inputs)

    @property
    def max_relative_error(self) -> float:
        return max((r.max_relative_error for r in self.inputs), default=0.0)

    def __repr__(self):
        return f"<GradCheck {self.name}: {'pass' if self.passed else 'FAIL'} " \
               f"max_rel={self.max_relative_error:.3e}>"


def finite_difference_check(
        op: Callable[..., Tensor], inputs: Sequence[np.ndarray],
        epsilon=1e-5, tolerance=1e-3, name: Optional[str] = None,
        check: Optional[Sequence[bool]] = None
) -> GradCheckReport:
    """
    Compares the analytic gradient of the scalar function op against the central difference
    (f(x+e) - f(x-e)) / 2e for every element of every input.

    op receives one Tensor per input and must return a scalar Tensor.
    check selects which inputs are verified (default: all).
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}.")
    arrays = [np.array(x, dtype=DTYPE) for x in inputs]
    if check is None:
        check = [True] * len(arrays)

    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = op(*tensors)
    if out.size != 1:
        raise ValueError(f"finite_difference_check needs a scalar op, got shape {out.shape}.")
    out.backward()

    reports = []
    for i, array in enumerate(arrays):
        if not check[i]:
            continue
        analytic = tensors[i].grad if tensors[i].grad is not None else np.zeros_like(array)
        failures = []
        worst = 0.0
        worst_loc = None
        for loc in np.ndindex(*array.shape):
            numeric = _central_difference(op, arrays, i, loc, epsilon)
            a = analytic[loc]
            if not np.isfinite(numeric) or not np.isfinite(a):
                failures.append(f"non-finite value at input {i} {loc} (analytic {a}, numeric {numeric})")
                continue
            rel = abs(a - numeric) / max(abs(a), abs(numeric), RELATIVE_FLOOR)
            if rel > worst:
                worst = rel
                worst_loc = loc
            if rel > tolerance:
                failures.append(f"input {i} {loc}: analytic {a:.6e} vs numeric {numeric:.6e}")
        reports.append(InputReport(i, worst, worst_loc, failures))
    return GradCheckReport(name or getattr(op, '__name__', 'op'), reports)


def _central_difference(op, arrays, i, loc, epsilon) -> float:
    plus = [a.copy() for a in arrays]
    minus = [a.copy() for a in arrays]
    plus[i][loc] += epsilon
    minus[i][loc] -= epsilon
    f_plus = op(*[Tensor(a) for a in plus]).item()
    f_minus = op(*[Tensor(a) for a in minus]).item()
    return (f_plus - f_minus) / (2 * epsilon)
