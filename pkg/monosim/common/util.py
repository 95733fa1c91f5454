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

import hashlib
import warnings
from typing import Iterable, List, Sequence

import numpy as np


DEBUG = False


def seeded_rng(seed: int) -> np.random.Generator:
    """
    Returns a deterministic random stream for a 64-bit seed.
    PCG64 streams are identical across runs and platforms for the same seed.
    """
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}.")
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, *salt: int) -> int:
    """Derives an independent child seed from a seed and a salt path."""
    return int(np.random.SeedSequence([seed, *salt]).generate_state(1, dtype=np.uint64)[0])


def array_checksum(arrays: Iterable[np.ndarray]) -> str:
    """SHA-256 over the raw bytes (and shapes) of the given arrays."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.shape).encode('ascii'))
        h.update(str(a.dtype).encode('ascii'))
        h.update(a.tobytes())
    return h.hexdigest()


def format_real(value: float, decimals=6) -> str:
    """Fixed-point decimal notation, never scientific. Negative zero is written as zero."""
    text = f"{value:.{decimals}f}"
    if text.startswith('-') and float(text) == 0:
        text = text[1:]
    return text


def parse_reals(text: str, expected: int, what: str) -> List[float]:
    """Parses whitespace-separated decimal numbers and checks how many there are."""
    fields = text.split()
    if len(fields) != expected:
        raise ValueError(f"{what}: expected {expected} numbers, got {len(fields)}.")
    try:
        values = [float(f) for f in fields]
    except ValueError as err:
        raise ValueError(f"{what}: non-numeric field ({err}).") from err
    if not all(np.isfinite(values)):
        raise ValueError(f"{what}: non-finite value.")
    return values


def check_finite(array: np.ndarray, what: str):
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{what} contains non-finite values.")


def check_shape(array: np.ndarray, shape: Sequence, what: str):
    """shape may contain None as wildcard."""
    if array.ndim != len(shape) or any(s is not None and s != a for s, a in zip(shape, array.shape)):
        raise ValueError(f"{what} must have shape {tuple(shape)}, got {array.shape}.")


def debug_check_finite(array: np.ndarray, what: str):
    """Only used while debugging, otherwise does nothing."""
    if DEBUG and not np.all(np.isfinite(array)):
        warnings.warn(f'{what} contains non-finite values.')
