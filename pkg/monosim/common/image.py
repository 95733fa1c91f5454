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

"""Conversion of feature maps and masks to PIL images for debugging."""

import numpy as np
from PIL import Image


def map_to_pil(values: np.ndarray) -> Image.Image:
    """
    Converts a single H x W map to a greyscale image. Values are scaled linearly so the
    minimum is black and the maximum white; a constant map becomes black.
    """
    if values.ndim != 2:
        raise ValueError(f"Expected an H x W map, got shape {values.shape}.")
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        scaled = (values - lo) / (hi - lo) * 255.0
    else:
        scaled = np.zeros_like(values)
    data = np.round(scaled).astype(np.uint8)
    return Image.frombuffer('L', (values.shape[1], values.shape[0]), data.tobytes(), 'raw', 'L', 0, 1)


def mask_to_pil(mask: np.ndarray) -> Image.Image:
    """Valid pixels white, invalid pixels black."""
    data = np.where(mask != 0, 255, 0).astype(np.uint8)
    return Image.frombuffer('L', (mask.shape[1], mask.shape[0]), data.tobytes(), 'raw', 'L', 0, 1)


def upscale(im: Image.Image, factor: int) -> Image.Image:
    """Nearest-neighbour upscaling so that small maps are visible."""
    return im.resize((im.width * factor, im.height * factor), Image.NEAREST)
