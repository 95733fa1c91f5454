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

"""Converts SoftLabelSets back into KITTI label text"""

from monosim.common.util import format_real
from monosim.data.kitti_label.model import SoftLabelSet, DetectionBox

# Placeholder written when a box has no 2D bounding box
NO_BBOX = (-1.0, -1.0, -1.0, -1.0)


class KittiLabelWriter:
    def __init__(self, model: SoftLabelSet, include_score=True):
        self.model = model
        self.include_score = include_score

    def write(self) -> bytes:
        return ''.join(self.line(box) + '\n' for box in self.model.boxes).encode('ascii')

    def line(self, box: DetectionBox) -> str:
        bbox = box.bbox_2d if box.bbox_2d is not None else NO_BBOX
        fields = [
            box.object_class.value,
            format_real(box.truncation),
            str(int(box.occlusion)),
            format_real(box.alpha),
            *(format_real(v) for v in bbox),
            *(format_real(v) for v in box.dimensions),
            *(format_real(v) for v in box.center),
            format_real(box.yaw),
        ]
        if self.include_score:
            fields.append(format_real(box.confidence))
        return ' '.join(fields)
