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
import warnings
from typing import List

from monosim.common.types.data_handler import DataHandler
from monosim.data.kitti_label.model import SoftLabelSet, DetectionBox, ObjectClass
from monosim.data.kitti_label.writer import KittiLabelWriter, NO_BBOX

# type, truncated, occluded, alpha, bbox (4), dimensions (3), location (3), rotation_y
KITTI_FIELDS = 15
KITTI_FIELDS_WITH_SCORE = KITTI_FIELDS + 1


class KittiLabelParseError(ValueError):
    def __init__(self, line_no: int, line: str, reason: str):
        super().__init__(f"Line {line_no}: {reason} ({line.strip()!r})")
        self.line_no = line_no
        self.line = line


class KittiLabelHandler(DataHandler[SoftLabelSet]):
    @classmethod
    def deserialize(cls, data: bytes, frame_id=0, skip_unknown=False, **kwargs) -> SoftLabelSet:
        """
        Parses a KITTI label file. One object per line, 15 fields plus an optional score.
        Blank lines are ignored. With skip_unknown, objects of other classes (Van, DontCare, ...)
        are skipped with a warning instead of rejected.
        """
        boxes: List[DetectionBox] = []
        for line_no, raw in enumerate(data.splitlines(), start=1):
            try:
                line = raw.decode('ascii')
            except UnicodeDecodeError as err:
                raise KittiLabelParseError(line_no, raw.decode('ascii', 'replace'),
                                           f"non-ASCII byte at column {err.start + 1}") from err
            if not line.strip():
                continue
            box = cls.parse_line(line, line_no, skip_unknown)
            if box is not None:
                boxes.append(box)
        return SoftLabelSet(frame_id, boxes)

    @classmethod
    def serialize(cls, data: SoftLabelSet, include_score=True, **kwargs) -> bytes:
        return KittiLabelWriter(data, include_score).write()

    @classmethod
    def parse_line(cls, line: str, line_no=1, skip_unknown=False):
        fields = line.split()
        if len(fields) not in (KITTI_FIELDS, KITTI_FIELDS_WITH_SCORE):
            raise KittiLabelParseError(
                line_no, line, f"expected {KITTI_FIELDS} or {KITTI_FIELDS_WITH_SCORE} fields, got {len(fields)}"
            )
        try:
            object_class = ObjectClass.parse(fields[0])
        except ValueError:
            if skip_unknown:
                warnings.warn(f"KITTI label line {line_no}: skipping object of type {fields[0]}.")
                return None
            raise KittiLabelParseError(line_no, line, f"unknown object type {fields[0]}")
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError as err:
            raise KittiLabelParseError(line_no, line, f"non-numeric field: {err}") from err
        for text, value in zip(fields[1:], values):
            if not math.isfinite(value):
                raise KittiLabelParseError(line_no, line, f"non-finite field {text}")

        truncation, occlusion, alpha = values[0], values[1], values[2]
        bbox = tuple(values[3:7])
        dimensions = tuple(values[7:10])
        center = tuple(values[10:13])
        yaw = values[13]
        confidence = values[14] if len(values) == KITTI_FIELDS_WITH_SCORE - 1 else 1.0
        if occlusion != int(occlusion):
            raise KittiLabelParseError(line_no, line, f"occluded must be an integer, got {fields[2]}")
        try:
            return DetectionBox(
                object_class=object_class,
                center=center,
                dimensions=dimensions,
                yaw=yaw,
                confidence=confidence,
                bbox_2d=None if bbox == NO_BBOX else bbox,
                truncation=truncation,
                occlusion=int(occlusion),
                alpha=alpha,
            )
        except ValueError as err:
            raise KittiLabelParseError(line_no, line, str(err)) from err