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

"""Evaluation report: AP per class, IoU threshold and recall set, written as CSV."""

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence

from monosim.common.util import format_real
from monosim.data.kitti_label.model import ObjectClass, SoftLabelSet
from monosim.evaluation.average_precision import ApResult, RecallSet, average_precision

REPORT_COLUMNS = ('class', 'iou_threshold', 'recall_set', 'ap')


@dataclass
class ApReportRow:
    object_class: ObjectClass
    iou_threshold: float
    recall_set: RecallSet
    result: ApResult


def evaluation_report(detections: Sequence[SoftLabelSet], ground_truth: Sequence[SoftLabelSet],
                      iou_thresholds: Sequence[float], recall_sets: Sequence[RecallSet],
                      classes: Sequence[ObjectClass] = tuple(ObjectClass)) -> List[ApReportRow]:
    rows = []
    for object_class in classes:
        for iou_threshold in iou_thresholds:
            for recall_set in recall_sets:
                result = average_precision(detections, ground_truth, iou_threshold, recall_set, object_class)
                rows.append(ApReportRow(object_class, iou_threshold, recall_set, result))
    return rows


class ApReportWriter:
    def __init__(self, rows: Sequence[ApReportRow]):
        self.rows = rows

    def write(self) -> bytes:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow([row.object_class.value, format_real(row.iou_threshold, 2), row.recall_set.value,
                             format_real(row.result.value)])
        return buffer.getvalue().encode('utf-8')
