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

import io
from typing import List

import numpy as np

from monosim.common.types.data_handler import DataHandler
from monosim.data.camera.model import CameraModel
from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.data.scene.model import SyntheticScene

# class, center (3), dimensions (3), yaw, confidence, truncation, occlusion, alpha, has_bbox, bbox (4)
BOX_COLUMNS = 17


def boxes_to_array(labels: SoftLabelSet) -> np.ndarray:
    rows = []
    for box in labels:
        bbox = box.bbox_2d if box.bbox_2d is not None else (0.0, 0.0, 0.0, 0.0)
        rows.append([box.object_class.index, *box.center, *box.dimensions, box.yaw, box.confidence,
                     box.truncation, box.occlusion, box.alpha, float(box.bbox_2d is not None), *bbox])
    return np.array(rows, dtype=np.float64).reshape(-1, BOX_COLUMNS)


def boxes_from_array(frame_id: int, array: np.ndarray) -> SoftLabelSet:
    classes = list(ObjectClass)
    boxes: List[DetectionBox] = []
    for row in array:
        boxes.append(DetectionBox(
            object_class=classes[int(row[0])],
            center=tuple(float(v) for v in row[1:4]),
            dimensions=tuple(float(v) for v in row[4:7]),
            yaw=float(row[7]),
            confidence=float(row[8]),
            truncation=float(row[9]),
            occlusion=int(row[10]),
            alpha=float(row[11]),
            bbox_2d=tuple(float(v) for v in row[13:17]) if row[12] else None,
        ))
    return SoftLabelSet(frame_id, boxes)


class SceneHandler(DataHandler[SyntheticScene]):
    """Scene archives are numpy .npz files holding every array of the scene at full precision."""
    @classmethod
    def deserialize(cls, data: bytes, **kwargs) -> SyntheticScene:
        try:
            archive = np.load(io.BytesIO(data), allow_pickle=False)
        except (OSError, ValueError) as err:
            raise ValueError(f"Not a scene archive: {err}") from err
        with archive:
            missing = {'frame_id', 'seed', 'boxes', 'points', 'point_channels', 'box_index', 'k', 'rt',
                       'image', 'ground_y'} - set(archive.files)
            if missing:
                raise ValueError(f"Scene archive lacks {sorted(missing)}.")
            frame_id = int(archive['frame_id'])
            return SyntheticScene(
                frame_id=frame_id,
                seed=int(archive['seed']),
                labels=boxes_from_array(frame_id, archive['boxes']),
                points=archive['points'],
                point_channels=archive['point_channels'],
                box_index=archive['box_index'],
                camera=CameraModel(archive['k'], archive['rt']),
                image=archive['image'],
                ground_y=float(archive['ground_y']),
            )

    @classmethod
    def serialize(cls, data: SyntheticScene, **kwargs) -> bytes:
        buffer = io.BytesIO()
        np.savez(
            buffer,
            frame_id=np.int64(data.frame_id),
            seed=np.uint64(data.seed),
            boxes=boxes_to_array(data.labels),
            points=data.points,
            point_channels=data.point_channels,
            box_index=data.box_index.astype(np.int64),
            k=data.camera.k,
            rt=data.camera.rt,
            image=data.image,
            ground_y=np.float64(data.ground_y),
        )
        return buffer.getvalue()
