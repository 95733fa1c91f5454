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

"""
Synthetic frames: non-overlapping boxes on a ground plane, a LiDAR-like cloud sampled on
the ground and on box surfaces, and the small image the student sees.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from monosim.common.util import derive_seed, seeded_rng
from monosim.data.camera.model import CameraModel
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import DetectionBox, ObjectClass, SoftLabelSet
from monosim.data.scene.model import GROUND, SyntheticScene
from monosim.evaluation.iou import bev_iou_matrix
from monosim.simulation.render import PointFeatureSet, render_points

logger = logging.getLogger(__name__)

# Boxes keep at least this much free space between their footprints (meters)
BOX_SPACING = 0.5
# Yaw of generated boxes is drawn from [-MAX_YAW, MAX_YAW]
MAX_YAW = np.pi / 12
# Relative spread of generated box dimensions around the class means
DIMENSION_SPREAD = 0.1
# Ground points extend this far beyond the placement area (meters)
GROUND_MARGIN = 2.0
# Ground points never come closer to the camera than this (meters)
GROUND_MIN_DEPTH = 1.0
# Depth channel of the student image is divided by this (meters)
DEPTH_SCALE = 30.0
# Intensity of a surface facing straight up; vertical surfaces get INTENSITY_BASE
INTENSITY_BASE = 0.3


class SceneGenerationError(ValueError):
    pass


def scene_camera(config: HarnessConfig) -> CameraModel:
    """Camera at the origin looking along +z; the ground is the plane y = camera_height."""
    return CameraModel.from_intrinsics(config.focal_length, config.focal_length,
                                       config.image_width / 2, config.image_height / 2)


def draw_class(rng: np.random.Generator, config: HarnessConfig) -> ObjectClass:
    u = rng.uniform()
    if u < config.car_probability:
        return ObjectClass.CAR
    if u < config.car_probability + config.pedestrian_probability:
        return ObjectClass.PEDESTRIAN
    return ObjectClass.CYCLIST


def _spaced_rectangle(box: DetectionBox) -> np.ndarray:
    x0, z0, x1, z1 = box.bev_rectangle()
    half = BOX_SPACING / 2
    return np.array([x0 - half, z0 - half, x1 + half, z1 + half])


def place_boxes(rng: np.random.Generator, count: int, config: HarnessConfig) -> List[DetectionBox]:
    """
    Places count boxes uniformly in the area so that their BEV footprints (plus spacing)
    never overlap. Raises SceneGenerationError after placement_retries failed attempts for one box.
    """
    boxes: List[DetectionBox] = []
    rects = np.zeros((0, 4))
    for n in range(count):
        for _ in range(config.placement_retries):
            cls = draw_class(rng, config)
            dims = np.array(cls.mean_dimensions) * rng.uniform(1 - DIMENSION_SPREAD, 1 + DIMENSION_SPREAD, 3)
            x = rng.uniform(config.area_x_min, config.area_x_max)
            z = rng.uniform(config.area_z_min, config.area_z_max)
            yaw = rng.uniform(-MAX_YAW, MAX_YAW)
            box = DetectionBox(cls, (x, config.camera_height, z), tuple(float(d) for d in dims), yaw,
                               alpha=float(yaw - np.arctan2(x, z)))
            rect = _spaced_rectangle(box)
            if len(rects) == 0 or not np.any(bev_iou_matrix(rect, rects) > 0):
                boxes.append(box)
                rects = np.vstack([rects, rect])
                break
        else:
            raise SceneGenerationError(
                f"Could not place box {n + 1} of {count} in the area after {config.placement_retries} attempts."
            )
    return boxes


def sample_box_surface(rng: np.random.Generator, box: DetectionBox, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    count points on the top and the four sides of the box, uniform by area.
    Returns (N x 3 camera-frame points, N upward normal components).
    """
    h, w, l = box.dimensions
    # top, front (+x), back (-x), left (+z), right (-z)
    areas = np.array([l * w, h * w, h * w, h * l, h * l])
    face = rng.choice(5, size=count, p=areas / areas.sum())
    lx = rng.uniform(-l / 2, l / 2, count)
    ly = rng.uniform(-h, 0.0, count)
    lz = rng.uniform(-w / 2, w / 2, count)
    ly[face == 0] = -h
    lx[face == 1] = l / 2
    lx[face == 2] = -l / 2
    lz[face == 3] = w / 2
    lz[face == 4] = -w / 2
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    local = np.stack([c * lx + s * lz, ly, -s * lx + c * lz], axis=1)
    normal_up = (face == 0).astype(np.float64)
    return local + np.array(box.center), normal_up


def sample_ground(rng: np.random.Generator, count: int, config: HarnessConfig) -> np.ndarray:
    x = rng.uniform(config.area_x_min - GROUND_MARGIN, config.area_x_max + GROUND_MARGIN, count)
    z = rng.uniform(max(GROUND_MIN_DEPTH, config.area_z_min - GROUND_MARGIN), config.area_z_max + GROUND_MARGIN,
                    count)
    return np.stack([x, np.full(count, config.camera_height), z], axis=1)


def project_box_2d(box: DetectionBox, camera: CameraModel, width: int, height: int) \
        -> Optional[Tuple[float, float, float, float]]:
    """Image rectangle of the projected corners, clipped to the image. None if no corner is in front."""
    cam = camera.world_to_camera(box.corners())
    front = cam[:, 2] > 0
    if not np.any(front):
        return None
    u = camera.fx * cam[front, 0] / cam[front, 2] + camera.cx
    v = camera.fy * cam[front, 1] / cam[front, 2] + camera.cy
    left, right = float(np.clip(u.min(), 0, width - 1)), float(np.clip(u.max(), 0, width - 1))
    top, bottom = float(np.clip(v.min(), 0, height - 1)), float(np.clip(v.max(), 0, height - 1))
    return left, top, right, bottom


def render_student_image(points: np.ndarray, normal_up: np.ndarray, membership: np.ndarray,
                         camera: CameraModel, height: int, width: int) -> np.ndarray:
    """Depth (scaled), intensity and semantic channels of the nearest point per pixel."""
    depth = camera.world_to_camera(points)[:, 2] / DEPTH_SCALE
    intensity = INTENSITY_BASE + (1 - INTENSITY_BASE) * normal_up
    features = np.stack([depth, intensity, membership], axis=1)
    return render_points(PointFeatureSet(features, points), camera, height, width)


def generate_scene(seed: int, config: HarnessConfig, frame_id=0) -> SyntheticScene:
    """Deterministic for a given seed and config."""
    rng = seeded_rng(seed)
    count = int(rng.integers(config.min_boxes, config.max_boxes + 1))
    camera = scene_camera(config)
    boxes = place_boxes(rng, count, config)
    boxes = [DetectionBox(b.object_class, b.center, b.dimensions, b.yaw,
                          bbox_2d=project_box_2d(b, camera, config.image_width, config.image_height),
                          alpha=b.alpha)
             for b in boxes]

    ground = sample_ground(rng, config.ground_points, config)
    for box in boxes:
        ground = ground[~box.contains(ground)]
    parts = [ground]
    normals = [np.ones(len(ground))]
    owner = [np.full(len(ground), GROUND, dtype=np.int64)]
    for i, box in enumerate(boxes):
        surface, normal_up = sample_box_surface(rng, box, config.points_per_box)
        parts.append(surface)
        normals.append(normal_up)
        owner.append(np.full(len(surface), i, dtype=np.int64))
    points = np.concatenate(parts)
    normal_up = np.concatenate(normals)
    box_index = np.concatenate(owner)
    membership = (box_index != GROUND).astype(np.float64)
    height = config.camera_height - points[:, 1]
    point_channels = np.stack([height, normal_up, membership], axis=1)

    image = render_student_image(points, normal_up, membership, camera, config.image_height, config.image_width)
    logger.debug(f"Scene {frame_id} (seed {seed}): {count} boxes, {len(points)} points.")
    return SyntheticScene(frame_id, seed, SoftLabelSet(frame_id, boxes), points, point_channels, box_index,
                          camera, image, config.camera_height)


def generate_scenes(seed: int, count: int, config: HarnessConfig, first_frame=0) -> List[SyntheticScene]:
    return [generate_scene(derive_seed(seed, i), config, first_frame + i) for i in range(count)]
