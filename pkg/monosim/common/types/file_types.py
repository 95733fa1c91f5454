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

from monosim.data.camera.handler import CameraHandler
from monosim.data.checkpoint.handler import CheckpointHandler
from monosim.data.config.handler import ConfigHandler
from monosim.data.kitti_label.handler import KittiLabelHandler
from monosim.data.scene.handler import SceneHandler


class FileType:
    """A list of supported file types. Values are their data handlers."""
    UNKNOWN = None
    CAMERA = CameraHandler
    CHECKPOINT = CheckpointHandler
    CONFIG = ConfigHandler
    KITTI_LABEL = KittiLabelHandler
    SCENE = SceneHandler
