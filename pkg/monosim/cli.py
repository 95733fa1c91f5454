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

"""The monosim command line."""

import argparse
import csv
import glob
import io
import logging
import os
import sys
from typing import List, Optional

from tqdm import tqdm

from monosim.common.image import map_to_pil, mask_to_pil, upscale
from monosim.common.types.file_types import FileType
from monosim.common.util import format_real
from monosim.data.config.model import HarnessConfig
from monosim.data.kitti_label.model import ObjectClass
from monosim.evaluation.average_precision import RecallSet
from monosim.evaluation.report import ApReportWriter
from monosim.harness.ablation import AblationWriter, THRESHOLD_GRID, run_ablation, summarize, sweep_thresholds
from monosim.harness.evaluate import evaluate
from monosim.harness.grad_suite import run_gradient_suite
from monosim.harness.scene_generator import generate_scenes
from monosim.harness.student import StudentModel
from monosim.harness.teacher import AnalyticTeacher, teacher_forward
from monosim.harness.trainer import MetricsWriter, Trainer
from monosim.simulation.render import compute_validity_mask, render_points
from monosim.simulation.response import ThresholdPolicy, confidence_histogram, filter_soft_labels, sample_counts

logger = logging.getLogger('monosim')

SCENES_DIR = 'scenes'
LABELS_DIR = 'label_2'
TEACHER_DIR = 'teacher'
CALIB_DIR = 'calib'
# Debug PNGs are upscaled by this factor
PNG_SCALE = 8


def _load_config(path: Optional[str]) -> HarnessConfig:
    return FileType.CONFIG.load(path) if path else HarnessConfig()


def _write(path: Optional[str], data: bytes):
    if path is None:
        sys.stdout.write(data.decode('utf-8'))
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(data)


def _scene_paths(path: str) -> List[str]:
    if os.path.isdir(path):
        nested = os.path.join(path, SCENES_DIR)
        directory = nested if os.path.isdir(nested) else path
        return sorted(glob.glob(os.path.join(directory, '*.npz')))
    return [path]


def gen_scenes(args) -> int:
    config = _load_config(args.config)
    scenes = generate_scenes(args.seed, args.count, config)
    teacher = AnalyticTeacher(config)
    for sub in (SCENES_DIR, LABELS_DIR, TEACHER_DIR, CALIB_DIR):
        os.makedirs(os.path.join(args.out_dir, sub), exist_ok=True)
    for scene in tqdm(scenes, desc='scenes'):
        FileType.SCENE.save(scene, os.path.join(args.out_dir, SCENES_DIR, scene.file_name()))
        FileType.KITTI_LABEL.save(scene.labels, os.path.join(args.out_dir, LABELS_DIR, scene.labels.file_name()),
                                  include_score=False)
        predictions = teacher_forward(teacher, scene).predictions
        FileType.KITTI_LABEL.save(predictions, os.path.join(args.out_dir, TEACHER_DIR, predictions.file_name()))
        FileType.CAMERA.save(scene.camera, os.path.join(args.out_dir, CALIB_DIR, scene.labels.file_name()))
    logger.info(f"Wrote {len(scenes)} scenes to {args.out_dir}.")
    return 0


def train(args) -> int:
    config = _load_config(args.config)
    trainer = Trainer(config, args.seed)
    checksum = trainer.teacher.checksum()
    reports = trainer.run(args.steps, lambda steps: tqdm(steps, desc='train'))
    if trainer.teacher.checksum() != checksum:
        raise RuntimeError("The teacher changed during training.")
    if reports:
        first, last = reports[0], reports[-1]
        logger.info(f"L_scene {first.scene:.6f} -> {last.scene:.6f}, L_RoI {first.roi:.6f} -> {last.roi:.6f}, "
                    f"L_response {first.response:.6f} -> {last.response:.6f}")
    if args.metrics_csv:
        _write(args.metrics_csv, MetricsWriter(reports).write())
    if args.out_checkpoint:
        _write(args.out_checkpoint, FileType.CHECKPOINT.serialize(trainer.student.to_checkpoint(trainer.step_count)))
        logger.info(f"Saved checkpoint to {args.out_checkpoint}.")
    return 0


def evaluate_checkpoint(args) -> int:
    student = StudentModel.from_checkpoint(FileType.CHECKPOINT.load(args.checkpoint))
    scenes = [FileType.SCENE.load(p) for p in _scene_paths(args.scenes)]
    if not scenes:
        raise ValueError(f"No scenes found at {args.scenes}.")
    if args.recall_set == 'both':
        recall_sets = [RecallSet.R11, RecallSet.R40]
    else:
        recall_sets = [RecallSet.parse(args.recall_set)]
    rows = evaluate(student, scenes, args.iou, recall_sets)
    _write(args.out_csv, ApReportWriter(rows).write())
    return 0


def filter_labels(args) -> int:
    policy = ThresholdPolicy({
        ObjectClass.CAR: args.car_threshold,
        ObjectClass.PEDESTRIAN: args.ped_threshold,
        ObjectClass.CYCLIST: args.cyc_threshold,
    })
    os.makedirs(args.out_dir, exist_ok=True)
    paths = sorted(glob.glob(os.path.join(args.in_dir, '*.txt')))
    kept = total = 0
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        labels = FileType.KITTI_LABEL.load(path, frame_id=int(stem) if stem.isdigit() else 0)
        filtered = filter_soft_labels(labels, policy)
        total += len(labels)
        kept += len(filtered)
        FileType.KITTI_LABEL.save(filtered, os.path.join(args.out_dir, os.path.basename(path)))
    logger.info(f"Kept {kept} of {total} boxes in {len(paths)} files.")
    return 0


def render_debug(args) -> int:
    config = _load_config(args.config)
    scene = FileType.SCENE.load(args.scene)
    output = teacher_forward(AnalyticTeacher(config), scene)
    rendered = render_points(output.scene_points, scene.camera.scaled(config.image_scale),
                             config.scene_feature_height, config.scene_feature_width)
    mask = compute_validity_mask(rendered)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['row', 'col', 'mask'] + [f'f{c}' for c in range(rendered.shape[0])])
    for r in range(rendered.shape[1]):
        for c in range(rendered.shape[2]):
            writer.writerow([r, c, int(mask[r, c])] + [format_real(v) for v in rendered[:, r, c]])
    _write(args.out, buffer.getvalue().encode('utf-8'))
    stem = os.path.splitext(args.out)[0]
    upscale(mask_to_pil(mask), PNG_SCALE).save(f'{stem}_mask.png')
    upscale(map_to_pil(rendered.sum(axis=0)), PNG_SCALE).save(f'{stem}_sum.png')
    logger.info(f"{int(mask.sum())} of {mask.size} pixels hold teacher features.")
    return 0


def check_grads(args) -> int:
    reports = run_gradient_suite(args.seed)
    for report in reports:
        print(f"{report.name:20s} {'pass' if report.passed else 'FAIL'}  max relative error "
              f"{report.max_relative_error:.3e}")
        for input_report in report.inputs:
            for failure in input_report.failures[:5]:
                print(f"    {failure}")
    return 0 if all(r.passed for r in reports) else 1


def ablate(args) -> int:
    config = _load_config(args.config)
    results = run_ablation(config, list(range(args.seeds)), args.steps, args.eval_scenes, args.iou,
                           wrap=lambda steps: tqdm(steps, desc='train', leave=False))
    for name, (r11, r40) in summarize(results).items():
        print(f"{name:12s} AP|R11 {format_real(r11, 4)}  AP|R40 {format_real(r40, 4)}")
    if args.out_csv:
        _write(args.out_csv, AblationWriter(results).write())
    return 0


def sweep(args) -> int:
    config = _load_config(args.config)
    scenes = generate_scenes(args.seed, args.count, config)
    teacher = AnalyticTeacher(config)
    predictions = [teacher_forward(teacher, s).predictions for s in scenes]
    classes = list(ObjectClass)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['threshold', 'total'] + [c.value for c in classes])
    for threshold, counts in sweep_thresholds(predictions, THRESHOLD_GRID):
        writer.writerow([format_real(threshold, 2), sum(counts.values())] + [counts[c] for c in classes])
    _write(args.out_csv, buffer.getvalue().encode('utf-8'))

    policy = ThresholdPolicy(config.thresholds)
    filtered = [filter_soft_labels(p, policy) for p in predictions]
    for c, (gt, soft) in sample_counts([s.labels for s in scenes], filtered).items():
        logger.info(f"{c}: {gt} ground-truth samples, {soft} soft-label samples")

    if args.histogram_csv:
        histogram = confidence_histogram(predictions, args.bins)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['class', 'bin_low', 'bin_high', 'count'])
        for c in classes:
            for i, count in enumerate(histogram[c]):
                writer.writerow([c.value, format_real(i / args.bins, 4), format_real((i + 1) / args.bins, 4),
                                 int(count)])
        _write(args.histogram_csv, buffer.getvalue().encode('utf-8'))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='monosim', description="Toy harness for simulating a point-cloud "
                                                                 "teacher with a monocular student.")
    parser.add_argument('-v', '--verbose', action='store_true', help='log at DEBUG level')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('gen-scenes', help='generate synthetic scenes, labels and teacher predictions')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--count', type=int, default=8)
    p.add_argument('--out-dir', required=True)
    p.add_argument('--config')
    p.set_defaults(func=gen_scenes)

    p = commands.add_parser('train', help='train the student')
    p.add_argument('--config')
    p.add_argument('--steps', type=int, default=500)
    p.add_argument('--seed', type=int, default=None, help='defaults to the seed of the config')
    p.add_argument('--out-checkpoint')
    p.add_argument('--metrics-csv')
    p.set_defaults(func=train)

    p = commands.add_parser('eval', help='evaluate a checkpoint on scene archives')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--scenes', required=True, help='a scene archive or a directory of them')
    p.add_argument('--iou', type=float, nargs='+', default=[0.5, 0.7])
    p.add_argument('--recall-set', choices=['R11', 'R40', 'both'], default='R40')
    p.add_argument('--out-csv', help='defaults to stdout')
    p.set_defaults(func=evaluate_checkpoint)

    p = commands.add_parser('filter-labels', help='filter KITTI prediction files into soft labels')
    p.add_argument('--in-dir', required=True)
    p.add_argument('--out-dir', required=True)
    p.add_argument('--car-threshold', type=float, default=0.7)
    p.add_argument('--ped-threshold', type=float, default=0.0)
    p.add_argument('--cyc-threshold', type=float, default=0.0)
    p.set_defaults(func=filter_labels)

    p = commands.add_parser('render-debug', help='write the rendered teacher scene features and mask')
    p.add_argument('--scene', required=True)
    p.add_argument('--out', required=True, help='CSV path; PNGs are written next to it')
    p.add_argument('--config')
    p.set_defaults(func=render_debug)

    p = commands.add_parser('check-grads', help='run the finite-difference gradient suite')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=check_grads)

    p = commands.add_parser('ablate', help='train every loss configuration over several seeds')
    p.add_argument('--config')
    p.add_argument('--seeds', type=int, default=5)
    p.add_argument('--steps', type=int, default=500)
    p.add_argument('--eval-scenes', type=int, default=8)
    p.add_argument('--iou', type=float, default=0.5)
    p.add_argument('--out-csv')
    p.set_defaults(func=ablate)

    p = commands.add_parser('sweep-thresholds', help='kept teacher predictions per confidence threshold')
    p.add_argument('--config')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--count', type=int, default=100)
    p.add_argument('--bins', type=int, default=10)
    p.add_argument('--out-csv', help='defaults to stdout')
    p.add_argument('--histogram-csv')
    p.set_defaults(func=sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.func(args)
    except ValueError as err:
        logger.error(str(err))
        return 2


if __name__ == '__main__':
    sys.exit(main())
