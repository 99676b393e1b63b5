#!/usr/bin/env python3

# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Runs the dataset, train and guide pipeline twice and compares the outputs byte for byte."""

import argparse
import filecmp
import json
import logging
import os
import shutil
import sys
import tempfile

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))

from laban_guide.cli import main as laban_guide_main
from laban_guide.util import configure_logging


COMPARED_FILES = [
    'dataset.jsonl',
    'dataset.meta.json',
    'training_loss.csv',
    'baseline.json',
    'guided.json',
    'loss_trace.csv',
    'comparison.csv',
    'manifest.json'
]


def run_pipeline(out_dir, seed=0, iterations=50, tags='strong,far'):
    common = [
        '--out', out_dir,
        '--dataset', os.path.join(out_dir, 'dataset.jsonl'),
        '--checkpoint', os.path.join(out_dir, 'denoiser.pt'),
        '--seed', str(seed),
        '--frames', '12',
        '--per-condition', '4',
        '--iterations', str(iterations),
        '--steps', '50',
        '--stride', '5']
    for command in (['dataset'], ['train'], ['guide', '--tags', tags]):
        code = laban_guide_main(command + common)
        if code != 0:
            raise RuntimeError('%s exited with %d' % (command[0], code))


def compare_runs(seed=0, iterations=50, tags='strong,far'):
    """Names of the files that differ between two identical runs."""
    root = tempfile.mkdtemp(prefix='laban_guide_repeat_')
    try:
        first, second = os.path.join(root, 'first'), os.path.join(root, 'second')
        run_pipeline(first, seed, iterations, tags)
        run_pipeline(second, seed, iterations, tags)
        differing = []
        for name in COMPARED_FILES:
            a, b = os.path.join(first, name), os.path.join(second, name)
            if not filecmp.cmp(a, b, shallow=False):
                if name == 'manifest.json':
                    # Paths inside the manifest name their own run folder.
                    if _manifest_without_paths(a) == _manifest_without_paths(b):
                        continue
                differing.append(name)
        return differing
    finally:
        shutil.rmtree(root, ignore_errors=True)


def _manifest_without_paths(filename):
    with open(filename) as fd:
        manifest = json.load(fd)
    for key in ('DatasetPath', 'CheckpointPath', 'OutputDir'):
        manifest['config'].pop(key, None)
    return manifest


def test_guided_pipeline_is_repeatable():
    assert compare_runs() == []


def main():
    argparser = argparse.ArgumentParser(description=__doc__)
    argparser.add_argument(
        '-v', '--verbose',
        action='store_true',
        dest='debug',
        help='print debug information')
    argparser.add_argument(
        '--log',
        metavar='LOG_FILE',
        default=None,
        help='print output to file')
    argparser.add_argument(
        '--seed',
        metavar='N',
        default=0,
        type=int,
        help='master seed of both runs (default: 0)')
    argparser.add_argument(
        '--iterations',
        metavar='N',
        default=50,
        type=int,
        help='training iterations per run (default: 50)')
    argparser.add_argument(
        '--tags',
        default='strong,far',
        help='guidance tags (default: strong,far)')

    args = argparser.parse_args()

    configure_logging(args.debug, args.log)

    differing = compare_runs(args.seed, args.iterations, args.tags)
    if differing:
        logging.error('runs differ in %s', ', '.join(differing))
        return 1
    logging.info('both runs are byte-identical')
    return 0


if __name__ == '__main__':

    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print('\nCancelled by user. Bye!')
