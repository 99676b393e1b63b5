# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import csv
import itertools
import json
import logging

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from ..errors import DegenerateBaselineError, DimensionError, MotionError, UndefinedMetricError
from ..kinematics import SmoothingConfig
from ..laban import CHANNELS, laban_series
from ..util import atomic_write


DEGENERATE_FLOOR = 1e-8


# Mean relative-change matrices of the published controllability study,
# rows and columns ordered weight, time, flow, shape.
PUBLISHED_MATRICES = {
    'prompt-editing': [
        [0.791, 0.394, 0.272, 0.246],
        [0.235, 0.065, 0.005, 0.017],
        [0.055, -0.101, -0.117, -0.005],
        [0.620, 0.265, 0.175, 0.180]],
    'raw-frame': [
        [3.084, 0.539, -0.003, 0.209],
        [-0.085, 0.179, 0.018, -0.040],
        [0.011, 0.044, 0.476, 0.014],
        [-0.023, -0.018, -0.000, 1.606]],
    'classifier': [
        [0.510, 0.232, 0.150, 0.072],
        [0.048, 0.047, 0.044, 0.011],
        [0.040, 0.039, 0.043, 0.009],
        [0.030, 0.016, 0.017, 0.322]],
    'laban': [
        [3.081, 0.323, 0.023, 0.163],
        [0.357, 0.418, 0.081, 0.098],
        [0.065, 0.029, 0.379, -0.032],
        [-0.044, -0.040, -0.012, 1.613]]
}


def published_matrices():
    return dict((name, numpy.array(rows)) for name, rows in PUBLISHED_MATRICES.items())


def relative_change(f_small, f_large, floor=DEGENERATE_FLOOR):
    """(f_large - f_small) / f_small per component."""
    f_small = numpy.asarray(f_small, dtype=numpy.float64)
    f_large = numpy.asarray(f_large, dtype=numpy.float64)
    if f_small.shape != f_large.shape:
        raise DimensionError('scalar shapes differ: %s vs %s' % (f_small.shape, f_large.shape))
    if numpy.any(f_small < floor):
        raise DegenerateBaselineError('reference components %s fall below %g' % (
            [CHANNELS[i] for i in numpy.flatnonzero(f_small < floor)], floor))
    return (f_large - f_small) / f_small


def diagonality(matrix):
    """Share of the squared mass of a square matrix that sits on its diagonal."""
    matrix = numpy.asarray(matrix, dtype=numpy.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError('diagonality needs a square matrix, got shape %s' % (matrix.shape,))
    total = float((matrix ** 2).sum())
    if total == 0.0:
        raise UndefinedMetricError('diagonality of a zero matrix is undefined')
    return float((numpy.diag(matrix) ** 2).sum()) / total


def diversity_proxy(motions):
    """Mean pairwise Euclidean distance between flattened motions."""
    motions = list(motions)
    if len(motions) < 2:
        raise MotionError('diversity needs at least two motions, got %d' % len(motions))
    flat = [m.flatten() for m in motions]
    if len(set(f.shape for f in flat)) != 1:
        raise DimensionError('motions have different shapes')
    distances = [numpy.linalg.norm(a - b) for a, b in itertools.combinations(flat, 2)]
    return float(numpy.mean(distances))


class ChangeMatrix(object):
    """
    Mean and standard deviation of the relative change of every channel
    (columns) when one channel is targeted (rows).
    """

    def __init__(self, mean, std, n_runs, row_runs=None, skipped=0):
        self.mean = numpy.asarray(mean, dtype=numpy.float64)
        self.std = numpy.asarray(std, dtype=numpy.float64)
        if self.mean.shape != (4, 4) or self.std.shape != (4, 4):
            raise DimensionError('change matrices are 4 x 4')
        if n_runs < 1:
            raise DimensionError('a change matrix needs at least one run')
        self.n_runs = int(n_runs)
        self.row_runs = [int(n) for n in (row_runs if row_runs is not None else [n_runs] * 4)]
        self.skipped = int(skipped)

    @classmethod
    def from_changes(cls, rows, skipped=0):
        """`rows` holds, per targeted channel, a list of 4-vectors of relative change."""
        mean = numpy.zeros((4, 4))
        std = numpy.zeros((4, 4))
        row_runs = []
        for index, changes in enumerate(rows):
            row_runs.append(len(changes))
            if not changes:
                logging.warning('no usable runs for the %s row', CHANNELS[index])
                continue
            changes = numpy.array(changes)
            mean[index] = changes.mean(axis=0)
            std[index] = changes.std(axis=0)
        return cls(mean, std, sum(row_runs), row_runs, skipped)

    @property
    def single_run_rows(self):
        return [CHANNELS[i] for i, n in enumerate(self.row_runs) if n == 1]

    def diagonality(self):
        return diagonality(self.mean)

    def write_csv(self, filename):
        with atomic_write(filename) as fd:
            writer = csv.writer(fd, lineterminator='\n')
            writer.writerow(['row'] + ['%s_mean' % c for c in CHANNELS] + ['%s_std' % c for c in CHANNELS])
            for index, channel in enumerate(CHANNELS):
                writer.writerow([channel] + [repr(float(v)) for v in self.mean[index]]
                                + [repr(float(v)) for v in self.std[index]])

    def to_json(self):
        return {
            'matrix_mean': self.mean.tolist(),
            'matrix_std': self.std.tolist(),
            'n_runs': self.n_runs,
            'row_runs': self.row_runs,
            'skipped': self.skipped,
            'single_run_rows': self.single_run_rows,
            'diagonality': self.diagonality()
        }

    def __str__(self):
        lines = ['%-8s' % '' + ''.join('%12s' % c for c in CHANNELS)]
        for index, channel in enumerate(CHANNELS):
            lines.append('%-8s' % channel + ''.join(
                '%12.4f' % v for v in self.mean[index]))
        return '\n'.join(lines)


def read_change_matrix_csv(filename):
    """Mean matrix back from a CSV written by ChangeMatrix.write_csv."""
    with open(filename) as fd:
        rows = list(csv.DictReader(fd))
    return numpy.array([[float(row['%s_mean' % c]) for c in CHANNELS] for row in rows])


def peak_ratios(tc_series, fc_series, floor=DEGENERATE_FLOOR):
    """max-over-time of each guided channel divided by the baseline's; None when the baseline peak is degenerate."""
    ratios = {}
    for index, channel in enumerate(CHANNELS):
        tc_peak = float(tc_series.values[:, index].max())
        fc_peak = float(fc_series.values[:, index].max())
        ratios[channel] = fc_peak / tc_peak if tc_peak >= floor else None
    return ratios


def compare_tc_fc(baseline, guided, effectors, smoothing=None, filename=None):
    """
    Laban series of a baseline (text-conditioned) motion and its guided
    counterpart, side by side. Writes `frame,channel,tc_value,fc_value` rows
    when `filename` is given and returns the per-channel peak ratios.
    """
    if baseline.n_frames != guided.n_frames:
        raise DimensionError('baseline has %d frames, guided motion %d' % (
            baseline.n_frames, guided.n_frames))
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    tc = laban_series(baseline, effectors, smoothing)
    fc = laban_series(guided, effectors, smoothing)
    if filename is not None:
        with atomic_write(filename) as fd:
            writer = csv.writer(fd, lineterminator='\n')
            writer.writerow(('frame', 'channel', 'tc_value', 'fc_value'))
            for frame in range(tc.n_frames):
                for index, channel in enumerate(CHANNELS):
                    writer.writerow([frame, channel, repr(float(tc.values[frame, index])),
                                     repr(float(fc.values[frame, index]))])
    return peak_ratios(tc, fc)


def write_report(report, filename):
    with atomic_write(filename) as fd:
        json.dump(report, fd, sort_keys=True, indent=2)
        fd.write('\n')
