# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""
Differentiable Laban Effort and Shape features.

A motion maps to a T x 4 series [Weight, Time, Flow, Shape]:

  Weight E_t = sum over end effectors of |v|^2
  Time   A_t = sum over end effectors of |a|
  Flow   J_t = sum over end effectors of |j|
  Shape  V_t = volume of the axis-aligned bounding box of all joints

Positions are Gaussian-smoothed before differencing. Norms are softened as
sqrt(|x|^2 + eps) - sqrt(eps), which is zero at rest and smooth everywhere.
"""

import csv
import math

from collections import namedtuple

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from .errors import ConfigError, DimensionError
from .kinematics import SmoothingConfig, finite_differences, smooth_positions
from .util import atomic_write


CHANNELS = ('weight', 'time', 'flow', 'shape')

NORM_EPSILON = 1e-12

LabanScalars = namedtuple('LabanScalars', 'weight time flow shape')


class LabanSeries(object):
    """Per-frame feature series, T x 4, channels ordered as CHANNELS."""

    def __init__(self, values):
        values = numpy.array(values, dtype=numpy.float64)
        if values.ndim != 2 or values.shape[1] != len(CHANNELS):
            raise DimensionError('Laban series must be T x 4, got shape %s' % (values.shape,))
        if values.shape[0] < 1:
            raise DimensionError('Laban series is empty')
        values.setflags(write=False)
        self.values = values

    @property
    def n_frames(self):
        return self.values.shape[0]

    def channel(self, name):
        return self.values[:, CHANNELS.index(name)]

    def save_to_disk(self, filename):
        write_series_csv(self, filename)

    def __eq__(self, other):
        return isinstance(other, LabanSeries) and numpy.array_equal(self.values, other.values)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __len__(self):
        return self.n_frames

    def __repr__(self):
        return 'LabanSeries(%d frames)' % self.n_frames


def soft_norm(vectors):
    """Norm over the last axis, softened so it is differentiable at zero."""
    return torch.sqrt((vectors * vectors).sum(dim=-1) + NORM_EPSILON) - math.sqrt(NORM_EPSILON)


def bounding_box_volume(positions):
    """
    Per-frame volume of the axis-aligned box around all joints of a T x J x 3
    tensor. Gradients flow to the single extremal joint per axis; ties go to
    the lowest joint index.
    """
    upper_index = torch.argmax(positions, dim=1, keepdim=True)
    lower_index = torch.argmin(positions, dim=1, keepdim=True)
    upper = torch.gather(positions, 1, upper_index).squeeze(1)
    lower = torch.gather(positions, 1, lower_index).squeeze(1)
    extent = upper - lower
    return extent[:, 0] * extent[:, 1] * extent[:, 2]


def laban_features(positions, effector_indices, smoothing):
    """T x 4 feature tensor of a T x J x 3 position tensor (differentiable)."""
    smoothed = smooth_positions(positions, smoothing)
    velocity, acceleration, jerk = finite_differences(smoothed)
    index = torch.as_tensor(list(effector_indices), dtype=torch.long)
    weight = (velocity[:, index] ** 2).sum(dim=(1, 2))
    time = soft_norm(acceleration[:, index]).sum(dim=1)
    flow = soft_norm(jerk[:, index]).sum(dim=1)
    # Volume is taken on the smoothed skeleton, like the derivatives.
    shape = bounding_box_volume(smoothed)
    return torch.stack([weight, time, flow, shape], dim=1)


def _check_effectors(motion, effectors):
    effectors.validate(motion.n_joints)
    return effectors


def laban_series(motion, effectors, smoothing=None):
    """LabanSeries of a Motion, smoothing positions per `smoothing` (default filter if None)."""
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    _check_effectors(motion, effectors)
    with torch.no_grad():
        values = laban_features(torch.tensor(motion.positions), effectors.indices, smoothing)
    return LabanSeries(values.numpy())


def laban_scalars(series):
    """Max over frames of each channel, the classic Laban component values."""
    if series.n_frames < 1:
        raise DimensionError('cannot take scalars of an empty series')
    return LabanScalars(*[float(v) for v in series.values.max(axis=0)])


def _check_shapes(candidate, target, baseline):
    shapes = set(numpy.shape(s) for s in (candidate, target, baseline))
    if len(shapes) != 1:
        raise DimensionError('Laban series shapes differ: %s' % sorted(shapes))


def relative_residual_loss(candidate, target, baseline, delta):
    """Sum of squared ((candidate - target) / (baseline + delta)); works on tensors."""
    residual = (candidate - target) / (baseline + delta)
    return (residual * residual).sum()


def series_data(series):
    """The raw values of a LabanSeries; arrays and tensors pass through."""
    return series.values if isinstance(series, LabanSeries) else series


def laban_loss(candidate, target, baseline, delta=1e-6):
    """Squared Frobenius norm of the relative residual between two series."""
    if not delta > 0.0:
        raise ConfigError('delta must be positive, got %r' % (delta,))
    values = [series_data(s) for s in (candidate, target, baseline)]
    values = [v.detach().numpy() if isinstance(v, torch.Tensor) else v for v in values]
    _check_shapes(*values)
    candidate, target, baseline = [numpy.asarray(v, dtype=numpy.float64) for v in values]
    return float(relative_residual_loss(candidate, target, baseline, delta))


def _series_tensor(series, dtype):
    values = series_data(series)
    if isinstance(values, torch.Tensor):
        return values.to(dtype)
    return torch.tensor(numpy.asarray(values, dtype=numpy.float64), dtype=dtype)


def laban_loss_torch(positions, target, baseline, effectors, smoothing, delta):
    """Laban loss of a position tensor, kept on the autograd graph."""
    features = laban_features(positions, effectors.indices, smoothing)
    target = _series_tensor(target, positions.dtype)
    baseline = _series_tensor(baseline, positions.dtype)
    if features.shape != target.shape or features.shape != baseline.shape:
        raise DimensionError('feature shape %s does not match target %s / baseline %s' % (
            tuple(features.shape), tuple(target.shape), tuple(baseline.shape)))
    return relative_residual_loss(features, target, baseline, delta)


def laban_loss_and_grad(motion, target, baseline, effectors, smoothing=None, delta=1e-6):
    """(loss, exact gradient of the loss with respect to the T x J x 3 positions)."""
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    positions = getattr(motion, 'positions', motion)
    positions = torch.tensor(numpy.asarray(positions, dtype=numpy.float64), requires_grad=True)
    effectors.validate(positions.shape[1])
    loss = laban_loss_torch(positions, target, baseline, effectors, smoothing, delta)
    grad, = torch.autograd.grad(loss, positions)
    return float(loss.detach()), grad.numpy()


def laban_loss_grad_motion(motion, target, baseline, effectors, smoothing=None, delta=1e-6):
    """Exact gradient of the Laban loss with respect to the T x J x 3 positions."""
    return laban_loss_and_grad(motion, target, baseline, effectors, smoothing, delta)[1]


def write_series_csv(series, filename):
    """Write `frame,weight,time,flow,shape` rows."""
    with atomic_write(filename) as fd:
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(('frame',) + CHANNELS)
        for frame, row in enumerate(series.values.tolist()):
            writer.writerow([frame] + [repr(v) for v in row])
