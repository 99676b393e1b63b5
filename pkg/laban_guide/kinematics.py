# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""
Gaussian smoothing and finite-difference kinematics of joint trajectories.

The torch functions here are the differentiable building blocks used by the
Laban features; the numpy-facing wrappers (`gaussian_smooth`, `kinematics`)
run them without gradient tracking.
"""

from collections import namedtuple

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from .errors import ConfigError, MotionTooShortError
from .motion import MIN_FRAMES


KinematicsSeries = namedtuple('KinematicsSeries', 'velocity acceleration jerk')


class SmoothingConfig(object):
    """Gaussian filter applied to positions before differencing."""

    def __init__(self, kernel_size=11, sigma2=10.0, enabled=True):
        self.kernel_size = kernel_size
        self.sigma2 = sigma2
        self.enabled = enabled

    def validate(self):
        if (isinstance(self.kernel_size, bool) or int(self.kernel_size) != self.kernel_size
                or self.kernel_size < 1 or self.kernel_size % 2 == 0):
            raise ConfigError('smoothing kernel_size must be an odd positive integer, got %r'
                              % (self.kernel_size,))
        if not self.sigma2 > 0.0:
            raise ConfigError('smoothing sigma2 must be positive, got %r' % (self.sigma2,))
        return self

    @classmethod
    def disabled(cls):
        return cls(enabled=False)

    def __eq__(self, other):
        return (isinstance(other, SmoothingConfig) and self.kernel_size == other.kernel_size
                and self.sigma2 == other.sigma2 and self.enabled == other.enabled)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return 'SmoothingConfig(kernel_size=%r, sigma2=%r, enabled=%r)' % (
            self.kernel_size, self.sigma2, self.enabled)


def gaussian_kernel(kernel_size, sigma2):
    """Normalized weights exp(-i^2 / 2 sigma2) for i in [-k//2, k//2]."""
    half = int(kernel_size) // 2
    offsets = numpy.arange(-half, half + 1, dtype=numpy.float64)
    weights = numpy.exp(-offsets ** 2 / (2.0 * float(sigma2)))
    return weights / weights.sum()


def smooth_positions(positions, cfg):
    """
    Convolve every coordinate of a T x J x 3 tensor along time with the
    normalized Gaussian kernel, replicating the first and last frames.
    """
    cfg.validate()
    if not cfg.enabled:
        return positions
    n_frames = positions.shape[0]
    half = int(cfg.kernel_size) // 2
    kernel = torch.as_tensor(gaussian_kernel(cfg.kernel_size, cfg.sigma2), dtype=positions.dtype)
    # Clamped indices give replicate padding for any sequence length.
    index = torch.clamp(torch.arange(-half, n_frames + half), 0, n_frames - 1)
    padded = positions[index]
    windows = padded.unfold(0, 2 * half + 1, 1)
    return torch.tensordot(windows, kernel, dims=([windows.dim() - 1], [0]))


def finite_differences(positions):
    """
    Velocity, acceleration and jerk by first-order backward differences.
    Frames where a derivative is undefined are zero.
    """
    n_frames = positions.shape[0]
    if n_frames < MIN_FRAMES:
        raise MotionTooShortError('kinematics need at least %d frames, got %d' % (MIN_FRAMES, n_frames))
    velocity = positions[1:] - positions[:-1]
    acceleration = velocity[1:] - velocity[:-1]
    jerk = acceleration[1:] - acceleration[:-1]

    def pad(series, count):
        zeros = torch.zeros((count,) + tuple(series.shape[1:]), dtype=series.dtype)
        return torch.cat([zeros, series], dim=0)

    return pad(velocity, 1), pad(acceleration, 2), pad(jerk, 3)


def _as_tensor(motion_or_array):
    positions = getattr(motion_or_array, 'positions', motion_or_array)
    return torch.tensor(numpy.asarray(positions, dtype=numpy.float64))


def gaussian_smooth(motion, cfg):
    """Smoothed copy of `motion`; fps and skeleton are unchanged."""
    cfg.validate()
    if not cfg.enabled:
        return motion
    with torch.no_grad():
        smoothed = smooth_positions(_as_tensor(motion), cfg)
    return motion.with_positions(smoothed.numpy())


def kinematics(motion):
    """
    KinematicsSeries of T x J x 3 arrays in m/frame, m/frame^2, m/frame^3.
    No smoothing is applied here; smooth the motion first if needed.
    """
    with torch.no_grad():
        velocity, acceleration, jerk = finite_differences(_as_tensor(motion))
    return KinematicsSeries(velocity.numpy(), acceleration.numpy(), jerk.numpy())
