# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Noise schedule and the closed-form DDIM algebra (eta = 0)."""

import math

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from ..errors import ConfigError, DimensionError, StepOrderError


class NoiseSchedule(object):
    """
    Cumulative products alpha_bar[0..n_steps] of (1 - beta_t), with
    alpha_bar[0] = 1 so that step 0 is clean data.
    """

    def __init__(self, alpha_bar, beta_min=None, beta_max=None):
        alpha_bar = numpy.array(alpha_bar, dtype=numpy.float64)
        if alpha_bar.ndim != 1 or alpha_bar.size < 2:
            raise ConfigError('alpha_bar needs at least two entries')
        if alpha_bar[0] != 1.0:
            raise ConfigError('alpha_bar[0] must be exactly 1, got %r' % alpha_bar[0])
        if not numpy.all(numpy.diff(alpha_bar) < 0.0) or not numpy.all(alpha_bar > 0.0):
            raise ConfigError('alpha_bar must be strictly decreasing within (0, 1]')
        alpha_bar.setflags(write=False)
        self.alpha_bar = alpha_bar
        self.beta_min = beta_min
        self.beta_max = beta_max

    @property
    def n_steps(self):
        return self.alpha_bar.size - 1

    def __getitem__(self, t):
        return float(self.alpha_bar[t])

    def check_step(self, t, allow_zero=False):
        lowest = 0 if allow_zero else 1
        if isinstance(t, bool) or int(t) != t or not lowest <= t <= self.n_steps:
            raise StepOrderError('step %r outside [%d, %d]' % (t, lowest, self.n_steps))
        return int(t)

    def to_json(self):
        return {'n_steps': self.n_steps, 'beta_min': self.beta_min, 'beta_max': self.beta_max}

    def __repr__(self):
        return 'NoiseSchedule(n_steps=%d, beta=[%r, %r])' % (self.n_steps, self.beta_min, self.beta_max)


def make_schedule(n_steps=1000, beta_min=1e-4, beta_max=2e-2):
    """Linear beta schedule from beta_min to beta_max over n_steps."""
    if isinstance(n_steps, bool) or int(n_steps) != n_steps or n_steps < 1:
        raise ConfigError('n_steps must be a positive integer, got %r' % (n_steps,))
    if not 0.0 < beta_min <= beta_max < 1.0:
        raise ConfigError('need 0 < beta_min <= beta_max < 1, got %r, %r' % (beta_min, beta_max))
    betas = numpy.linspace(beta_min, beta_max, int(n_steps), dtype=numpy.float64)
    alpha_bar = numpy.concatenate([[1.0], numpy.cumprod(1.0 - betas)])
    return NoiseSchedule(alpha_bar, beta_min, beta_max)


def strided_steps(n_steps, stride=1):
    """Decreasing step indices [n_steps, n_steps - stride, ..., 0]."""
    if int(stride) < 1:
        raise ConfigError('stride must be positive, got %r' % (stride,))
    steps = list(range(int(n_steps), 0, -int(stride)))
    return steps + [0]


def check_step_indices(step_indices, schedule):
    steps = [int(s) for s in step_indices]
    if len(steps) < 2 or steps[0] != schedule.n_steps or steps[-1] != 0:
        raise StepOrderError('step indices must run from %d down to 0' % schedule.n_steps)
    if any(b >= a for a, b in zip(steps, steps[1:])):
        raise StepOrderError('step indices must be strictly decreasing')
    return steps


def _check_same_shape(a, b, what):
    a_shape = tuple(getattr(a, 'shape', ()))
    b_shape = tuple(getattr(b, 'shape', ()))
    if a_shape != b_shape:
        raise DimensionError('%s shape %s does not match %s' % (what, b_shape, a_shape))


def forward_diffuse(x0, t, eps, schedule):
    """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps."""
    t = schedule.check_step(t)
    _check_same_shape(x0, eps, 'noise')
    alpha_bar = schedule[t]
    return math.sqrt(alpha_bar) * x0 + math.sqrt(1.0 - alpha_bar) * eps


def predict_x0(x_t, t, eps_hat, schedule):
    """Clean-sample estimate implied by a noise prediction."""
    t = schedule.check_step(t)
    alpha_bar = schedule[t]
    return (x_t - math.sqrt(1.0 - alpha_bar) * eps_hat) / math.sqrt(alpha_bar)


def recombine(x0_hat, eps_hat, t_prev, schedule):
    """Deterministic DDIM re-noising of a clean estimate to step t_prev."""
    alpha_bar = schedule[t_prev]
    return math.sqrt(alpha_bar) * x0_hat + math.sqrt(1.0 - alpha_bar) * eps_hat


def ddim_step(x_t, t, t_prev, eps_hat, schedule):
    """One eta = 0 DDIM update from step t to t_prev < t."""
    t = schedule.check_step(t)
    t_prev = schedule.check_step(t_prev, allow_zero=True)
    if not t_prev < t:
        raise StepOrderError('DDIM step needs t_prev < t, got t=%d t_prev=%d' % (t, t_prev))
    _check_same_shape(x_t, eps_hat, 'noise prediction')
    return recombine(predict_x0(x_t, t, eps_hat, schedule), eps_hat, t_prev, schedule)
