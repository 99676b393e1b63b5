# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""
Two-step guided generation.

Step 1 samples an unguided baseline from (z, e0) and extracts its Laban
series f_tc. Step 2 restarts from the same z and, at every sampling step,
runs Adam on the condition embedding to pull the Laban series of the
predicted clean motion towards f_target = s * f_tc, then takes the DDIM step
with the updated embedding.
"""

import csv
import logging
import math

from collections import namedtuple

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from ..diffusion.denoiser import embedding_tensor
from ..diffusion.sampler import (check_noise, draw_noise, loss_and_grad_wrt_embedding, noise_tensor,
                                 sample)
from ..diffusion.schedule import check_step_indices, ddim_step, predict_x0
from ..errors import ConfigError, DimensionError, NumericInstabilityError
from ..kinematics import SmoothingConfig
from ..laban import CHANNELS, laban_loss_torch, laban_scalars, laban_series, series_data
from ..synthetic import default_effectors
from ..util import atomic_write
from .adam import AdamState, adam_step
from .tags import ScaleVector, make_target


BaselineResult = namedtuple('BaselineResult', 'motion series noise embedding')

LossRecord = namedtuple('LossRecord', 'step t loss')


class GuidanceConfig(object):

    def __init__(self, lr=0.005, adam_betas=(0.7, 0.9), delta=1e-6, steps_per_t=1,
                 reset_adam=False, recompute_eps=True, divergence_ratio=1e3, max_update=1.0,
                 smoothing=None):
        self.lr = lr
        self.adam_betas = tuple(adam_betas)
        self.delta = delta
        self.steps_per_t = steps_per_t
        self.reset_adam = reset_adam
        self.recompute_eps = recompute_eps
        self.divergence_ratio = divergence_ratio
        self.max_update = max_update
        self.smoothing = SmoothingConfig() if smoothing is None else smoothing

    def validate(self):
        if not (self.lr >= 0.0 and math.isfinite(self.lr)):
            raise ConfigError('guidance lr must be a non-negative number, got %r' % (self.lr,))
        if len(self.adam_betas) != 2 or not all(0.0 <= b < 1.0 for b in self.adam_betas):
            raise ConfigError('Adam betas must be two values in [0, 1), got %r' % (self.adam_betas,))
        if not self.delta > 0.0:
            raise ConfigError('delta must be positive, got %r' % (self.delta,))
        if isinstance(self.steps_per_t, bool) or int(self.steps_per_t) != self.steps_per_t \
                or self.steps_per_t < 0:
            raise ConfigError('steps_per_t must be a non-negative integer, got %r' % (self.steps_per_t,))
        if not self.divergence_ratio > 1.0:
            raise ConfigError('divergence_ratio must exceed 1, got %r' % (self.divergence_ratio,))
        if self.max_update is not None and not self.max_update > 0.0:
            raise ConfigError('max_update must be positive or None, got %r' % (self.max_update,))
        self.smoothing.validate()
        return self

    @property
    def enabled(self):
        return self.lr > 0.0 and self.steps_per_t > 0

    def to_json(self):
        return {
            'lr': self.lr,
            'adam_betas': list(self.adam_betas),
            'delta': self.delta,
            'steps_per_t': self.steps_per_t,
            'reset_adam': self.reset_adam,
            'recompute_eps': self.recompute_eps,
            'divergence_ratio': self.divergence_ratio,
            'max_update': self.max_update,
            'smoothing': {
                'kernel_size': self.smoothing.kernel_size,
                'sigma2': self.smoothing.sigma2,
                'enabled': self.smoothing.enabled
            }
        }


def generate_baseline(denoiser, condition_id, seed, schedule, step_indices,
                      effectors=None, smoothing=None):
    """Step 1: unguided sample of a condition from seeded noise, with its Laban series."""
    e0 = denoiser.embedding(condition_id)
    z = draw_noise(seed, denoiser.dimension)
    motion = sample(denoiser, e0, z, schedule, step_indices)
    effectors = default_effectors(denoiser.layout.joint_names) if effectors is None else effectors
    series = laban_series(motion, effectors, smoothing)
    logging.debug('baseline for condition %s, seed %s: %s', condition_id, seed,
                  laban_scalars(series))
    return BaselineResult(motion, series, z, e0)


def series_values(series, n_frames, what):
    values = numpy.asarray(series_data(series), dtype=numpy.float64)
    if values.shape != (n_frames, len(CHANNELS)):
        raise DimensionError('%s has shape %s, the motion needs (%d, 4)' % (what, values.shape, n_frames))
    return values


class DivergenceGuard(object):
    """
    Aborts a run whose loss or clean estimate stops being usable, or where a
    single Adam update moves the embedding more than cfg.max_update times
    `radius`, the typical norm of a trained embedding.
    """

    def __init__(self, cfg, radius=None):
        self.cfg = cfg
        self.lowest = float('inf')
        self.radius = radius

    def fail(self, message, step, t):
        logging.error('guidance failed at step %d (t=%d) with learning rate %g: %s',
                      step, t, self.cfg.lr, message)
        raise NumericInstabilityError('%s at step %d (t=%d, lr=%g)' % (message, step, t, self.cfg.lr),
                                      step=step, t=t, lr=self.cfg.lr)

    def check(self, loss, x0_hat, grad, step, t):
        if not math.isfinite(loss):
            self.fail('non-finite Laban loss', step, t)
        if x0_hat is not None and not bool(torch.isfinite(x0_hat).all()):
            self.fail('non-finite predicted motion', step, t)
        if not numpy.all(numpy.isfinite(grad)):
            self.fail('non-finite embedding gradient', step, t)
        if self.lowest > 0.0 and loss > self.cfg.divergence_ratio * self.lowest:
            self.fail('Laban loss %g diverged from its minimum %g' % (loss, self.lowest), step, t)
        self.lowest = min(self.lowest, loss)

    def check_update(self, before, after, step, t):
        if self.cfg.max_update is None or not self.radius:
            return
        moved = float(numpy.linalg.norm(numpy.asarray(after) - numpy.asarray(before))) / self.radius
        if not moved <= self.cfg.max_update:
            self.fail('one update moved the embedding %.3g table radii (limit %g)' % (
                moved, self.cfg.max_update), step, t)


def embedding_scale(denoiser, e0):
    """Table radius of the denoiser, else the norm of the start embedding, else 1."""
    radius = denoiser.embedding_radius()
    if not radius:
        radius = float(numpy.linalg.norm(e0)) or 1.0
    return radius


def guided_sample(denoiser, e0, z, schedule, step_indices, f_target, f_tc, cfg,
                  effectors=None, trace=None):
    """
    Step 2: DDIM sampling from z with per-step Adam updates of the embedding.

    Each step predicts eps with the current embedding, takes cfg.steps_per_t
    Adam steps on the Laban loss of the predicted clean motion, then takes the
    DDIM step with the updated embedding. Adam moments persist over the whole
    run unless cfg.reset_adam is set. Loss values are appended to `trace` as
    LossRecord(step, t, loss) when a list is given.
    """
    cfg.validate()
    steps = check_step_indices(step_indices, schedule)
    layout = denoiser.layout
    n_joints = len(layout.joint_names)
    target = series_values(f_target, layout.n_frames, 'target series')
    baseline = series_values(f_tc, layout.n_frames, 'baseline series')
    effectors = default_effectors(layout.joint_names) if effectors is None else effectors
    effectors.validate(n_joints)
    if not cfg.enabled or numpy.array_equal(target, baseline):
        logging.debug('guidance disabled (lr=%g, steps_per_t=%s, identity target=%s)',
                      cfg.lr, cfg.steps_per_t, numpy.array_equal(target, baseline))
        return sample(denoiser, e0, z, schedule, steps)

    target = torch.tensor(target)
    baseline = torch.tensor(baseline)
    e = embedding_tensor(e0).detach().numpy().copy()
    state = AdamState.zeros(e.size)
    guard = DivergenceGuard(cfg, embedding_scale(denoiser, e))
    x_t = noise_tensor(z)
    check_noise(denoiser, x_t)

    for step, (t, t_prev) in enumerate(zip(steps, steps[1:])):
        if cfg.reset_adam:
            state = AdamState.zeros(e.size)
        captured = {}

        def loss_fn(eps_hat):
            x0_hat = predict_x0(x_t, t, eps_hat, schedule)
            captured['eps'] = eps_hat.detach()
            captured['x0'] = x0_hat.detach()
            positions = denoiser.decode(x0_hat).reshape(layout.n_frames, n_joints, 3)
            return laban_loss_torch(positions, target, baseline, effectors, cfg.smoothing, cfg.delta)

        for _ in range(int(cfg.steps_per_t)):
            loss, grad = loss_and_grad_wrt_embedding(denoiser, loss_fn, x_t, t, e)
            guard.check(loss, captured.get('x0'), grad, step, t)
            if trace is not None:
                trace.append(LossRecord(step, t, loss))
            previous = e
            e, state = adam_step(state, grad, e, cfg)
            guard.check_update(previous, e, step, t)
        logging.debug('step %d t=%d loss %.6g', step, t, loss)

        with torch.no_grad():
            if cfg.recompute_eps:
                eps_hat = denoiser(x_t, t, torch.tensor(e))
            else:
                eps_hat = captured['eps']
            x_t = ddim_step(x_t, t, t_prev, eps_hat, schedule)
        if not bool(torch.isfinite(x_t).all()):
            guard.fail('non-finite sample', step, t_prev)

    return denoiser.to_motion(x_t)


def scale_sweep(denoiser, condition_id, seed, schedule, step_indices, channel, cfg,
                scales=(0.5, 0.8, 1.0, 1.2, 1.5), effectors=None):
    """
    Guided runs sharing one baseline, scaling a single channel by each value in
    `scales`. Returns [(scale, LabanScalars)].
    """
    if channel not in CHANNELS:
        raise ConfigError('unknown channel %r' % (channel,))
    effectors = default_effectors(denoiser.layout.joint_names) if effectors is None else effectors
    base = generate_baseline(denoiser, condition_id, seed, schedule, step_indices,
                             effectors, cfg.smoothing)
    rows = []
    for scale in scales:
        values = [1.0] * len(CHANNELS)
        values[CHANNELS.index(channel)] = scale
        target = make_target(base.series, ScaleVector(values))
        motion = guided_sample(denoiser, base.embedding, base.noise, schedule, step_indices,
                               target, base.series, cfg, effectors)
        scalars = laban_scalars(laban_series(motion, effectors, cfg.smoothing))
        logging.info('%s x%g -> %s %.6g', channel, scale, channel, getattr(scalars, channel))
        rows.append((float(scale), scalars))
    return rows


def write_loss_trace(records, filename):
    """Write `step,t,loss` rows."""
    with atomic_write(filename) as fd:
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(LossRecord._fields)
        for record in records:
            writer.writerow([record.step, record.t, repr(float(record.loss))])


def write_sweep_csv(rows, filename):
    with atomic_write(filename) as fd:
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(('scale',) + CHANNELS)
        for scale, scalars in rows:
            writer.writerow([repr(scale)] + [repr(float(v)) for v in scalars])
