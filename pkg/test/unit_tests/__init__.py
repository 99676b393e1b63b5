# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import math
import shutil
import tempfile

from contextlib import contextmanager

import numpy
import torch

from laban_guide import synthetic
from laban_guide.diffusion.denoiser import Denoiser
from laban_guide.diffusion.schedule import make_schedule, strided_steps
from laban_guide.diffusion.training import TrainingConfig, train_denoiser
from laban_guide.motion import Motion, MotionLayout


class LabanTest(object):
    """A case is any subclass with a `run` method; a failed assert fails it."""

    def __init__(self, args=None):
        self.args = args


def assert_close(actual, expected, tolerance, what=''):
    actual = numpy.asarray(actual, dtype=numpy.float64)
    expected = numpy.asarray(expected, dtype=numpy.float64)
    assert actual.shape == expected.shape, '%s: shape %s != %s' % (what, actual.shape, expected.shape)
    error = float(numpy.abs(actual - expected).max()) if actual.size else 0.0
    assert error <= tolerance, '%s: max error %g exceeds %g' % (what, error, tolerance)


def assert_raises(exception_type, function, *args, **kwargs):
    try:
        function(*args, **kwargs)
    except exception_type as exception:
        return exception
    raise AssertionError('%s not raised by %s' % (exception_type.__name__, function.__name__))


@contextmanager
def temp_folder():
    folder = tempfile.mkdtemp(prefix='laban_guide_test_')
    try:
        yield folder
    finally:
        shutil.rmtree(folder, ignore_errors=True)


def static_motion(n_frames=12, n_joints=4, fps=20.0, seed=0):
    positions = numpy.random.default_rng(seed).uniform(-1.0, 1.0, (1, n_joints, 3))
    return Motion(fps, ['j%d' % i for i in range(n_joints)], numpy.repeat(positions, n_frames, axis=0))


def small_layout(n_frames=8, n_joints=3):
    return MotionLayout(n_frames, tuple('j%d' % i for i in range(n_joints)), 20.0)


class OracleDenoiser(Denoiser):
    """Predicts the exact noise that leads back to a pinned clean sample."""

    def __init__(self, layout, x0, schedule):
        self.layout = layout
        self.x0 = torch.tensor(numpy.asarray(x0, dtype=numpy.float64).reshape(-1))
        self.schedule = schedule

    def predict_noise(self, x_t, t, e):
        alpha_bar = self.schedule[int(t)]
        return (x_t - math.sqrt(alpha_bar) * self.x0) / math.sqrt(1.0 - alpha_bar)


class UnstableDenoiser(Denoiser):
    """
    Finite at the reference embedding; any large move of the embedding turns
    the prediction into NaN.
    """

    def __init__(self, layout, e0, seed=0):
        self.layout = layout
        self.e0 = torch.tensor(numpy.asarray(e0, dtype=numpy.float64))
        self.direction = torch.tensor(numpy.random.default_rng(seed).normal(0.0, 1.0, self.dimension))

    def embedding(self, condition_id):
        return self.e0.numpy().copy()

    def predict_noise(self, x_t, t, e):
        shift = (e - self.e0).sum() + 0.1
        return 0.5 * x_t + self.direction * torch.sqrt(1.0 - shift * shift)


DEMO_FRAMES = 24
DEMO_BUCKETS = (0.6, 0.8, 1.0, 1.2)
DEMO_STRIDE = 20

_trained = {}


def trained_demo_model():
    """
    (denoiser, schedule, step indices, dataset) of a demo-sized run: three
    families over four amplitude buckets, 1000 diffusion steps sampled every
    20. Trained once per process.
    """
    if 'demo' not in _trained:
        spec = [(family, 16) for family in synthetic.default_families()]
        dataset = synthetic.gen_dataset(spec, n_frames=DEMO_FRAMES, buckets=DEMO_BUCKETS)
        schedule = make_schedule(1000)
        cfg = TrainingConfig(iterations=1500, batch_size=64, lr=1e-3, seed=0)
        denoiser = train_denoiser(dataset, cfg, schedule)
        _trained['demo'] = (denoiser, schedule, strided_steps(schedule.n_steps, DEMO_STRIDE), dataset)
    return _trained['demo']
