# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Central finite-difference checks of the two gradients guidance relies on."""

import logging

from collections import namedtuple

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from .diffusion.denoiser import ToyDenoiser, freeze
from .diffusion.sampler import grad_wrt_embedding
from .diffusion.schedule import make_schedule, predict_x0
from .kinematics import SmoothingConfig
from .laban import laban_loss, laban_loss_grad_motion, laban_loss_torch, laban_series
from .motion import EndEffectorSet, Motion, MotionLayout
from .util import derive_seed


GradcheckResult = namedtuple('GradcheckResult', 'kind instance max_relative_error')

MOTION_TOLERANCE = 1e-4
EMBEDDING_TOLERANCE = 1e-3


def relative_error(analytic, numeric):
    """max |analytic - numeric| over max |numeric|."""
    analytic = numpy.asarray(analytic, dtype=numpy.float64).reshape(-1)
    numeric = numpy.asarray(numeric, dtype=numpy.float64).reshape(-1)
    scale = numpy.abs(numeric).max()
    if scale == 0.0:
        return float(numpy.abs(analytic).max())
    return float(numpy.abs(analytic - numeric).max() / scale)


def central_differences(function, point, step):
    point = numpy.array(point, dtype=numpy.float64)
    flat = point.reshape(-1)
    grad = numpy.zeros(flat.size)
    for index in range(flat.size):
        original = flat[index]
        flat[index] = original + step
        upper = function(point)
        flat[index] = original - step
        lower = function(point)
        flat[index] = original
        grad[index] = (upper - lower) / (2.0 * step)
    return grad.reshape(point.shape)


def random_motion(rng, n_frames=60, n_joints=7, fps=20.0):
    """A smooth random walk, so no two joints tie on a bounding-box extreme."""
    steps = rng.normal(0.0, 0.05, (n_frames, n_joints, 3))
    start = rng.uniform(-1.0, 1.0, (1, n_joints, 3))
    positions = start + numpy.cumsum(steps, axis=0)
    return Motion(fps, ['j%d' % i for i in range(n_joints)], positions)


def check_motion_gradient(rng, smoothing=None, step=1e-5):
    """Relative error of the position gradient of the Laban loss on one random instance."""
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    motion = random_motion(rng)
    effectors = EndEffectorSet(range(motion.n_joints))
    baseline = laban_series(random_motion(rng), effectors, smoothing)
    target = baseline.values * rng.uniform(0.5, 1.5, 4)

    def loss(positions):
        return laban_loss(laban_series(motion.with_positions(positions), effectors, smoothing),
                          target, baseline)

    analytic = laban_loss_grad_motion(motion, target, baseline, effectors, smoothing)
    numeric = central_differences(loss, motion.positions, step)
    return relative_error(analytic, numeric)


def check_embedding_gradient(rng, denoiser, schedule, smoothing=None, step=1e-4):
    """Relative error of the embedding gradient through predict_x0 and the Laban loss."""
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    layout = denoiser.layout
    shape = (layout.n_frames, len(layout.joint_names), 3)
    effectors = EndEffectorSet(range(shape[1]))
    t = int(rng.integers(1, schedule.n_steps + 1))
    x_t = torch.tensor(rng.normal(0.0, 1.0, denoiser.dimension))
    e = rng.normal(0.0, 1.0, denoiser.embed_dim)
    baseline = laban_series(random_motion(rng, *shape[:2]), effectors, smoothing)
    target = torch.tensor(baseline.values * rng.uniform(0.5, 1.5, 4))
    reference = torch.tensor(baseline.values)

    def loss_fn(eps_hat):
        positions = denoiser.decode(predict_x0(x_t, t, eps_hat, schedule)).reshape(shape)
        return laban_loss_torch(positions, target, reference, effectors, smoothing, 1e-6)

    def loss(embedding):
        with torch.no_grad():
            return float(loss_fn(denoiser(x_t, t, torch.tensor(embedding))))

    analytic = grad_wrt_embedding(denoiser, loss_fn, x_t, t, e)
    numeric = central_differences(loss, e, step)
    return relative_error(analytic, numeric)


def gradcheck_denoiser(seed=0, n_frames=12, n_joints=4, n_steps=50):
    """A small randomly initialized denoiser and schedule for embedding checks."""
    layout = MotionLayout(n_frames, tuple('j%d' % i for i in range(n_joints)), 20.0)
    schedule = make_schedule(n_steps, 1e-3, 5e-2)
    with torch.random.fork_rng():
        torch.manual_seed(derive_seed(seed, 3))
        denoiser = ToyDenoiser(layout, 2, schedule, hidden=32, embed_dim=8)
    return freeze(denoiser), schedule


def run_gradcheck(instances=10, seed=0, denoiser=None, schedule=None):
    """
    Both checks on `instances` random instances each. The embedding check
    uses a small random network unless a denoiser is given.
    """
    rng = numpy.random.default_rng(seed)
    if denoiser is None:
        denoiser, schedule = gradcheck_denoiser(seed)
    results = []
    for instance in range(int(instances)):
        results.append(GradcheckResult('motion', instance, check_motion_gradient(rng)))
    for instance in range(int(instances)):
        results.append(GradcheckResult('embedding', instance,
                                       check_embedding_gradient(rng, denoiser, schedule)))
    for result in results:
        logging.debug('%s #%d: max relative error %.3g', *result)
    return results


def passed(results):
    tolerance = {'motion': MOTION_TOLERANCE, 'embedding': EMBEDDING_TOLERANCE}
    return all(r.max_relative_error < tolerance[r.kind] for r in results)
