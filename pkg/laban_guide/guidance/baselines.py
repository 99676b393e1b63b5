# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""
Comparison methods that steer the Laban loss without touching the embedding:
optimizing the finished motion directly, and shifting each step's clean
estimate down the loss gradient.
"""

import logging

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from ..diffusion.denoiser import embedding_tensor
from ..diffusion.sampler import check_noise, noise_tensor, sample
from ..diffusion.schedule import check_step_indices, predict_x0, recombine
from ..kinematics import SmoothingConfig
from ..laban import laban_loss_and_grad, laban_loss_grad_motion
from ..synthetic import default_effectors
from .adam import AdamState, adam_step
from .guided import DivergenceGuard, GuidanceConfig, series_values


RAW_FRAME_STEPS = 100
RAW_FRAME_LR = 0.05
CLASSIFIER_LAMBDA = 0.005


def raw_frame_update(x0, f_target, f_tc, steps=RAW_FRAME_STEPS, lr=RAW_FRAME_LR,
                     effectors=None, smoothing=None, delta=1e-6, adam_betas=(0.7, 0.9)):
    """Adam on the raw T x J x 3 positions of a finished motion, no diffusion model involved."""
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    effectors = default_effectors(x0.joint_names) if effectors is None else effectors
    cfg = GuidanceConfig(lr=lr, adam_betas=adam_betas, delta=delta, smoothing=smoothing).validate()
    target = series_values(f_target, x0.n_frames, 'target series')
    baseline = series_values(f_tc, x0.n_frames, 'baseline series')
    if int(steps) <= 0 or lr == 0.0:
        return x0
    positions = x0.flatten()
    state = AdamState.zeros(positions.size)
    guard = DivergenceGuard(cfg)
    shape = x0.positions.shape
    for step in range(int(steps)):
        current = positions.reshape(shape)
        loss, grad = laban_loss_and_grad(current, target, baseline, effectors, smoothing, delta)
        grad = grad.reshape(-1)
        guard.check(loss, None, grad, step, 0)
        positions, state = adam_step(state, grad, positions, cfg)
        logging.debug('raw frame step %d loss %.6g', step, loss)
    return x0.with_positions(positions.reshape(shape))


def classifier_guided_sample(denoiser, e0, z, schedule, step_indices, f_target, f_tc,
                             lam=CLASSIFIER_LAMBDA, effectors=None, smoothing=None, delta=1e-6):
    """
    DDIM sampling where each step's clean estimate is moved by -lam times the
    Laban-loss gradient before re-noising. The embedding stays e0.
    """
    smoothing = SmoothingConfig() if smoothing is None else smoothing
    steps = check_step_indices(step_indices, schedule)
    layout = denoiser.layout
    shape = (layout.n_frames, len(layout.joint_names), 3)
    effectors = default_effectors(layout.joint_names) if effectors is None else effectors
    effectors.validate(shape[1])
    cfg = GuidanceConfig(lr=lam, delta=delta, smoothing=smoothing).validate()
    target = series_values(f_target, layout.n_frames, 'target series')
    baseline = series_values(f_tc, layout.n_frames, 'baseline series')
    if lam == 0.0 or numpy.array_equal(target, baseline):
        return sample(denoiser, e0, z, schedule, steps)

    e = embedding_tensor(e0)
    x_t = noise_tensor(z)
    check_noise(denoiser, x_t)
    guard = DivergenceGuard(cfg)
    for step, (t, t_prev) in enumerate(zip(steps, steps[1:])):
        with torch.no_grad():
            eps_hat = denoiser(x_t, t, e)
            x0_hat = predict_x0(x_t, t, eps_hat, schedule)
        if not bool(torch.isfinite(x0_hat).all()):
            guard.fail('non-finite predicted motion', step, t)
        positions = denoiser.decode(x0_hat).numpy().reshape(shape)
        grad = laban_loss_grad_motion(positions, target, baseline, effectors, smoothing, delta)
        if not numpy.all(numpy.isfinite(grad)):
            guard.fail('non-finite Laban gradient', step, t)
        shifted = denoiser.encode(torch.tensor((positions - lam * grad).reshape(-1)))
        x_t = recombine(shifted, eps_hat, t_prev, schedule)
    return denoiser.to_motion(x_t)