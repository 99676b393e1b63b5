# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Deterministic DDIM sampling and gradients through the denoiser."""

import logging

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from ..errors import ContractError, DimensionError
from .denoiser import embedding_tensor
from .schedule import check_step_indices, ddim_step


def noise_tensor(z):
    if isinstance(z, torch.Tensor):
        return z.detach().to(torch.float64).reshape(-1).clone()
    return torch.tensor(numpy.asarray(z, dtype=numpy.float64).reshape(-1))


def draw_noise(seed, dimension):
    """Initial noise x_T for a seed; the same seed always gives the same vector."""
    generator = torch.Generator().manual_seed(int(seed))
    return torch.randn(int(dimension), generator=generator, dtype=torch.float64).numpy()


def check_noise(denoiser, x_t):
    if x_t.numel() != denoiser.dimension:
        raise DimensionError('noise has %d values, the denoiser expects %d' % (
            x_t.numel(), denoiser.dimension))


def sample(denoiser, e, z, schedule, step_indices):
    """
    Unguided eta = 0 DDIM sampling from x_T = z along `step_indices`
    (n_steps down to 0). Returns the final x_0 as a Motion.
    """
    steps = check_step_indices(step_indices, schedule)
    e = embedding_tensor(e)
    x_t = noise_tensor(z)
    check_noise(denoiser, x_t)
    with torch.no_grad():
        for t, t_prev in zip(steps, steps[1:]):
            eps_hat = denoiser(x_t, t, e)
            x_t = ddim_step(x_t, t, t_prev, eps_hat, schedule)
    logging.debug('sampled %d DDIM steps', len(steps) - 1)
    return denoiser.to_motion(x_t)


def loss_and_grad_wrt_embedding(denoiser, loss_fn, x_t, t, e):
    """
    (loss, d loss / d e) for loss_fn applied to the noise prediction
    denoiser(x_t, t, e). x_t is held constant.
    """
    e = embedding_tensor(e).detach().clone().requires_grad_(True)
    x_t = noise_tensor(x_t)
    with torch.enable_grad():
        loss = loss_fn(denoiser(x_t, t, e))
        if not isinstance(loss, torch.Tensor):
            # Plain numbers cannot depend on e.
            return float(loss), numpy.zeros(e.shape[0])
        if loss.numel() != 1:
            raise ContractError('guidance loss must be a scalar, got shape %s' % (tuple(loss.shape),))
        if not loss.requires_grad:
            return float(loss), numpy.zeros(e.shape[0])
        grad, = torch.autograd.grad(loss.reshape(()), e, allow_unused=True)
    if grad is None:
        return float(loss.detach()), numpy.zeros(e.shape[0])
    return float(loss.detach()), grad.numpy()


def grad_wrt_embedding(denoiser, loss_fn, x_t, t, e):
    """Exact gradient with respect to the embedding of loss_fn(denoiser(x_t, t, e))."""
    return loss_and_grad_wrt_embedding(denoiser, loss_fn, x_t, t, e)[1]
