# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Epsilon-MSE training of the toy denoiser and its condition table."""

import logging

try:
    import numpy
    import torch
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from ..errors import ConfigError, DatasetError
from ..util import derive_seed, print_over_same_line
from .denoiser import ToyDenoiser, freeze


class TrainingConfig(object):

    def __init__(self, iterations=3000, batch_size=64, lr=1e-3, seed=0, hidden=128,
                 embed_dim=16, prior_rank=64, progress=False):
        self.iterations = iterations
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.hidden = hidden
        self.embed_dim = embed_dim
        self.prior_rank = prior_rank
        self.progress = progress

    def validate(self):
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise ConfigError('iterations must be a non-negative integer, got %r' % (self.iterations,))
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ConfigError('batch_size must be a positive integer, got %r' % (self.batch_size,))
        if not self.lr > 0.0:
            raise ConfigError('training lr must be positive, got %r' % (self.lr,))
        if self.hidden < 1 or self.embed_dim < 1:
            raise ConfigError('hidden and embed_dim must be positive')
        if int(self.prior_rank) != self.prior_rank or self.prior_rank < 0:
            raise ConfigError('prior_rank must be a non-negative integer, got %r' % (self.prior_rank,))
        return self

    def to_json(self):
        return {
            'iterations': self.iterations,
            'batch_size': self.batch_size,
            'lr': self.lr,
            'seed': self.seed,
            'hidden': self.hidden,
            'embed_dim': self.embed_dim,
            'prior_rank': self.prior_rank
        }


def _stack_dataset(dataset):
    """(N x D tensor, N condition ids, layout, n_conditions) of (motion, condition_id) pairs."""
    pairs = list(dataset)
    if not pairs:
        raise DatasetError('dataset is empty')
    layout = pairs[0][0].layout
    for index, (motion, condition_id) in enumerate(pairs):
        if motion.layout != layout:
            raise DatasetError('record %d has layout %s, expected %s' % (index, motion.layout, layout))
        if int(condition_id) < 0:
            raise DatasetError('record %d has negative condition id %r' % (index, condition_id))
    x0 = torch.tensor(numpy.stack([motion.flatten() for motion, _ in pairs]))
    conditions = torch.tensor([int(c) for _, c in pairs], dtype=torch.long)
    n_conditions = getattr(dataset, 'n_conditions', None) or int(conditions.max()) + 1
    return x0, conditions, layout, n_conditions


def _alpha_bar(schedule):
    return torch.tensor(numpy.asarray(schedule.alpha_bar))


def _noisy_batch(x0, t, eps, alpha_bar):
    scale = alpha_bar[t].unsqueeze(1)
    return torch.sqrt(scale) * x0 + torch.sqrt(1.0 - scale) * eps


def train_denoiser(dataset, cfg, schedule, history=None):
    """
    Fit a ToyDenoiser to `dataset`, an iterable of (Motion, condition_id), by
    minimizing E|eps_theta(x_t, t, c) - eps|^2 over random (t, eps).

    Before the first iteration the data mean, scale and Gaussian prior are
    fitted to the dataset; the network learns the correction to that prior in
    normalized coordinates. Initialization and every draw are seeded from
    cfg.seed. With zero iterations the seeded, unfitted initialization is
    returned. Per-iteration losses are appended to `history` when given.
    """
    cfg.validate()
    x0, conditions, layout, n_conditions = _stack_dataset(dataset)
    with torch.random.fork_rng():
        torch.manual_seed(derive_seed(cfg.seed, 0))
        denoiser = ToyDenoiser(layout, n_conditions, schedule, hidden=cfg.hidden, embed_dim=cfg.embed_dim)
    if cfg.iterations:
        denoiser.fit_prior(x0, cfg.prior_rank)
        x0 = denoiser.encode(x0)
    generator = torch.Generator().manual_seed(derive_seed(cfg.seed, 1))
    optimizer = torch.optim.Adam(denoiser.parameters(), lr=cfg.lr)
    alpha_bar = _alpha_bar(schedule)
    logging.info('training on %d motions, %d conditions, %d iterations',
                 x0.shape[0], n_conditions, cfg.iterations)
    denoiser.train()
    for iteration in range(int(cfg.iterations)):
        index = torch.randint(x0.shape[0], (cfg.batch_size,), generator=generator)
        t = torch.randint(1, schedule.n_steps + 1, (cfg.batch_size,), generator=generator)
        eps = torch.randn((cfg.batch_size, x0.shape[1]), generator=generator, dtype=torch.float64)
        x_t = _noisy_batch(x0[index], t, eps, alpha_bar)
        eps_hat = denoiser(x_t, t, denoiser.conditions(conditions[index]))
        loss = ((eps_hat - eps) ** 2).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if history is not None:
            history.append(loss.item())
        if cfg.progress and (iteration % 50 == 0 or iteration + 1 == cfg.iterations):
            print_over_same_line('iteration %d/%d  loss %.5f' % (iteration + 1, cfg.iterations, loss.item()))
    if cfg.progress and cfg.iterations:
        print('')
    return freeze(denoiser)


def evaluate_denoiser(denoiser, dataset, schedule, seed=0, draws=4):
    """Mean epsilon-prediction MSE over `draws` seeded (t, eps) samples per record."""
    x0, conditions, _, _ = _stack_dataset(dataset)
    x0 = denoiser.encode(x0)
    generator = torch.Generator().manual_seed(derive_seed(seed, 2))
    alpha_bar = _alpha_bar(schedule)
    x0 = x0.repeat(draws, 1)
    conditions = conditions.repeat(draws)
    t = torch.randint(1, schedule.n_steps + 1, (x0.shape[0],), generator=generator)
    eps = torch.randn(x0.shape, generator=generator, dtype=torch.float64)
    with torch.no_grad():
        eps_hat = denoiser(_noisy_batch(x0, t, eps, alpha_bar), t, denoiser.conditions(conditions))
        return float(((eps_hat - eps) ** 2).mean())
