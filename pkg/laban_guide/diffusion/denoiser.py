# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Epsilon-prediction denoisers and their checkpoints."""

import abc
import logging
import math
import os

try:
    import numpy
    import torch
    from torch import nn
except ImportError:
    raise RuntimeError('cannot import numpy/torch, make sure both packages are installed.')

from ..errors import ConfigError, ContractError, DatasetError, UnknownConditionError
from ..motion import Motion, MotionLayout
from .schedule import make_schedule


CHECKPOINT_VERSION = 2

TIME_FREQUENCIES = 8

EMBEDDING_INIT_STD = 0.5

# Principal variances (in units of the largest one) below this fold into the
# isotropic residual, which never drops below it either.
PRIOR_VARIANCE_FLOOR = 1e-6


class Denoiser(object, metaclass=abc.ABCMeta):
    """
    A map (x_t, t, e) -> eps_hat with eps_hat shaped like x_t.

    Implementations must be deterministic and differentiable in both x_t and e
    (torch autograd). `layout` describes the motion a flat x_t unpacks to;
    `encode` and `decode` convert between flat joint positions and the space
    the diffusion runs in (the identity unless a denoiser normalizes its data).
    """

    layout = None

    @abc.abstractmethod
    def predict_noise(self, x_t, t, e):
        """
        :param x_t flat float64 tensor of size n_frames * n_joints * 3 (or a batch of them)
        :param t integer step index in [1, n_steps]
        :param e embedding tensor of size embed_dim
        :returns eps_hat with the shape of x_t
        """

    def embedding(self, condition_id):
        """Learned embedding of a condition, as a numpy vector."""
        raise UnknownConditionError('%s has no condition table' % type(self).__name__)

    def embedding_radius(self):
        """Typical norm of a learned embedding, or None without a condition table."""
        return None

    def encode(self, positions):
        return positions

    def decode(self, x):
        return x

    def to_motion(self, x):
        """Motion of a flat sample in diffusion space."""
        x = torch.as_tensor(x, dtype=torch.float64)
        return Motion.from_flat(self.decode(x).detach().numpy(), self.layout)

    @property
    def dimension(self):
        return self.layout.n_frames * len(self.layout.joint_names) * 3

    def __call__(self, x_t, t, e):
        eps_hat = self.predict_noise(x_t, t, e)
        if tuple(eps_hat.shape) != tuple(x_t.shape):
            raise ContractError('denoiser returned shape %s for input %s' % (
                tuple(eps_hat.shape), tuple(x_t.shape)))
        return eps_hat


def time_features(t, n_steps):
    """Sin/cos features of t / n_steps at TIME_FREQUENCIES octaves."""
    t = torch.as_tensor(t, dtype=torch.float64).reshape(-1, 1) / float(n_steps)
    frequencies = math.pi * 2.0 ** torch.arange(TIME_FREQUENCIES, dtype=torch.float64)
    angles = t * frequencies
    return torch.cat([torch.sin(angles), torch.cos(angles)], dim=1)


class ToyDenoiser(nn.Module, Denoiser):
    """
    Closed-form Gaussian denoiser of the training data plus a learned
    correction: two hidden layers over [x_t, time features, e], with the
    condition embedding table trained jointly with them.

    The diffusion runs on positions shifted by the data mean and divided by
    the data scale. In that space the data prior is a Gaussian with
    `prior_rank` principal directions and an isotropic residual; its exact
    noise posterior mean is added to the network output. Before `fit_prior`
    the prior is N(0, I) and the scale is 1.
    """

    def __init__(self, layout, n_conditions, schedule, hidden=128, embed_dim=16, prior_rank=0):
        super(ToyDenoiser, self).__init__()
        if n_conditions < 1:
            raise ConfigError('need at least one condition, got %r' % (n_conditions,))
        self.layout = MotionLayout(int(layout.n_frames), tuple(layout.joint_names), float(layout.fps))
        self.n_conditions = int(n_conditions)
        self.n_steps = int(schedule.n_steps)
        self.hidden = int(hidden)
        self.embed_dim = int(embed_dim)
        width = self.dimension + 2 * TIME_FREQUENCIES + self.embed_dim
        self.conditions = nn.Embedding(self.n_conditions, self.embed_dim)
        nn.init.normal_(self.conditions.weight, 0.0, EMBEDDING_INIT_STD)
        self.net = nn.Sequential(
            nn.Linear(width, self.hidden),
            nn.SiLU(),
            nn.Linear(self.hidden, self.hidden),
            nn.SiLU(),
            nn.Linear(self.hidden, self.dimension))
        self.register_buffer('alpha_bar', torch.tensor(numpy.asarray(schedule.alpha_bar)))
        self.register_buffer('data_mean', torch.zeros(self.dimension))
        self.register_buffer('data_scale', torch.tensor(1.0))
        self.register_buffer('prior_basis', torch.zeros(self.dimension, int(prior_rank)))
        self.register_buffer('prior_variance', torch.ones(int(prior_rank)))
        self.register_buffer('residual_variance', torch.tensor(1.0))
        self.double()

    @property
    def prior_rank(self):
        return self.prior_basis.shape[1]

    def fit_prior(self, positions, max_rank=64):
        """
        Set the data mean, scale and Gaussian prior from an N x D matrix of
        flat training motions. The scale makes the largest principal variance 1.
        """
        positions = torch.as_tensor(positions, dtype=torch.float64)
        if positions.dim() != 2 or positions.shape[1] != self.dimension:
            raise DatasetError('prior needs an N x %d matrix, got shape %s' % (
                self.dimension, tuple(positions.shape)))
        mean = positions.mean(dim=0)
        centered = positions - mean
        _, singular, vh = torch.linalg.svd(centered, full_matrices=False)
        variance = singular ** 2 / max(positions.shape[0] - 1, 1)
        largest = float(variance[0]) if variance.numel() else 0.0
        scale = math.sqrt(largest) if largest > 0.0 else 1.0
        variance = variance / (scale * scale)
        rank = min(int(max_rank), int((variance > PRIOR_VARIANCE_FLOOR).sum()))
        residual = float(variance[rank:].sum()) / max(self.dimension - rank, 1)
        self.data_mean = mean.clone()
        self.data_scale = torch.tensor(scale, dtype=torch.float64)
        self.prior_basis = vh[:rank].T.contiguous()
        self.prior_variance = variance[:rank].clone()
        self.residual_variance = torch.tensor(max(residual, PRIOR_VARIANCE_FLOOR), dtype=torch.float64)
        logging.debug('data prior: scale %.4g, rank %d, residual variance %.3g',
                      scale, rank, float(self.residual_variance))
        return self

    def encode(self, positions):
        return (positions - self.data_mean) / self.data_scale

    def decode(self, x):
        return x * self.data_scale + self.data_mean

    def prior_noise(self, x, t):
        """Posterior mean of the noise in x (B x D) when the data follow the Gaussian prior."""
        alpha_bar = self.alpha_bar[torch.as_tensor(t, dtype=torch.long)].reshape(-1, 1)
        noise = 1.0 - alpha_bar
        coords = x.matmul(self.prior_basis)
        inside = (coords / (alpha_bar * self.prior_variance + noise)).matmul(self.prior_basis.T)
        outside = (x - coords.matmul(self.prior_basis.T)) / (alpha_bar * self.residual_variance + noise)
        return torch.sqrt(noise) * (inside + outside)

    def forward(self, x_t, t, e):
        squeeze = x_t.dim() == 1
        x = x_t.reshape(-1, self.dimension)
        e = e.reshape(-1, self.embed_dim).expand(x.shape[0], -1)
        features = time_features(t, self.n_steps).expand(x.shape[0], -1)
        eps_hat = self.prior_noise(x, t) + self.net(torch.cat([x, features, e], dim=1))
        return eps_hat.reshape(-1) if squeeze else eps_hat

    def predict_noise(self, x_t, t, e):
        return self.forward(x_t, t, e)

    def __call__(self, x_t, t, e):
        return Denoiser.__call__(self, x_t, t, e)

    def check_condition(self, condition_id):
        if isinstance(condition_id, bool) or int(condition_id) != condition_id \
                or not 0 <= condition_id < self.n_conditions:
            raise UnknownConditionError('unknown condition %r (table has %d)' % (
                condition_id, self.n_conditions))
        return int(condition_id)

    def embedding(self, condition_id):
        condition_id = self.check_condition(condition_id)
        with torch.no_grad():
            return self.conditions.weight[condition_id].detach().clone().numpy()

    def embedding_radius(self):
        with torch.no_grad():
            return float(self.conditions.weight.pow(2).sum(dim=1).mean().sqrt())

    def config(self):
        return {
            'n_frames': self.layout.n_frames,
            'joint_names': list(self.layout.joint_names),
            'fps': self.layout.fps,
            'n_conditions': self.n_conditions,
            'n_steps': self.n_steps,
            'hidden': self.hidden,
            'embed_dim': self.embed_dim,
            'prior_rank': self.prior_rank
        }


def freeze(denoiser):
    """Switch a trained network to inference; parameters no longer track gradients."""
    denoiser.eval()
    for parameter in denoiser.parameters():
        parameter.requires_grad_(False)
    return denoiser


def save_checkpoint(filename, denoiser, schedule, effector_indices, metadata=None):
    """Write network weights, data prior, embedding table, schedule and skeleton to one file."""
    folder = os.path.dirname(os.path.abspath(filename))
    if not os.path.isdir(folder):
        os.makedirs(folder)
    payload = {
        'version': CHECKPOINT_VERSION,
        'kind': 'toy-denoiser',
        'model': denoiser.config(),
        'schedule': schedule.to_json(),
        'effector_indices': [int(i) for i in effector_indices],
        'metadata': dict(metadata or {}),
        'state_dict': denoiser.state_dict()
    }
    torch.save(payload, filename)
    logging.info('checkpoint written to %s', filename)


class Checkpoint(object):
    """A loaded checkpoint: denoiser, schedule and end effectors."""

    def __init__(self, denoiser, schedule, effector_indices, metadata):
        self.denoiser = denoiser
        self.schedule = schedule
        self.effector_indices = effector_indices
        self.metadata = metadata


def load_checkpoint(filename):
    if not os.path.isfile(filename):
        raise ConfigError('checkpoint %s does not exist' % filename)
    try:
        payload = torch.load(filename, map_location='cpu', weights_only=True)
    except Exception as exception:
        raise ConfigError('%s: cannot read checkpoint: %s' % (filename, exception))
    if not isinstance(payload, dict) or 'version' not in payload:
        raise ConfigError('%s: checkpoint has no version field' % filename)
    if payload['version'] != CHECKPOINT_VERSION:
        raise ConfigError('%s: unsupported checkpoint version %r' % (filename, payload['version']))
    model = payload['model']
    layout = MotionLayout(model['n_frames'], tuple(model['joint_names']), model['fps'])
    schedule_json = payload['schedule']
    schedule = make_schedule(schedule_json['n_steps'], schedule_json['beta_min'], schedule_json['beta_max'])
    denoiser = ToyDenoiser(layout, model['n_conditions'], schedule, hidden=model['hidden'],
                           embed_dim=model['embed_dim'], prior_rank=model['prior_rank'])
    denoiser.load_state_dict(payload['state_dict'])
    freeze(denoiser)
    logging.debug('loaded %s: %d conditions, %d steps, prior rank %d', filename,
                  denoiser.n_conditions, schedule.n_steps, denoiser.prior_rank)
    return Checkpoint(denoiser, schedule, list(payload['effector_indices']), payload.get('metadata', {}))


def embedding_tensor(e):
    """float64 tensor view of a ConditionEmbedding given as numpy or tensor."""
    if isinstance(e, torch.Tensor):
        return e.to(torch.float64)
    return torch.tensor(numpy.asarray(e, dtype=numpy.float64))
