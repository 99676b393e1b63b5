# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import os

import numpy
import torch

import unit_tests

from unit_tests import assert_raises, temp_folder

from laban_guide import synthetic
from laban_guide.diffusion.denoiser import load_checkpoint, save_checkpoint
from laban_guide.diffusion.sampler import draw_noise, sample
from laban_guide.diffusion.schedule import make_schedule, strided_steps
from laban_guide.diffusion.training import TrainingConfig, evaluate_denoiser, train_denoiser
from laban_guide.errors import ConfigError, DatasetError


SCHEDULE = make_schedule(10, 0.1, 0.5)


def _dataset(seed, per_family=8):
    spec = [(family, per_family) for family in synthetic.default_families()]
    return synthetic.gen_dataset(spec, n_frames=8, master_seed=seed)


def _config(iterations, seed=0):
    return TrainingConfig(iterations=iterations, batch_size=32, lr=2e-3, seed=seed, hidden=64, embed_dim=8)


def _same_parameters(a, b):
    a, b = a.state_dict(), b.state_dict()
    return a.keys() == b.keys() and all(torch.equal(a[k], b[k]) for k in a)


class ZeroIterationsKeepSeededInit(unit_tests.LabanTest):
    def run(self):
        dataset = _dataset(0)
        first = train_denoiser(dataset, _config(0, seed=5), SCHEDULE)
        second = train_denoiser(dataset, _config(0, seed=5), SCHEDULE)
        other = train_denoiser(dataset, _config(0, seed=6), SCHEDULE)
        assert _same_parameters(first, second)
        assert not _same_parameters(first, other)
        assert first.n_conditions == 3 and first.embed_dim == 8


class TrainingIsDeterministic(unit_tests.LabanTest):
    def run(self):
        dataset = _dataset(1)
        history_a, history_b = [], []
        first = train_denoiser(dataset, _config(20), SCHEDULE, history_a)
        second = train_denoiser(dataset, _config(20), SCHEDULE, history_b)
        assert history_a == history_b and len(history_a) == 20
        assert _same_parameters(first, second)


class TrainingReducesHeldOutError(unit_tests.LabanTest):
    def run(self):
        train, held_out = _dataset(2), _dataset(3)
        before = evaluate_denoiser(train_denoiser(train, _config(0), SCHEDULE), held_out, SCHEDULE)
        history = []
        trained = train_denoiser(train, _config(600), SCHEDULE, history)
        after = evaluate_denoiser(trained, held_out, SCHEDULE)
        assert after < 0.5 * before, 'held-out MSE %g -> %g' % (before, after)
        assert sum(history[-50:]) / 50.0 < sum(history[:50]) / 50.0


class TrainedModelIsFrozen(unit_tests.LabanTest):
    def run(self):
        denoiser = train_denoiser(_dataset(4), _config(5), SCHEDULE)
        assert not denoiser.training
        assert not any(p.requires_grad for p in denoiser.parameters())


class TrainingRejectsBadInput(unit_tests.LabanTest):
    def run(self):
        assert_raises(DatasetError, train_denoiser, [], _config(1), SCHEDULE)
        short = synthetic.gen_motion(synthetic.SkeletonSpec(), synthetic.default_families()[0], 8)
        longer = synthetic.gen_motion(synthetic.SkeletonSpec(), synthetic.default_families()[0], 9)
        assert_raises(DatasetError, train_denoiser, [(short, 0), (longer, 0)], _config(1), SCHEDULE)
        assert_raises(DatasetError, train_denoiser, [(short, -1)], _config(1), SCHEDULE)
        assert_raises(ConfigError, train_denoiser, _dataset(0), TrainingConfig(batch_size=0), SCHEDULE)
        assert_raises(ConfigError, train_denoiser, _dataset(0), TrainingConfig(lr=0.0), SCHEDULE)


class SingleMotionIsMemorized(unit_tests.LabanTest):
    def run(self):
        motion = synthetic.gen_motion(synthetic.SkeletonSpec(), synthetic.default_families()[1], 8, seed=3)
        history = []
        cfg = TrainingConfig(iterations=600, batch_size=32, lr=1e-3, seed=0, hidden=64, embed_dim=8)
        train_denoiser([(motion, 0)], cfg, SCHEDULE, history)
        tail = sum(history[-50:]) / 50.0
        assert tail < 1e-3, 'final loss %g' % tail


class SamplesStayInsideTheCorpus(unit_tests.LabanTest):
    def run(self):
        dataset = _dataset(5)
        denoiser = train_denoiser(dataset, _config(600), SCHEDULE)
        corpus = numpy.stack([motion.positions for motion, _ in dataset])
        mean = corpus.mean(axis=0)
        corpus_rms = numpy.sqrt(((corpus - mean) ** 2).mean())
        low = corpus.min(axis=(0, 1, 2))
        high = corpus.max(axis=(0, 1, 2))
        margin = 0.5 * (high - low)
        steps = strided_steps(SCHEDULE.n_steps)
        for condition_id in range(dataset.n_conditions):
            for seed in range(4):
                motion = sample(denoiser, denoiser.embedding(condition_id),
                                draw_noise(seed, denoiser.dimension), SCHEDULE, steps)
                positions = motion.positions.reshape(-1, 3)
                assert numpy.all(positions >= low - margin) and numpy.all(positions <= high + margin), \
                    'condition %d seed %d spans %s..%s' % (condition_id, seed, positions.min(axis=0),
                                                           positions.max(axis=0))
                rms = numpy.sqrt(((motion.positions - mean) ** 2).mean())
                assert rms < 3.0 * corpus_rms, 'rms %g against corpus %g' % (rms, corpus_rms)


class NormalizationIsFittedAndSaved(unit_tests.LabanTest):
    def run(self):
        dataset = _dataset(6)
        untrained = train_denoiser(dataset, _config(0), SCHEDULE)
        assert float(untrained.data_scale) == 1.0 and not torch.any(untrained.data_mean)
        assert untrained.prior_rank == 0
        denoiser = train_denoiser(dataset, _config(10), SCHEDULE)
        corpus = torch.tensor(numpy.stack([motion.flatten() for motion, _ in dataset]))
        assert torch.allclose(denoiser.data_mean, corpus.mean(dim=0))
        assert float(denoiser.data_scale) > 0.0 and 0 < denoiser.prior_rank <= 64
        encoded = denoiser.encode(corpus)
        assert torch.allclose(denoiser.decode(encoded), corpus)
        with temp_folder() as folder:
            filename = os.path.join(folder, 'model.pt')
            save_checkpoint(filename, denoiser, SCHEDULE, dataset.skeleton.effector_indices)
            loaded = load_checkpoint(filename).denoiser
        assert loaded.prior_rank == denoiser.prior_rank
        for name in ('data_mean', 'data_scale', 'prior_basis', 'prior_variance', 'residual_variance'):
            assert torch.equal(getattr(loaded, name), getattr(denoiser, name)), name
        e = denoiser.embedding(1)
        z = draw_noise(2, denoiser.dimension)
        steps = strided_steps(SCHEDULE.n_steps, 2)
        assert sample(loaded, e, z, SCHEDULE, steps) == sample(denoiser, e, z, SCHEDULE, steps)


class PriorRankIsValidated(unit_tests.LabanTest):
    def run(self):
        assert_raises(ConfigError, train_denoiser, _dataset(0), TrainingConfig(prior_rank=-1), SCHEDULE)
        assert TrainingConfig(prior_rank=3).to_json()['prior_rank'] == 3
