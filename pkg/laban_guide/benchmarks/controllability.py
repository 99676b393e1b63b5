# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

# Controllability study: push one channel from its small to its large tag and
# measure the relative change of all four.

from ..diffusion.schedule import strided_steps
from ..guidance.baselines import CLASSIFIER_LAMBDA, RAW_FRAME_LR, RAW_FRAME_STEPS
from ..guidance.guided import GuidanceConfig, generate_baseline
from ..guidance.tags import CHANNEL_TAGS, make_target, tags_to_scale
from ..laban import CHANNELS, laban_loss, laban_scalars, laban_series
from ..synthetic import default_effectors
from .benchmark import Benchmark, Measurement
from .experiment import Experiment
from .method import SamplingContext, make_method


class EvaluationConfig(object):

    def __init__(self, method='laban', master_seed=0, against_baseline=False, jobs=1, stride=1,
                 guidance=None, raw_frame_steps=RAW_FRAME_STEPS, raw_frame_lr=RAW_FRAME_LR,
                 classifier_lambda=CLASSIFIER_LAMBDA):
        self.method = method
        self.master_seed = master_seed
        self.against_baseline = against_baseline
        self.jobs = jobs
        self.stride = stride
        self.guidance = guidance or GuidanceConfig()
        self.raw_frame_steps = raw_frame_steps
        self.raw_frame_lr = raw_frame_lr
        self.classifier_lambda = classifier_lambda

    def method_options(self):
        delta = self.guidance.delta
        if self.method == 'laban':
            return {'cfg': self.guidance}
        if self.method == 'raw-frame':
            return {'steps': self.raw_frame_steps, 'lr': self.raw_frame_lr, 'delta': delta}
        if self.method == 'classifier':
            return {'lam': self.classifier_lambda, 'delta': delta}
        return {}


class Controllability(Benchmark):

    def __init__(self, method, condition_ids, repeats, master_seed=0, jobs=1,
                 against_baseline=False, delta=1e-6, progress=False):
        self._method = method
        self._condition_ids = list(condition_ids)
        self._repeats = list(repeats)
        self._against_baseline = bool(against_baseline)
        self._delta = delta
        super(Controllability, self).__init__('controllability_' + method.name, master_seed,
                                              jobs, progress)

    def _build_experiments(self):
        experiments = []
        for row, channel in enumerate(CHANNELS):
            small, large = CHANNEL_TAGS[channel]
            experiment = Experiment()
            experiment.set(
                Id='%s (%s -> %s)' % (channel, small, large),
                Row=row,
                SmallTag=small,
                LargeTag=large,
                Conditions=self._condition_ids,
                Repetitions=self._repeats)
            experiments.append(experiment)
        return experiments

    def _measure(self, experiment, condition_id, repeat, seed):
        c = self._method.context
        base = generate_baseline(c.denoiser, condition_id, seed, c.schedule, c.step_indices,
                                 c.effectors, c.smoothing)
        small_tag, large_tag = experiment.tags
        large_target = make_target(base.series, tags_to_scale([large_tag]))
        large = self._method.generate(base, large_target)
        large_series = laban_series(large, c.effectors, c.smoothing)
        if self._against_baseline:
            f_small = laban_scalars(base.series)
        else:
            small_target = make_target(base.series, tags_to_scale([small_tag]))
            small = self._method.generate(base, small_target)
            f_small = laban_scalars(laban_series(small, c.effectors, c.smoothing))
        improved = (laban_loss(large_series, large_target, base.series, self._delta)
                    < laban_loss(base.series, large_target, base.series, self._delta))
        return Measurement(list(f_small), list(laban_scalars(large_series)), improved, large)

    def _get_details(self):
        return {
            'method': self._method.name,
            'against_baseline': self._against_baseline,
            'conditions': self._condition_ids,
            'repeats': self._repeats,
            'sampling_steps': len(self._method.context.step_indices) - 1
        }


def build_controllability(denoiser, schedule, condition_ids, seeds, cfg, effectors=None,
                          progress=False):
    effectors = default_effectors(denoiser.layout.joint_names) if effectors is None else effectors
    context = SamplingContext(denoiser, schedule, strided_steps(schedule.n_steps, cfg.stride), effectors,
                              cfg.guidance.smoothing)
    method = make_method(cfg.method, context, **cfg.method_options())
    return Controllability(method, condition_ids, seeds, cfg.master_seed, cfg.jobs,
                           cfg.against_baseline, cfg.guidance.delta, progress)


def change_matrix(denoiser, condition_ids, seeds, cfg, schedule, effectors=None):
    """
    ChangeMatrix of `cfg.method` over every (row, condition, seed) cell;
    `seeds` are the repeat keys mixed into each cell's derived seed.
    """
    return build_controllability(denoiser, schedule, condition_ids, seeds, cfg, effectors).change_matrix()
