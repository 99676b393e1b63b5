# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import abc

from collections import namedtuple

from ..errors import ConfigError
from ..guidance.baselines import (CLASSIFIER_LAMBDA, RAW_FRAME_LR, RAW_FRAME_STEPS,
                                  classifier_guided_sample, raw_frame_update)
from ..guidance.guided import GuidanceConfig, guided_sample


# Everything a method needs besides the baseline it starts from.
SamplingContext = namedtuple('SamplingContext', 'denoiser schedule step_indices effectors smoothing')


class GenerationMethod(object, metaclass=abc.ABCMeta):

    name = None

    def __init__(self, context):
        self._context = context

    @property
    def context(self):
        return self._context

    @abc.abstractmethod
    def generate(self, baseline, target):
        """
        Function to be redefined by a method.
        :param baseline BaselineResult of the unguided run (motion, series, noise, embedding)
        :param target LabanSeries the output should move towards
        :returns the generated Motion
        """


class LabanGuidance(GenerationMethod):
    name = 'laban'

    def __init__(self, context, cfg=None):
        super(LabanGuidance, self).__init__(context)
        self._cfg = cfg or GuidanceConfig(smoothing=context.smoothing)

    def generate(self, baseline, target):
        c = self._context
        return guided_sample(c.denoiser, baseline.embedding, baseline.noise, c.schedule,
                             c.step_indices, target, baseline.series, self._cfg, c.effectors)


class RawFrameUpdate(GenerationMethod):
    name = 'raw-frame'

    def __init__(self, context, steps=RAW_FRAME_STEPS, lr=RAW_FRAME_LR, delta=1e-6):
        super(RawFrameUpdate, self).__init__(context)
        self._steps = steps
        self._lr = lr
        self._delta = delta

    def generate(self, baseline, target):
        c = self._context
        return raw_frame_update(baseline.motion, target, baseline.series, self._steps, self._lr,
                                c.effectors, c.smoothing, self._delta)


class ClassifierGuidance(GenerationMethod):
    name = 'classifier'

    def __init__(self, context, lam=CLASSIFIER_LAMBDA, delta=1e-6):
        super(ClassifierGuidance, self).__init__(context)
        self._lam = lam
        self._delta = delta

    def generate(self, baseline, target):
        c = self._context
        return classifier_guided_sample(c.denoiser, baseline.embedding, baseline.noise, c.schedule,
                                        c.step_indices, target, baseline.series, self._lam,
                                        c.effectors, c.smoothing, self._delta)


METHODS = dict((cls.name, cls) for cls in (LabanGuidance, RawFrameUpdate, ClassifierGuidance))


def make_method(name, context, **kwargs):
    if name not in METHODS:
        raise ConfigError('unknown method %r (choose from %s)' % (name, ', '.join(sorted(METHODS))))
    return METHODS[name](context, **kwargs)
