# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""laban-guide run settings"""

import io

from configparser import ConfigParser, Error as ConfigParserError

from .errors import ConfigError
from .kinematics import SmoothingConfig


# Section -> keys, in the order they are written.
SECTIONS = [
    ('Paths', ['DatasetPath', 'CheckpointPath', 'OutputDir']),
    ('Schedule', ['ScheduleSteps', 'BetaMin', 'BetaMax', 'Stride']),
    ('Guidance', ['LearningRate', 'Beta1', 'Beta2', 'Delta', 'StepsPerT', 'ResetAdam',
                  'RecomputeEps', 'DivergenceRatio', 'MaxUpdate', 'Scale', 'Tags']),
    ('Smoothing', ['SmoothingKernel', 'SmoothingSigma2', 'SmoothingEnabled']),
    ('Generation', ['Seed', 'ConditionId']),
    ('Evaluation', ['Method', 'Conditions', 'Repeats', 'Jobs', 'AgainstBaseline',
                    'RawFrameSteps', 'RawFrameLr', 'ClassifierLambda']),
    ('Training', ['TrainIterations', 'BatchSize', 'TrainLr', 'HiddenWidth', 'EmbedDim',
                  'PriorRank']),
    ('Data', ['Frames', 'Fps', 'Jitter', 'PerCondition', 'Buckets'])
]

LIST_KEYS = {'Scale': str, 'Tags': str, 'Buckets': float}

TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')


class RunConfig(object):
    """
    Every knob of a run. Defaults follow the published hyperparameters; a
    config file overrides them and command-line flags override the file. The
    __str__ method renders the settings as an INI file that `read` accepts.
    """

    def __init__(self, **kwargs):
        # [Paths]
        self.DatasetPath = '_out/dataset.jsonl'
        self.CheckpointPath = '_out/denoiser.pt'
        self.OutputDir = '_out'
        # [Schedule]
        self.ScheduleSteps = 1000
        self.BetaMin = 1e-4
        self.BetaMax = 2e-2
        self.Stride = 1
        # [Guidance]
        self.LearningRate = 0.005
        self.Beta1 = 0.7
        self.Beta2 = 0.9
        self.Delta = 1e-6
        self.StepsPerT = 1
        self.ResetAdam = False
        self.RecomputeEps = True
        self.DivergenceRatio = 1e3
        self.MaxUpdate = 1.0
        self.Scale = []
        self.Tags = []
        # [Smoothing]
        self.SmoothingKernel = 11
        self.SmoothingSigma2 = 10.0
        self.SmoothingEnabled = True
        # [Generation]
        self.Seed = 0
        self.ConditionId = 0
        # [Evaluation]
        self.Method = 'laban'
        self.Conditions = 10
        self.Repeats = 2
        self.Jobs = 1
        self.AgainstBaseline = False
        self.RawFrameSteps = 100
        self.RawFrameLr = 0.05
        self.ClassifierLambda = 0.005
        # [Training]
        self.TrainIterations = 3000
        self.BatchSize = 64
        self.TrainLr = 1e-3
        self.HiddenWidth = 128
        self.EmbedDim = 16
        self.PriorRank = 64
        # [Data]
        self.Frames = 60
        self.Fps = 20.0
        self.Jitter = 0.001
        self.PerCondition = 10
        self.Buckets = [1.0]
        self.set(**kwargs)

    def set(self, **kwargs):
        for key, value in kwargs.items():
            if not hasattr(self, key):
                raise ConfigError('RunConfig: no key named %r' % key)
            setattr(self, key, value)

    def set_from_text(self, key, text):
        """Set `key` from its config-file text, typed after the default value."""
        if not hasattr(self, key):
            raise ConfigError('RunConfig: no key named %r' % key)
        default = getattr(RunConfig(), key)
        text = text.strip()
        try:
            if key in LIST_KEYS:
                value = [LIST_KEYS[key](item.strip()) for item in text.split(',') if item.strip()]
            elif isinstance(default, bool):
                if text.lower() not in TRUE_WORDS + FALSE_WORDS:
                    raise ValueError('not a boolean')
                value = text.lower() in TRUE_WORDS
            elif isinstance(default, int):
                value = int(text)
            elif isinstance(default, float):
                value = float(text)
            else:
                value = text
        except ValueError as exception:
            raise ConfigError('RunConfig: bad value %r for %s: %s' % (text, key, exception))
        setattr(self, key, value)

    def read(self, filename):
        """Apply a key=value file; section headers are optional and ignored."""
        try:
            with open(filename) as fd:
                text = fd.read()
        except (IOError, OSError) as exception:
            raise ConfigError('%s: %s' % (filename, exception))
        if not text.lstrip().startswith('['):
            text = '[RunConfig]\n' + text
        ini = ConfigParser(interpolation=None)
        ini.optionxform = str
        try:
            ini.read_string(text, source=filename)
        except ConfigParserError as exception:
            raise ConfigError('%s: %s' % (filename, exception))
        for section in ini.sections():
            for key, value in ini.items(section):
                try:
                    self.set_from_text(key, value)
                except ConfigError as exception:
                    raise ConfigError('%s: %s' % (filename, exception))
        return self

    def as_dict(self):
        return dict((key, getattr(self, key)) for _, keys in SECTIONS for key in keys)

    def smoothing_config(self):
        return SmoothingConfig(self.SmoothingKernel, self.SmoothingSigma2, self.SmoothingEnabled).validate()

    def __str__(self):
        """Converts this object to an INI formatted string."""
        ini = ConfigParser(interpolation=None)
        ini.optionxform = str
        for section, keys in SECTIONS:
            ini.add_section(section)
            for key in keys:
                value = getattr(self, key)
                if isinstance(value, list):
                    value = ','.join(str(v) for v in value)
                ini.set(section, key, str(value))
        text = io.StringIO()
        ini.write(text)
        return text.getvalue().replace(' = ', '=')
