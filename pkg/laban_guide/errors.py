# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Errors raised by laban_guide. Each carries the exit code the CLI returns."""


class LabanGuideError(Exception):
    exit_code = 1


class ConfigError(LabanGuideError, ValueError):
    exit_code = 2


class TagError(ConfigError):
    pass


class DimensionError(LabanGuideError, ValueError):
    exit_code = 2


class MotionError(LabanGuideError, ValueError):
    exit_code = 2


class MotionTooShortError(MotionError):
    pass


class MotionFormatError(MotionError):
    """A motion file could not be parsed. The message names the field."""
    pass


class StepOrderError(LabanGuideError, ValueError):
    exit_code = 2


class DatasetError(LabanGuideError):
    exit_code = 2


class UnknownConditionError(LabanGuideError):
    exit_code = 2


class ContractError(LabanGuideError):
    pass


class NumericInstabilityError(LabanGuideError, ArithmeticError):
    """Guidance produced a non-finite or diverging loss."""

    exit_code = 3

    def __init__(self, message, step=None, t=None, lr=None):
        super(NumericInstabilityError, self).__init__(message)
        self.step = step
        self.t = t
        self.lr = lr


class DegenerateBaselineError(LabanGuideError, ValueError):
    exit_code = 4


class UndefinedMetricError(LabanGuideError, ValueError):
    exit_code = 4


class EvaluationError(LabanGuideError):
    exit_code = 4
