# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

from ..laban import CHANNELS


class Experiment(object):
    """One row of a change matrix: a channel pushed from its small to its large tag."""

    def __init__(self):
        self.Id = ''
        self.Row = 0
        self.SmallTag = ''
        self.LargeTag = ''
        self.Conditions = []
        self.Repetitions = [0]

    def set(self, **kwargs):
        for key, value in kwargs.items():
            if not hasattr(self, key):
                raise ValueError('Experiment: no key named %r' % key)
            setattr(self, key, value)

    @property
    def id(self):
        return self.Id

    @property
    def row(self):
        return self.Row

    @property
    def channel(self):
        return CHANNELS[self.Row]

    @property
    def tags(self):
        return self.SmallTag, self.LargeTag

    @property
    def conditions(self):
        return self.Conditions

    @property
    def repetitions(self):
        return self.Repetitions

    def cells(self):
        """(condition_id, repeat) pairs in evaluation order."""
        return [(c, r) for c in self.Conditions for r in self.Repetitions]
