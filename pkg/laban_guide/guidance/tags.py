# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Laban tags, scale vectors and the feature targets they produce."""

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from ..errors import TagError
from ..laban import CHANNELS, LabanSeries


# tag -> (channel, scale)
TAG_SCALES = {
    'light': ('weight', 0.5),
    'strong': ('weight', 1.5),
    'sustained': ('time', 0.8),
    'sudden': ('time', 1.2),
    'bound': ('flow', 0.8),
    'free': ('flow', 1.2),
    'near': ('shape', 0.5),
    'far': ('shape', 1.5)
}

# Small tag first, large tag second, for every channel.
CHANNEL_TAGS = {
    'weight': ('light', 'strong'),
    'time': ('sustained', 'sudden'),
    'flow': ('bound', 'free'),
    'shape': ('near', 'far')
}


class ScaleVector(object):
    """Four positive multipliers ordered [Weight, Time, Flow, Shape]."""

    def __init__(self, values=(1.0, 1.0, 1.0, 1.0)):
        values = numpy.array(values, dtype=numpy.float64).reshape(-1)
        if values.size != len(CHANNELS):
            raise TagError('a scale vector has 4 components, got %d' % values.size)
        if not numpy.all(numpy.isfinite(values)) or not numpy.all(values > 0.0):
            raise TagError('scale components must be positive, got %s' % values.tolist())
        values.setflags(write=False)
        self.values = values

    def is_identity(self):
        return bool(numpy.all(self.values == 1.0))

    def tolist(self):
        return [float(v) for v in self.values]

    def __getitem__(self, name):
        return float(self.values[CHANNELS.index(name)])

    def __eq__(self, other):
        return isinstance(other, ScaleVector) and numpy.array_equal(self.values, other.values)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return 'ScaleVector(%s)' % ', '.join('%s=%g' % (c, v) for c, v in zip(CHANNELS, self.values))


def tags_to_scale(tags):
    values = dict((channel, 1.0) for channel in CHANNELS)
    claimed = {}
    for tag in tags:
        key = str(tag).strip().lower()
        if key not in TAG_SCALES:
            raise TagError('unknown Laban tag %r (known: %s)' % (tag, ', '.join(sorted(TAG_SCALES))))
        channel, scale = TAG_SCALES[key]
        if channel in claimed and claimed[channel] != key:
            raise TagError('tags %r and %r both set %s' % (claimed[channel], key, channel))
        claimed[channel] = key
        values[channel] = scale
    return ScaleVector([values[channel] for channel in CHANNELS])


def parse_scale_overrides(overrides, base=None):
    """
    Apply `component=value` strings (e.g. 'weight=1.5') on top of `base`,
    or on the identity scale.
    """
    values = dict(zip(CHANNELS, (base or ScaleVector()).tolist()))
    for override in overrides:
        name, separator, value = str(override).partition('=')
        name = name.strip().lower()
        if not separator or name not in values:
            raise TagError('scale override must look like weight=1.5, got %r' % (override,))
        try:
            values[name] = float(value)
        except ValueError:
            raise TagError('scale override %r is not a number' % (override,))
    return ScaleVector([values[channel] for channel in CHANNELS])


def make_target(baseline, s):
    """Scale every frame of the baseline series channel-wise by `s`."""
    return LabanSeries(baseline.values * s.values[numpy.newaxis, :])
