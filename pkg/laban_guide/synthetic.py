# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""
Procedural motion corpus.

Every joint follows a sinusoid of the family frequency around a bouncing
root. All limb excursions are proportional to the amplitude `a`, so velocity
scales with `a` and the Weight channel with a^2; `spread` sets how far the
hands sit from the body and `bounce` moves the root vertically.
"""

import json
import logging
import math
import os

from collections import namedtuple

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from .errors import ConfigError, DatasetError, MotionError
from .motion import MIN_FRAMES, EndEffectorSet, Motion
from .util import atomic_write, derive_seed


DEFAULT_JOINTS = ('root', 'head', 'left_hand', 'right_hand', 'left_foot', 'right_foot', 'pelvis')

DEFAULT_EFFECTORS = ('head', 'left_hand', 'right_hand', 'left_foot', 'right_foot', 'root')

DEFAULT_FRAMES = 60
DEFAULT_FPS = 20.0
DEFAULT_JITTER = 0.001

DEFAULT_PHASES = {
    'head': 0.0,
    'left_hand': 0.0,
    'right_hand': math.pi,
    'left_foot': math.pi,
    'right_foot': 0.0,
    'root': 0.0
}

DatasetRecord = namedtuple('DatasetRecord', 'condition_id family params motion')

Condition = namedtuple('Condition', 'condition_id family bucket params')


class SkeletonSpec(object):

    def __init__(self, joint_names=DEFAULT_JOINTS, effector_names=DEFAULT_EFFECTORS):
        self.joint_names = tuple(joint_names)
        self.effector_names = tuple(effector_names)
        if len(set(self.joint_names)) != len(self.joint_names):
            raise MotionError('skeleton joint names must be unique')
        missing = [name for name in DEFAULT_JOINTS if name not in self.joint_names]
        if missing:
            raise MotionError('skeleton lacks joints %s' % missing)
        self.effectors = EndEffectorSet.from_names(self.joint_names, self.effector_names)

    @property
    def effector_indices(self):
        return self.effectors.indices

    def to_json(self):
        return {'joint_names': list(self.joint_names), 'effector_names': list(self.effector_names)}

    @classmethod
    def from_json(cls, payload):
        return cls(payload['joint_names'], payload['effector_names'])


class MotionFamily(object):
    """A kind of movement: frequency in Hz, amplitude, spread and bounce in meters."""

    def __init__(self, family_id, frequency, amplitude, spread, bounce, phases=None):
        self.family_id = str(family_id)
        self.frequency = float(frequency)
        self.amplitude = float(amplitude)
        self.spread = float(spread)
        self.bounce = float(bounce)
        self.phases = dict(DEFAULT_PHASES)
        self.phases.update(phases or {})
        for name in ('frequency', 'amplitude', 'spread', 'bounce'):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ConfigError('%s: %s must be a non-negative number, got %r' % (
                    self.family_id, name, value))

    def scaled(self, factor):
        """Same family with its amplitude multiplied by `factor`."""
        return MotionFamily(self.family_id, self.frequency, self.amplitude * factor,
                            self.spread, self.bounce, self.phases)

    @property
    def params(self):
        return {
            'frequency': self.frequency,
            'amplitude': self.amplitude,
            'spread': self.spread,
            'bounce': self.bounce
        }

    def __repr__(self):
        return 'MotionFamily(%r, omega=%g, a=%g, r=%g, b=%g)' % (
            self.family_id, self.frequency, self.amplitude, self.spread, self.bounce)


def default_effectors(joint_names):
    """The named end effectors when a skeleton has all of them, otherwise every joint."""
    joint_names = tuple(joint_names)
    if all(name in joint_names for name in DEFAULT_EFFECTORS):
        return EndEffectorSet.from_names(joint_names, DEFAULT_EFFECTORS)
    return EndEffectorSet(range(len(joint_names)))


def default_families():
    return [
        MotionFamily('sway', 0.5, 0.05, 0.20, 0.01),
        MotionFamily('walk', 1.0, 0.15, 0.30, 0.03),
        MotionFamily('dance', 1.5, 0.30, 0.45, 0.06)
    ]


def gen_motion(skeleton, family, n_frames=DEFAULT_FRAMES, fps=DEFAULT_FPS, seed=0,
               jitter=DEFAULT_JITTER):
    """One motion of `family`; a pure function of its arguments."""
    if n_frames < MIN_FRAMES:
        raise MotionError('synthetic motions need at least %d frames, got %d' % (MIN_FRAMES, n_frames))
    if not jitter >= 0.0:
        raise ConfigError('jitter must be non-negative, got %r' % (jitter,))
    rng = numpy.random.default_rng(int(seed))
    offset = rng.uniform(0.0, 2.0 * math.pi)
    a, r, b = family.amplitude, family.spread, family.bounce
    theta = 2.0 * math.pi * family.frequency * numpy.arange(n_frames) / float(fps) + offset
    zero = numpy.zeros(n_frames)
    one = numpy.ones(n_frames)

    def phase(name):
        return theta + family.phases.get(name, 0.0)

    def point(x, y, z):
        return numpy.stack([x, y, z], axis=1)

    root = point(zero, 1.0 + b * numpy.sin(2.0 * phase('root')), zero)
    joints = {
        'root': root,
        'pelvis': root + point(zero, -0.1 * one, zero),
        'head': root + point(0.3 * a * numpy.sin(phase('head')), 0.6 * one,
                             0.2 * a * numpy.cos(phase('head')))
    }
    for name, side in (('left_hand', -1.0), ('right_hand', 1.0)):
        angle = phase(name)
        joints[name] = root + point(side * (r + a * numpy.sin(angle)),
                                    0.35 + 0.5 * a * numpy.cos(angle),
                                    0.5 * a * numpy.sin(angle))
    for name, side in (('left_foot', -1.0), ('right_foot', 1.0)):
        angle = phase(name)
        joints[name] = point(side * (0.5 * r) * one,
                             0.25 * a * (1.0 + numpy.sin(angle)),
                             a * numpy.sin(angle))
    positions = numpy.zeros((n_frames, len(skeleton.joint_names), 3))
    for index, name in enumerate(skeleton.joint_names):
        # Joints beyond the default set ride on the root.
        positions[:, index] = joints.get(name, root)
    if jitter > 0.0:
        positions = positions + rng.normal(0.0, jitter, positions.shape)
    return Motion(fps, skeleton.joint_names, positions)


class MotionDataset(object):
    """Labeled motions of one layout. Iterates as (motion, condition_id) pairs."""

    def __init__(self, records, conditions, skeleton, meta=None):
        self.records = list(records)
        self.conditions = list(conditions)
        self.skeleton = skeleton
        self.meta = dict(meta or {})

    @property
    def n_conditions(self):
        return len(self.conditions)

    @property
    def layout(self):
        return self.records[0].motion.layout

    def motions(self, condition_id=None):
        return [r.motion for r in self.records if condition_id is None or r.condition_id == condition_id]

    def __iter__(self):
        for record in self.records:
            yield record.motion, record.condition_id

    def __len__(self):
        return len(self.records)


def build_conditions(families, buckets=(1.0,)):
    """Condition ids enumerate (family, amplitude bucket) in order."""
    conditions = []
    for family in families:
        for bucket in buckets:
            scaled = family.scaled(bucket)
            conditions.append(Condition(len(conditions), family.family_id, float(bucket), scaled.params))
    return conditions


def gen_dataset(spec, n_frames=DEFAULT_FRAMES, fps=DEFAULT_FPS, master_seed=0, filename=None,
                buckets=(1.0,), skeleton=None, jitter=DEFAULT_JITTER):
    """
    `spec` is a list of (MotionFamily, count). Generates `count` motions per
    (family, bucket) and, when `filename` is given, writes them as JSON lines
    next to a `.meta.json` sidecar.
    """
    skeleton = skeleton or SkeletonSpec()
    if not spec:
        raise ConfigError('dataset spec is empty')
    for family, count in spec:
        if int(count) < 1:
            raise ConfigError('%s: count must be at least 1, got %r' % (family.family_id, count))
    families = [family for family, _ in spec]
    conditions = build_conditions(families, buckets)
    records = []
    for condition in conditions:
        family, count = spec[[f.family_id for f in families].index(condition.family)]
        family = family.scaled(condition.bucket)
        for index in range(int(count)):
            seed = derive_seed(master_seed, condition.condition_id, index)
            motion = gen_motion(skeleton, family, n_frames, fps, seed, jitter)
            records.append(DatasetRecord(condition.condition_id, family.family_id, family.params, motion))
    meta = {
        'families': [dict(f.params, family=f.family_id) for f in families],
        'buckets': [float(b) for b in buckets],
        'conditions': [c._asdict() for c in conditions],
        'skeleton': skeleton.to_json(),
        'n_frames': int(n_frames),
        'fps': float(fps),
        'jitter': float(jitter),
        'master_seed': int(master_seed)
    }
    dataset = MotionDataset(records, conditions, skeleton, meta)
    if filename is not None:
        save_dataset(dataset, filename)
    logging.info('generated %d motions over %d conditions', len(records), len(conditions))
    return dataset


def meta_filename(filename):
    return os.path.splitext(filename)[0] + '.meta.json'


def save_dataset(dataset, filename):
    try:
        with atomic_write(filename) as fd:
            for record in dataset.records:
                fd.write(json.dumps({
                    'condition_id': record.condition_id,
                    'family': record.family,
                    'params': record.params,
                    'fps': record.motion.fps,
                    'positions': record.motion.positions.tolist()
                }, sort_keys=True))
                fd.write('\n')
        with atomic_write(meta_filename(filename)) as fd:
            fd.write(json.dumps(dataset.meta, sort_keys=True, indent=2))
            fd.write('\n')
    except (IOError, OSError) as exception:
        raise DatasetError('%s: %s' % (filename, exception))


def load_dataset(filename):
    try:
        with open(meta_filename(filename)) as fd:
            meta = json.load(fd)
        skeleton = SkeletonSpec.from_json(meta['skeleton'])
        conditions = [Condition(**c) for c in meta['conditions']]
    except (IOError, OSError, ValueError, KeyError, TypeError) as exception:
        raise DatasetError('%s: cannot read metadata: %s' % (meta_filename(filename), exception))
    records = []
    try:
        fd = open(filename)
    except (IOError, OSError) as exception:
        raise DatasetError('%s: %s' % (filename, exception))
    with fd:
        for line_number, line in enumerate(fd, 1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
                motion = Motion(payload['fps'], skeleton.joint_names, payload['positions'])
                records.append(DatasetRecord(int(payload['condition_id']), payload['family'],
                                             payload['params'], motion))
            except (ValueError, KeyError, TypeError) as exception:
                raise DatasetError('%s:%d: %s' % (filename, line_number, exception))
    if not records:
        raise DatasetError('%s: no records' % filename)
    layout = records[0].motion.layout
    for line_number, record in enumerate(records, 1):
        if record.motion.layout != layout:
            raise DatasetError('%s: record %d has %d frames, expected %d' % (
                filename, line_number, record.motion.n_frames, layout.n_frames))
        if not 0 <= record.condition_id < len(conditions):
            raise DatasetError('%s: record %d has unknown condition %d' % (
                filename, line_number, record.condition_id))
    return MotionDataset(records, conditions, skeleton, meta)
