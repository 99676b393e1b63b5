# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Motion clips: fixed-rate sequences of 3D joint positions."""

import json
import math

from collections import namedtuple

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from .errors import MotionError, MotionFormatError, MotionTooShortError
from .util import atomic_write


MIN_FRAMES = 4


# Everything a denoiser needs to turn a flat vector back into a Motion.
MotionLayout = namedtuple('MotionLayout', 'n_frames joint_names fps')


class Motion(object):
    """
    A T x J x 3 array of joint positions in meters sampled at `fps`.

    Positions are stored as a read-only float64 copy, so a Motion can be shared
    between threads.
    """

    def __init__(self, fps, joint_names, positions):
        positions = numpy.array(positions, dtype=numpy.float64)
        if positions.ndim != 3 or positions.shape[2] != 3:
            raise MotionError('positions must be T x J x 3, got shape %s' % (positions.shape,))
        if positions.shape[0] < MIN_FRAMES:
            raise MotionTooShortError(
                'motion has %d frames, at least %d are required' % (positions.shape[0], MIN_FRAMES))
        if positions.shape[1] < 1:
            raise MotionError('motion has no joints')
        joint_names = [str(name) for name in joint_names]
        if len(joint_names) != positions.shape[1]:
            raise MotionError('%d joint names for %d joints' % (len(joint_names), positions.shape[1]))
        if len(set(joint_names)) != len(joint_names):
            raise MotionError('joint names must be unique')
        if not numpy.all(numpy.isfinite(positions)):
            raise MotionError('motion contains non-finite positions')
        fps = float(fps)
        if not fps > 0.0 or not math.isfinite(fps):
            raise MotionError('fps must be positive, got %r' % fps)
        positions.setflags(write=False)
        self.fps = fps
        self.joint_names = joint_names
        self.positions = positions

    @property
    def n_frames(self):
        return self.positions.shape[0]

    @property
    def n_joints(self):
        return self.positions.shape[1]

    @property
    def layout(self):
        return MotionLayout(self.n_frames, tuple(self.joint_names), self.fps)

    def flatten(self):
        return self.positions.reshape(-1).copy()

    @classmethod
    def from_flat(cls, vector, layout):
        vector = numpy.asarray(vector, dtype=numpy.float64)
        n_joints = len(layout.joint_names)
        expected = layout.n_frames * n_joints * 3
        if vector.size != expected:
            raise MotionError('flat motion has %d values, layout needs %d' % (vector.size, expected))
        return cls(layout.fps, layout.joint_names, vector.reshape(layout.n_frames, n_joints, 3))

    def with_positions(self, positions):
        return Motion(self.fps, self.joint_names, positions)

    def translated(self, offset):
        return self.with_positions(self.positions + numpy.asarray(offset, dtype=numpy.float64))

    def scaled(self, factor, about_centroid=False):
        """Scale positions about the origin, or about each frame's centroid."""
        if about_centroid:
            centroid = self.positions.mean(axis=1, keepdims=True)
            return self.with_positions(centroid + factor * (self.positions - centroid))
        return self.with_positions(factor * self.positions)

    def joint_index(self, name):
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise MotionError('unknown joint %r' % name)

    def to_json(self):
        return {
            'fps': self.fps,
            'joint_names': list(self.joint_names),
            'frames': self.positions.tolist()
        }

    def dumps(self):
        return json.dumps(self.to_json())

    def save_to_disk(self, filename):
        """Save this motion as JSON. Floats are written at full precision."""
        with atomic_write(filename) as fd:
            fd.write(self.dumps())
            fd.write('\n')

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict):
            raise MotionFormatError('motion document must be an object')
        for key in ('fps', 'joint_names', 'frames'):
            if key not in payload:
                raise MotionFormatError('missing field %r' % key)
        frames = payload['frames']
        if not isinstance(frames, list) or not frames:
            raise MotionFormatError('field "frames" must be a non-empty list')
        for index, frame in enumerate(frames):
            if not isinstance(frame, list):
                raise MotionFormatError('frames[%d] must be a list of joints' % index)
            for joint, point in enumerate(frame):
                if not isinstance(point, list) or len(point) != 3:
                    raise MotionFormatError('frames[%d][%d] must be [x, y, z]' % (index, joint))
                for value in point:
                    if isinstance(value, bool) or not isinstance(value, (int, float)):
                        raise MotionFormatError('frames[%d][%d] holds a non-number' % (index, joint))
        if len(set(len(frame) for frame in frames)) != 1:
            raise MotionFormatError('field "frames" has frames with different joint counts')
        if not isinstance(payload['joint_names'], list):
            raise MotionFormatError('field "joint_names" must be a list')
        try:
            fps = float(payload['fps'])
        except (TypeError, ValueError):
            raise MotionFormatError('field "fps" must be a number')
        return cls(fps, payload['joint_names'], frames)

    @classmethod
    def loads(cls, text):
        try:
            payload = json.loads(text)
        except ValueError as exception:
            raise MotionFormatError('invalid JSON: %s' % exception)
        return cls.from_json(payload)

    @classmethod
    def load(cls, filename):
        try:
            with open(filename) as fd:
                text = fd.read()
        except (IOError, OSError) as exception:
            raise MotionFormatError('%s: %s' % (filename, exception))
        try:
            return cls.loads(text)
        except MotionError as exception:
            raise type(exception)('%s: %s' % (filename, exception))

    def __eq__(self, other):
        if not isinstance(other, Motion):
            return NotImplemented
        return (self.fps == other.fps and self.joint_names == other.joint_names
                and self.positions.shape == other.positions.shape
                and numpy.array_equal(self.positions, other.positions))

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __len__(self):
        return self.n_frames

    def __repr__(self):
        return 'Motion(%d frames, %d joints, %g fps)' % (self.n_frames, self.n_joints, self.fps)


class EndEffectorSet(object):
    """Joint indices over which the Effort channels are summed. Masses are all 1."""

    def __init__(self, indices):
        indices = [int(i) for i in indices]
        if not indices:
            raise MotionError('end-effector set is empty')
        if len(set(indices)) != len(indices):
            raise MotionError('duplicate end-effector indices %s' % indices)
        self.indices = tuple(indices)

    @classmethod
    def from_names(cls, joint_names, names):
        joint_names = list(joint_names)
        missing = [n for n in names if n not in joint_names]
        if missing:
            raise MotionError('unknown end effectors %s' % missing)
        return cls(joint_names.index(n) for n in names)

    def validate(self, n_joints):
        for index in self.indices:
            if index < 0 or index >= n_joints:
                raise MotionError('end effector %d outside skeleton of %d joints' % (index, n_joints))
        return self

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __repr__(self):
        return 'EndEffectorSet(%s)' % list(self.indices)
