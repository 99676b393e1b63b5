# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Adam on flat numpy vectors, with explicit state so runs stay independent."""

try:
    import numpy
except ImportError:
    raise RuntimeError('cannot import numpy, make sure numpy package is installed.')

from ..errors import DimensionError


ADAM_EPSILON = 1e-8


class AdamState(object):
    """First and second moment estimates plus the step counter."""

    def __init__(self, m, v, step=0):
        self.m = numpy.asarray(m, dtype=numpy.float64)
        self.v = numpy.asarray(v, dtype=numpy.float64)
        self.step = int(step)

    @classmethod
    def zeros(cls, size):
        return cls(numpy.zeros(size), numpy.zeros(size), 0)

    def __repr__(self):
        return 'AdamState(step=%d, size=%d)' % (self.step, self.m.size)


def adam_step(state, grad, params, cfg):
    """
    One bias-corrected Adam update of `params` with learning rate cfg.lr and
    betas cfg.adam_betas. Returns (params', state'); the inputs are untouched.
    """
    grad = numpy.asarray(grad, dtype=numpy.float64)
    params = numpy.asarray(params, dtype=numpy.float64)
    if grad.shape != params.shape or state.m.shape != params.shape:
        raise DimensionError('Adam shapes differ: params %s, grad %s, state %s' % (
            params.shape, grad.shape, state.m.shape))
    beta1, beta2 = cfg.adam_betas
    step = state.step + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    params = params - cfg.lr * m_hat / (numpy.sqrt(v_hat) + ADAM_EPSILON)
    return params, AdamState(m, v, step)
