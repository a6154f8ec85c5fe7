""" common pytest fixtures """
import numpy as np
import pytest

from wavelife.problem import (
    InitialData,
    Nonlinearity,
    ProblemSpec,
    builtin_blowup_data,
)
from wavelife.quadrature import weight


def _sine(y):
    return np.sin(y)


def _minus_sine(y):
    return -np.sin(y)


def _cosine(y):
    return np.cos(y)


def _zero(s):
    return np.zeros_like(np.asarray(s, dtype=float))


@pytest.fixture
def bump_data():
    return builtin_blowup_data()


@pytest.fixture
def make_spec(bump_data):
    """ factory for problem specs with the builtin blow-up data """

    def make(a=1.0, p=2.0, eps=0.1, kind=Nonlinearity.ABS_POW,
             mode=ProblemSpec.BLOWUP, data=None):
        return ProblemSpec(a=a, eps=eps,
                           nonlinearity=Nonlinearity(kind, p),
                           data=data or bump_data,
                           mode=mode)
    return make


@pytest.fixture
def blowup_spec(make_spec):
    return make_spec(a=1.0, p=2.0, eps=0.5)


@pytest.fixture
def linear_spec(bump_data):
    """ a spec with F = 0 """
    return ProblemSpec(a=1.0, eps=0.5,
                       nonlinearity=Nonlinearity.custom(_zero, _zero, 2.0,
                                                        0.0),
                       data=bump_data,
                       mode=ProblemSpec.BLOWUP)


class Manufactured(object):
    """
    The exact solution ``exp(-t) * sin(x)``, with the forcing that makes it
    solve the weighted equation.
    """

    def __init__(self, spec):
        self.spec = spec

    def exact(self, xs, t):
        return np.exp(-t) * np.sin(xs)

    def forcing(self, xs, t):
        u = self.exact(xs, t)
        return (2 * np.exp(-t) * np.sin(xs) -
                self.spec.nonlinearity(u) * weight(self.spec.a, xs))


@pytest.fixture
def manufactured():
    data = InitialData(_sine, _minus_sine, g_primitive=_cosine,
                       name='sine', cutoff=4.0)
    spec = ProblemSpec(a=1.0, eps=1.0,
                       nonlinearity=Nonlinearity(Nonlinearity.ABS_POW, 2.0),
                       data=data,
                       mode=ProblemSpec.EXISTENCE)
    return Manufactured(spec)
