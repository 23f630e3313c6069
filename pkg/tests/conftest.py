import numpy as np
import pytest

from lgforms.interaction import gep, identity_interaction, sep
from lgforms.measure import SiteMeasure, geometric_measure, uniform_measure


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def sep1():
    return sep(1)


@pytest.fixture
def sep2():
    return sep(2)


@pytest.fixture
def gep2():
    return gep(2)


@pytest.fixture
def gep3():
    return gep(3)


@pytest.fixture
def identity2():
    return identity_interaction(2)


@pytest.fixture
def nu_uniform_sep2(sep2):
    return uniform_measure(sep2.space)


@pytest.fixture
def nu_geometric_gep2(gep2):
    return geometric_measure(gep2.space, 0.5)


@pytest.fixture
def nu_skewed_gep2(gep2):
    return SiteMeasure(gep2.space, np.array([0.5, 0.25, 0.25]))
