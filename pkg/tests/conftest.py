import random
from fractions import Fraction

import pytest

from maskprop.gadget import elaborate, fixture, fixture_path
from maskprop.spectral import DyadicMatrix


def M(rows):
    return DyadicMatrix.from_entries(rows)


def walsh_by_definition(f, n, m):
    """Independent reference: W[w][a] = 2^-n sum_x (-1)^(w.f(x) + a.x), as
    Fractions, with plain Python bit counting."""
    def par(v):
        return bin(v).count("1") & 1
    return [[Fraction(sum((-1) ** (par(w & f(x)) ^ par(a & x)) for x in range(1 << n)), 1 << n)
             for a in range(1 << n)] for w in range(1 << m)]


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(params=["refresh2", "dom2", "encoder3", "identity2"])
def fixture_name(request):
    return request.param


def netlist(name):
    return elaborate(fixture(name))


@pytest.fixture
def fx_path():
    return fixture_path
