import math

import pytest

from wsawlab import enclosure as ival
from wsawlab.enclosure import Enclosure


def test_invariants():
    with pytest.raises(ValueError):
        Enclosure(1.0, 0.5, 4, True)
    e = Enclosure(0.5, 1.0, 4, True)
    assert e.width() == 0.5
    assert e.contains_value(0.75) and not e.contains_value(1.5)


def test_add_and_scale():
    a = Enclosure(1.0, 2.0, 5, True)
    b = Enclosure(0.5, 0.75, 8, True)
    s = ival.add(a, b)
    assert (s.lower, s.upper, s.truncation_N) == (1.5, 2.75, 5)
    assert ival.scale(a, 2.0).upper == 4.0
    assert ival.scale(a, 0.0).upper == 0.0


def test_mul_nonneg():
    a = Enclosure(1.0, 2.0, 5, True)
    b = Enclosure(3.0, 4.0, 5, True)
    m = ival.mul(a, b)
    assert (m.lower, m.upper) == (3.0, 8.0)
    with pytest.raises(ValueError):
        ival.mul(Enclosure(-1.0, 1.0, 5, True), b)


def test_sub_keeps_bracket():
    a = Enclosure(1.0, 2.0, 5, True)
    b = Enclosure(0.25, 0.5, 5, True)
    s = ival.sub(a, b)
    assert (s.lower, s.upper) == (0.5, 1.75)


def test_inf_propagation():
    a = Enclosure(1.0, math.inf, 5, False)
    b = Enclosure(2.0, 3.0, 5, True)
    assert ival.add(a, b).upper == math.inf
    assert not ival.add(a, b).rigorous
    assert ival.sub(b, a).lower == -math.inf
    assert ival.mul(a, b).upper == math.inf


def test_pow_int():
    a = Enclosure(0.5, 0.6, 5, True)
    p = ival.pow_int(a, 3)
    assert p.lower == 0.5**3 and p.upper == 0.6**3
    assert ival.pow_int(a, 0).lower == 1.0


def test_max_of():
    es = [Enclosure(0.1, 0.4, 5, True), Enclosure(0.2, 0.3, 5, True)]
    m = ival.max_of(es)
    assert (m.lower, m.upper) == (0.2, 0.4)


def test_add_many_empty():
    z = ival.add_many([])
    assert z.lower == z.upper == 0.0
