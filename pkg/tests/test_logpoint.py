import math

import numpy as np
from hypothesis import given, strategies as st

from powerinterp.logpoint import ORIGIN, LogPoint, angle_diff, log_residual, log_sub, wrap_angle

finite = st.floats(-700, 700)
angles = st.floats(-50, 50)


@given(finite, angles)
def test_round_trip_complex(s, t):
    z = LogPoint(s, t)
    back = LogPoint.from_complex(z.to_complex())
    assert abs(back.log_mod - z.log_mod) <= 1e-12 * max(1.0, abs(s))
    assert abs(angle_diff(back.arg, z.arg)) <= 1e-12 * max(1.0, abs(t))


@given(finite, angles, finite, angles)
def test_product_adds_logs(s1, t1, s2, t2):
    a, b = LogPoint(s1, t1), LogPoint(s2, t2)
    p = a * b
    assert p.log_mod == s1 + s2
    assert abs(angle_diff(p.arg, t1 + t2)) < 1e-9


def test_wrap_angle_range():
    x = np.linspace(-20, 20, 1001)
    w = wrap_angle(x)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(0.3) == 0.3


def test_origin():
    assert ORIGIN.is_origin
    assert ORIGIN.to_complex() == 0
    assert LogPoint.from_complex(0) == ORIGIN
    assert (ORIGIN ** 3).is_origin


def test_log_sub_huge_moduli():
    # (e^1000 + 1) - e^1000 would be lost; e^1000 - e^999 is fine in log form
    s, t = log_sub(1000.0, 0.0, 999.0, 0.0)
    assert abs(s - (1000 + math.log(1 - math.exp(-1)))) < 1e-12
    assert abs(t) < 1e-15


def test_log_sub_matches_complex():
    rng = np.random.default_rng(1)
    z1 = rng.normal(size=50) + 1j * rng.normal(size=50)
    z2 = rng.normal(size=50) + 1j * rng.normal(size=50)
    a = [LogPoint.from_complex(z) for z in z1]
    b = [LogPoint.from_complex(z) for z in z2]
    for x, y, zz1, zz2 in zip(a, b, z1, z2):
        d = (x - y)
        assert abs(d.to_complex() - (zz1 - zz2)) < 1e-12 * max(1, abs(zz1 - zz2))


def test_log_residual_wraps():
    assert log_residual(0.0, math.pi - 1e-13, 0.0, -math.pi + 1e-13) < 1e-12
