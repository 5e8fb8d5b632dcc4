import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from approxlab.exactnum import FpSeries
from approxlab.groupmodels import (
    GroupModel,
    HaarQuadrature,
    ModelMismatch,
    group_op,
    haar_quadrature,
    modular_function,
    order_key,
    parse_model,
)

AXB = GroupModel.axb()
pos = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)
real = st.fractions(min_value=-20, max_value=20, max_denominator=20)
axb_points = st.builds(lambda a, b: AXB.point(a, b), pos, real)


@given(axb_points, axb_points, axb_points)
def test_axb_group_axioms(g, h, k):
    e = AXB.identity()
    assert (g * h) * k == g * (h * k)
    assert g * e == g == e * g
    assert g * g.inverse() == e
    # Delta is a homomorphism to the positive reals
    assert AXB.modular(g * h) == AXB.modular(g) * AXB.modular(h)


def test_axb_law_and_modular_function():
    g, h = AXB.point(2, 3), AXB.point(Fraction(1, 2), 1)
    assert g * h == AXB.point(1, 5)
    assert g.inverse() == AXB.point(Fraction(1, 2), Fraction(-3, 2))
    assert modular_function(AXB, AXB.point(2, 0)) == Fraction(1, 2)
    assert modular_function(GroupModel.rn(2), GroupModel.rn(2).point(3, 4)) == 1


@given(st.lists(st.integers(0, 2), min_size=8, max_size=8), st.lists(st.integers(0, 2), min_size=8, max_size=8))
def test_series_model_is_abelian_group(u, v):
    m = GroupModel.series(3, 4, 2)
    g = m.point(FpSeries(3, 4, u[:4]), FpSeries(3, 4, u[4:]))
    h = m.point(FpSeries(3, 4, v[:4]), FpSeries(3, 4, v[4:]))
    assert g + h == h + g
    assert (g - h) + h == g
    assert g + m.identity() == g


def test_model_mismatch():
    with pytest.raises(ModelMismatch):
        group_op(GroupModel.rn(2).point(1, 2), AXB.point(1, 2))


def test_descriptor_round_trip():
    for m in (GroupModel.rn(2), GroupModel.rn(3, 2), AXB, GroupModel.series(2, 16, 2)):
        assert parse_model(m.descriptor) == m
    with pytest.raises(ValueError):
        parse_model("SL2")


def test_order_key_prefers_small_then_positive():
    R = GroupModel.rn(1)
    pts = sorted([R.point(-1), R.point(2), R.point(1), R.point(0)], key=order_key)
    assert [p[0] for p in pts] == [0, 1, -1, 2]


def test_quadrature_left_translation_scales_by_modular_function():
    # integral of f(g t) dm(t) equals integral of f dm for left Haar measure
    g = (1.5, 0.4)

    def bump(a, b):
        return np.exp(-((np.log(a)) ** 2) * 4 - (b ** 2) * 4)

    def moved(a, b):
        return bump(g[0] * a, g[0] * b + g[1])

    q = HaarQuadrature(((0.05, 12.0), (-6.0, 6.0)), (1600, 800))
    base = haar_quadrature(AXB, bump, q)
    assert math.isclose(haar_quadrature(AXB, moved, q), base, rel_tol=1e-4)

    # right translation picks up Delta(g)^-1, which is a for g = (a, b)
    def right(a, b):
        return bump(a * g[0], a * g[1] + b)

    assert math.isclose(haar_quadrature(AXB, right, q), base * g[0], rel_tol=1e-4)


def test_quadrature_serial_and_threaded_agree_exactly():
    f = lambda a, b: np.cos(a) ** 2 + b ** 2  # noqa: E731
    serial = haar_quadrature(AXB, f, HaarQuadrature(((0.5, 2.0), (-1.0, 1.0)), 256, workers=1, strips=1))
    threaded = haar_quadrature(AXB, f, HaarQuadrature(((0.5, 2.0), (-1.0, 1.0)), 256, workers=4, strips=16))
    assert serial == threaded


def test_quadrature_converges_to_closed_form():
    # integral of a^-2 over [1, 2] x [0, 1] is 1/2
    errs = []
    for n in (16, 64, 256):
        v = haar_quadrature(AXB, lambda a, b: np.ones_like(a), HaarQuadrature(((1.0, 2.0), (0.0, 1.0)), n))
        errs.append(abs(v - 0.5))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-5


def test_series_haar_is_probability_average():
    m = GroupModel.series(2, 3, 1)
    assert haar_quadrature(m, lambda x: 1.0, None) == 1.0
    # indicator of t | x has mass 1/2
    assert haar_quadrature(m, lambda x: float(x.coef(0) == 0), None) == 0.5


def test_quadrature_rejects_bad_regions():
    with pytest.raises(ValueError):
        haar_quadrature(AXB, lambda a, b: a, HaarQuadrature(((0.0, 1.0), (0.0, 1.0)), 8))
    with pytest.raises(ValueError):
        haar_quadrature(GroupModel.rn(2), lambda a, b: a, HaarQuadrature(((1.0, 0.0), (0.0, 1.0)), 8))
