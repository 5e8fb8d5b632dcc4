import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxlab.groupmodels import GroupModel, HaarQuadrature, haar_quadrature
from approxlab.unimod import b2_density, b3_weights, dense_sequence, example3_report, tent_bump

AXB = GroupModel.axb()


def test_weights_zero_b():
    w = b3_weights([0.0] * 10)
    assert w.sum_ab == 0
    ratios = [a / b for a, b in zip(w.weights, w.weights[1:])]
    assert all(math.isclose(r, 2.0) for r in ratios)


def test_weights_geometric_b():
    w = b3_weights([2.0 ** n for n in range(1, 21)])
    # each a_n b_n is at most c 2^-n, so the sum stays below c
    assert abs(w.sum_a - 1) <= 1e-12 and w.sum_ab <= w.c * (1 - 2.0 ** -20)
    assert all(a * b <= w.c * 2.0 ** -n for n, (a, b) in enumerate(zip(w.weights, w.b), start=1))


def test_weights_linear_b():
    b = list(range(1, 31))
    w = b3_weights(b)
    # partial sum against an independent recomputation
    raw = [2.0 ** -n / (1 + n) for n in b]
    c = 1 / math.fsum(raw)
    assert math.isclose(w.sum_ab, math.fsum(c * r * n for r, n in zip(raw, b)), rel_tol=1e-12)
    assert w.tail_bound == c * 2.0 ** -30


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1e12, allow_nan=False), min_size=1, max_size=80))
def test_weights_property(b):
    w = b3_weights(b)
    assert all(a > 0 for a in w.weights)
    assert abs(w.sum_a - 1) <= 1e-12
    assert w.sum_ab <= w.c * (1 + 1e-12)


def test_weights_reject_negative():
    with pytest.raises(ValueError):
        b3_weights([1.0, -1.0])
    with pytest.raises(ValueError):
        b3_weights([])


def test_bump_has_unit_haar_mass():
    phi = tent_bump(0.3)
    q = HaarQuadrature(phi.box, 800)
    assert math.isclose(haar_quadrature(AXB, phi, q), 1.0, rel_tol=1e-5)


def test_dense_sequence_is_deterministic():
    s = dense_sequence(64)
    assert len(s) == 64 and s == dense_sequence(64)


@pytest.fixture(scope="module")
def report():
    return b2_density()


def test_density_checks(report):
    assert report.passed, report.checks
    assert abs(report.mass - 1) <= 1e-6
    assert report.modular_mass >= 1.01
    assert abs(report.modular_mass - report.closed_form) <= 2e-6 * report.closed_form


def test_density_parameters(report):
    spec = report.spec
    assert spec.alpha * spec.gamma > 0.5
    assert (1 - spec.alpha) * spec.gamma * float(1 / AXB.modular(spec.s)) > 0.5


def test_density_against_plain_quadrature(report):
    # the term-wise integrals agree with one coarse box quadrature of rho
    q = HaarQuadrature(((0.05, 40.0), (-30.0, 30.0)), (1000, 600))
    whole = haar_quadrature(AXB, report.spec.rho, q)
    assert abs(whole - report.mass) < 2e-2


def test_density_rejects_unimodular():
    with pytest.raises(ValueError):
        b2_density(GroupModel.rn(2))


def test_rho_positive_on_grid(report):
    xs, ys = np.meshgrid(np.linspace(0.5, 2.2, 30), np.linspace(-1.1, 1.1, 30), indexing="ij")
    assert (report.spec.rho(xs, ys) > 0).all()


def test_vertical_line_report():
    rep = example3_report()
    assert rep.passed
    assert rep.packing == 1
    assert rep.emptiness.found
    w = rep.density.witness
    assert w[0] == -w[1] != 0 and w[2] == 0
