import itertools
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxlab.exactnum import QuadElem
from approxlab.pointsets import ModelSet
from approxlab.zariski import (
    DENSITY_CAVEAT,
    MonomialBasis,
    NonlinearClosure,
    affine_hull,
    coset_cover_verifier,
    density_certificate,
    evaluate,
    format_polynomial,
    vanishing_basis,
)

F = Fraction
LAM = ModelSet(2, -1, 1)

point_sets = st.lists(
    st.tuples(st.fractions(-5, 5, max_denominator=3), st.fractions(-5, 5, max_denominator=3)),
    min_size=1,
    max_size=9,
    unique=True,
)


def test_monomial_basis_order_and_size():
    mb = MonomialBasis(2, 2)
    assert mb.exponents == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    for n, d in [(1, 4), (3, 3), (4, 2)]:
        assert len(MonomialBasis(n, d).exponents) == len(MonomialBasis(n, d)) == comb(n + d, d)


def test_integer_row_is_positive_multiple():
    mb = MonomialBasis(2, 3)
    p = (F(1, 2), F(-2, 3))
    ratio = {a / b for a, b in zip(mb.integer_row(p), mb.evaluate_row(p))}
    assert len(ratio) == 1 and ratio.pop() > 0
    assert mb.integer_row((QuadElem(0, 1, 2), 1)) is None


def test_vanishing_examples():
    vb = vanishing_basis([(0, 0)], 1)
    assert vb.polynomials() == ["(1)*x", "(1)*y"] and vb.hilbert == 1
    vb = vanishing_basis([(0, 0), (1, 0), (2, 0)], 1)
    assert vb.polynomials() == ["(1)*y"] and vb.hilbert == 2
    grid = list(itertools.product(range(3), repeat=2))
    vb = vanishing_basis(grid, 2)
    assert vb.basis == [] and vb.hilbert == 6


def test_vanishing_errors():
    with pytest.raises(ValueError):
        vanishing_basis([(0, 0), (0, 0)], 1)
    with pytest.raises(ValueError):
        vanishing_basis([(QuadElem(0, 1, 2), 0), (QuadElem(0, 1, 3), 0)], 1)


def test_quadratic_field_basis_vanishes():
    r2 = QuadElem(0, 1, 2)
    pts = [(r2 * k, r2 * k + 1) for k in range(4)]  # on the line y = x + 1
    vb = vanishing_basis(pts, 1)
    assert len(vb.basis) == 1 and vb.vanishes_on(pts)
    assert vb.field == "Q(sqrt 2)"


def test_density_examples():
    grid = list(itertools.product(range(5), repeat=2))
    assert density_certificate(grid, 3).verdict == "granted"
    line = [(1, k) for k in range(-5, 6)]
    cert = density_certificate(line, 1, names=("a", "b"))
    assert cert.verdict == "refuted"
    # witness proportional to a - 1: coefficients on (1, a, b)
    c = cert.witness
    assert c[2] == 0 and c[0] == -c[1] and c[0] != 0
    assert cert.witness_text == "(1) + (-1)*a"
    assert density_certificate([(0, 0), (1, 0)], 1).verdict == "inconclusive"
    assert density_certificate(LAM.index_patch(20).points, 2).verdict == "granted"


def test_granted_reports_caveat():
    d = density_certificate(list(itertools.product(range(3), repeat=2)), 1).as_dict()
    assert d["verdict"] == "granted(1)" and d["caveat"] == DENSITY_CAVEAT


def test_square_of_granted_set_is_granted():
    pts = LAM.index_patch(6).points
    square = {a + b for a in pts for b in pts}
    for d in (1, 2):
        assert density_certificate(pts, d).granted
        assert density_certificate(square, d).granted


def test_affine_hull_examples():
    base, dirs = affine_hull([(1, k) for k in range(4)])
    assert base == (1, 0) and dirs == [[0, 1]]
    _, dirs = affine_hull([(0, 0), (1, 0), (0, 1)])
    assert dirs == [[1, 0], [0, 1]]
    assert affine_hull([(3, 4)]) == ((3, 4), [])


def test_coset_cover_examples():
    two_lines = [(k, 0) for k in range(-6, 7)] + [(k, 1) for k in range(-6, 7)]
    cc = coset_cover_verifier(two_lines, 2)
    assert cc.H == [[1, 0]] and cc.g == (0, 0) and cc.F == [(0, 0), (0, 1)]
    assert cc.inclusions_verified and cc.sample_checked > 0
    grid = list(itertools.product(range(-3, 4), repeat=2))
    cc = coset_cover_verifier(grid, 2)
    assert len(cc.H) == 2 and cc.F == [(0, 0)]
    cc = coset_cover_verifier(LAM.index_patch(20).points, 2)
    assert len(cc.H) == 2 and len(cc.F) == 1


def test_nonlinear_closure_reported():
    parabola = [(k, k * k) for k in range(-4, 5)]
    with pytest.raises(NonlinearClosure):
        coset_cover_verifier(parabola, 2)


def test_format_polynomial():
    mb = MonomialBasis(2, 2)
    assert format_polynomial([0, 0, 0, 1, -2, 0], mb) == "(1)*x^2 + (-2)*x*y"
    assert format_polynomial([0] * 6, mb) == "0"


# -- properties ---------------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(point_sets)
def test_hilbert_function_properties(pts):
    hs = [vanishing_basis(pts, d).hilbert for d in range(len(pts) + 1)]
    assert all(a <= b for a, b in zip(hs, hs[1:]))
    for d, h in enumerate(hs):
        assert h <= min(len(pts), comb(2 + d, d))
        if d >= len(pts) - 1:
            assert h == len(pts)


@settings(max_examples=60, deadline=None)
@given(point_sets, st.integers(1, 3))
def test_basis_vanishes_pointwise(pts, d):
    vb = vanishing_basis(pts, d)
    for v in vb.basis:
        for p in pts:
            assert evaluate(v, vb.monomials, p) == 0


def test_granted_is_monotone_under_supersets():
    rng = random.Random(11)
    for _ in range(30):
        pts = list({(F(rng.randint(-6, 6)), F(rng.randint(-6, 6))) for _ in range(rng.randint(3, 12))})
        sub = pts[: max(1, len(pts) // 2)]
        for d in (1, 2):
            if density_certificate(sub, d).granted:
                assert density_certificate(pts, d).granted
