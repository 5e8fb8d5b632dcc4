from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxlab.groupmodels import GroupModel
from approxlab.pointsets import (
    CertificateFailure,
    CoverNotFound,
    FinitePatch,
    Lattice,
    ModelSet,
    NotEvaluable,
    ScaleInsufficient,
    UnionNotDense,
    approx_subgroup_certificate,
    commensurability_witness,
    coset_split,
    delone_parameters,
    dump_modelset,
    dump_patch,
    load_modelset,
    load_patch,
    membership,
    modelset_product,
    patch_product,
    union_density_locator,
)

R1, R2 = GroupModel.rn(1), GroupModel.rn(2)
LAM = ModelSet(2, -1, 1)
Z = Lattice(R1, ((1,),))
TWO_Z = Lattice(R1, ((2,),))


def box1(w):
    return ((Fraction(-w), Fraction(w)),)


def box2(w):
    return ((Fraction(-w), Fraction(w)), (Fraction(-w), Fraction(w)))


# -- patches and products -----------------------------------------------------------------


def test_patch_sum_of_small_set():
    A = FinitePatch.from_coords(R1, [(-1,), (0,), (1,)])
    S = patch_product(A, A)
    assert sorted(p[0] for p in S) == [-2, -1, 0, 1, 2]
    assert not S.complete


@given(st.sets(st.integers(-6, 6), min_size=1, max_size=6))
def test_patch_product_absorbs_and_stays_symmetric(xs):
    sym = sorted(set(xs) | {-x for x in xs} | {0})
    A = FinitePatch.from_coords(R1, [(x,) for x in sym])
    S = patch_product(A, A)
    assert all(S.contains(p) for p in A)
    assert all(S.contains(-p) for p in S)


def test_patch_rejects_duplicates_and_outside_points():
    with pytest.raises(ValueError):
        FinitePatch(R1, (R1.point(1), R1.point(1)))
    with pytest.raises(ValueError):
        FinitePatch.from_coords(R1, [(5,)], box1(2))
    P = FinitePatch.from_coords(R1, [(0,)], box1(2))
    with pytest.raises(NotEvaluable):
        P.points_in(box1(3))


def test_product_model_mismatch():
    with pytest.raises(ValueError):
        patch_product(FinitePatch.from_coords(R1, [(0,)]), FinitePatch.from_coords(R2, [(0, 0)]))


# -- model sets -----------------------------------------------------------------------------


def test_membership_examples():
    assert membership(LAM, LAM.model.point(1, 1))
    assert membership(LAM, LAM.lattice_point(1, 1))  # (1 + sqrt2, 1 - sqrt2)
    assert not membership(LAM, LAM.model.point(3, 3))
    assert not membership(LAM, LAM.model.point(Fraction(1, 2), Fraction(1, 2)))
    assert membership(LAM, LAM.model.identity())
    assert not ModelSet(2, Fraction(1, 2), 1).contains(LAM.model.identity())


def test_points_in_matches_brute_force():
    X = 12
    got = set(LAM.points_in(LAM.physical_box(X)))
    brute = set()
    for m in range(-40, 41):
        for n in range(-40, 41):
            g = LAM.lattice_point(m, n)
            x = g.coords[0]
            if LAM.contains(g) and -X <= float(x) <= X:
                brute.add(g)
    assert got == brute


def test_square_window_arithmetic_with_decompositions():
    sq, checks = modelset_product(LAM, LAM, "product", check_window=10)
    assert (sq.lo, sq.hi) == (-2, 2)
    decs = checks[0].decompositions
    assert decs and len(decs) == checks[0].reverse_points
    for t, a, b in decs:
        assert a + b == t and LAM.contains(a) and LAM.contains(b)


def test_inverse_and_power():
    inv, _ = modelset_product(LAM, op="inverse", check_window=10)
    assert inv == LAM
    cube, checks = modelset_product(LAM, op="power", k=3, check_window=6)
    assert (cube.lo, cube.hi) == (-3, 3) and len(checks) == 2


def test_product_lattice_mismatch():
    with pytest.raises(ValueError):
        modelset_product(LAM, ModelSet(3, -1, 1))


def test_decomposition_search_rejects_a_too_wide_window():
    # the cross-check would catch a wrong window rule: (3, 3) is in the [-5, 5]
    # strip but is not a sum of two members of the [-1, 1] strip
    from approxlab.pointsets import _decompose

    assert _decompose(LAM.model.point(3, 3), LAM, LAM, 6, 3) is None
    assert _decompose(LAM.model.point(2, 2), LAM, LAM, 6, 3) is not None


# -- certificates -----------------------------------------------------------------------------


def test_certificate_examples():
    assert approx_subgroup_certificate(Lattice(R2, ((1, 0), (0, 1))), 5).points == (R2.identity(),)
    A = FinitePatch.from_coords(R1, [(-1,), (0,), (1,)])
    assert set(approx_subgroup_certificate(A).points) == {R1.point(x) for x in (-1, 0, 1)}
    w = approx_subgroup_certificate(LAM, 10)
    assert set(w.points) == {LAM.model.point(x, x) for x in (0, 1, -1)}
    assert w.verified and w.stable and w.sizes == (3, 3)


def test_certificate_preconditions():
    with pytest.raises(CertificateFailure):
        approx_subgroup_certificate(FinitePatch.from_coords(R1, [(0,), (1,)]))
    with pytest.raises(CertificateFailure):
        approx_subgroup_certificate(ModelSet(2, Fraction(1, 2), 1), 5)


def test_cover_not_found_reports_point():
    A = FinitePatch.from_coords(R1, [(-1,), (0,), (1,)])
    with pytest.raises(CoverNotFound) as info:
        approx_subgroup_certificate(A, pool=[R1.identity()])
    assert info.value.point in (R1.point(2), R1.point(-2))


def test_certificate_covers_cube_by_F_squared():
    w = approx_subgroup_certificate(LAM, 8)
    F2 = {f + g for f in w.points for g in w.points}
    cube, _ = modelset_product(LAM, op="power", k=3, check_window=8)
    for p in cube.points_in(cube.physical_box(8)):
        assert any(LAM.contains(p - f) for f in F2)


# -- Delone parameters ------------------------------------------------------------------------


def test_integers_delone():
    dp = delone_parameters(Z, box1(10))
    assert dp.packing == 1 and dp.covering == Fraction(1, 2) and not dp.infinite


def test_strip_is_not_relatively_dense():
    dp = delone_parameters(LAM, box2(8))
    assert dp.infinite
    probe = dp.far_probe
    near = LAM.points_in(((probe[0] - dp.cap, probe[0] + dp.cap), (probe[1] - dp.cap, probe[1] + dp.cap)))
    assert near == []


def test_projection_is_relatively_dense():
    xs = [(p.coords[0],) for p in LAM.points_in(LAM.physical_box(20))]
    model = GroupModel.rn(1, 2)
    P = FinitePatch(model, tuple(model.point(*x) for x in xs), ((Fraction(-20), Fraction(20)),))
    dp = delone_parameters(P, box1(20))
    assert not dp.infinite
    # exhaustive gap scan: half the largest gap bounds the covering radius
    vals = sorted(float(x[0]) for x in xs)
    assert float(dp.covering) <= max(b - a for a, b in zip(vals, vals[1:])) / 2 + 0.25


@settings(max_examples=10, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5))
def test_packing_translation_invariant(a, b):
    pts = [(0, 0), (2, 1), (3, 3), (-1, 2), (1, -2)]
    P = FinitePatch.from_coords(R2, pts, box2(6))
    Q = FinitePatch.from_coords(R2, [(x + a, y + b) for x, y in pts], box2(12))
    assert delone_parameters(P, box2(6)).packing == delone_parameters(Q, box2(12)).packing


def test_delone_deterministic():
    assert delone_parameters(LAM, box2(8)).as_dict() == delone_parameters(LAM, box2(8)).as_dict()


def test_empty_set_rejected():
    P = FinitePatch.from_coords(R1, [(9,)], box1(10))
    with pytest.raises(ValueError):
        delone_parameters(P, box1(5))


# -- commensurability -------------------------------------------------------------------------


def test_commensurability_examples():
    f1, f2 = commensurability_witness(Z, TWO_Z, 10)
    assert f1.points == (R1.point(0), R1.point(1)) and f2.points == (R1.point(0),)
    f1, f2 = commensurability_witness(Z, Z, 10)
    assert f1.points == f2.points == (R1.point(0),)
    f1, f2 = commensurability_witness(Lattice(R2, ((1, 0), (0, 1))), Lattice(R2, ((1, 0), (0, 2))), 3)
    assert set(f1.points) == {R2.point(0, 0), R2.point(0, 1)} and f2.points == (R2.point(0, 0),)


@pytest.mark.parametrize("a,b,c", [(1, 2, 4), (2, 3, 6), (1, 3, 9)])
def test_commensurability_symmetric_and_transitive(a, b, c):
    A, B, C = (Lattice(R1, ((k,),)) for k in (a, b, c))
    X = 36
    ab, ba = commensurability_witness(A, B, X)
    ba2, ab2 = commensurability_witness(B, A, X)
    assert set(ab.points) == set(ab2.points) and set(ba.points) == set(ba2.points)
    cb, _ = commensurability_witness(B, C, X)  # B subset C + F3
    composed = {f + g for f in ab.points for g in cb.points}
    for p in A.points_in(box1(X)):
        assert any(C.contains(p - f) for f in composed)


# -- coset splits and the locator ---------------------------------------------------------------


def two_line_patch(first):
    pts = list(first) + [(k, 1) for k in range(-10, 11)]
    return FinitePatch.from_coords(R2, pts, box2(10))


def test_coset_split_examples():
    reps = [R2.point(0, 0), R2.point(0, 1)]
    full = two_line_patch([(k, 0) for k in range(-10, 11)])
    assert [r.relatively_dense for r in coset_split(full, [[1, 0]], reps)] == [True, True]
    single = FinitePatch.from_coords(R2, [(k, 1) for k in range(-10, 11)], box2(10))
    assert coset_split(single, [[1, 0]], [R2.point(0, 1)])[0].relatively_dense
    sparse = two_line_patch([(0, 0), (5, 0)])
    assert [r.relatively_dense for r in coset_split(sparse, [[1, 0]], reps)] == [False, True]


def test_coset_split_errors():
    P = two_line_patch([(0, 0)])
    with pytest.raises(CoverNotFound):
        coset_split(P, [[1, 0]], [R2.point(0, 0)])
    with pytest.raises(ValueError):
        coset_split(P, [[1, 0], [2, 0]], [R2.point(0, 0)])


def test_locator_examples():
    W = box1(512)
    pw = FinitePatch(R1, tuple(R1.point(s * 2 ** k) for k in range(10) for s in (1, -1)), W)
    three = Lattice(R1, ((3,),)).patch(W)
    two = TWO_Z.patch(W)
    assert union_density_locator([pw, three], W)[0] == 2
    assert union_density_locator([two, pw], W)[0] == 1
    z = Z.patch(box1(64))
    assert union_density_locator([z, z], box1(64))[0] == 1


def test_locator_needs_dense_union():
    W = box1(512)
    far = FinitePatch(R1, tuple(R1.point(s * k) for k in (400, 500) for s in (1, -1)), W)
    with pytest.raises(UnionNotDense):
        union_density_locator([far, far], W)
    sparse = FinitePatch(R1, tuple(R1.point(s * 100 * k) for k in range(1, 6) for s in (1, -1)), W)
    with pytest.raises(ScaleInsufficient):
        union_density_locator([sparse, sparse], W)


# -- files ----------------------------------------------------------------------------------------


def test_patch_file_round_trip():
    P = LAM.patch(6)
    text = dump_patch(P)
    assert text.startswith("model Rn:2:quad(2)\nwindow ")
    Q = load_patch(text)
    assert Q == P and dump_patch(Q) == text


def test_modelset_file_round_trip():
    L = ModelSet(2, Fraction(-1, 2), Fraction(3, 4))
    assert dump_modelset(L) == "cutproject d=2 window=[-1/2,3/4]\n"
    assert load_modelset(dump_modelset(L)) == L
    with pytest.raises(ValueError):
        load_modelset("cutproject d=2")
