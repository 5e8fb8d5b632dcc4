import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from approxlab.exactnum import QuadElem
from approxlab.linalg import nullspace, nullspace_mod_p, rank, rref, rref_mod_p, solve_in_span


def matmul_vec(rows, v):
    return [sum(a * b for a, b in zip(r, v)) for r in rows]


matrices = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=1, max_size=6)
)


@given(matrices)
def test_rank_nullity_and_kernel(rows):
    ns = nullspace(rows)
    assert rank(rows) + len(ns) == len(rows[0])
    for v in ns:
        assert all(x == 0 for x in matmul_vec(rows, v))


@given(matrices)
def test_integer_and_fraction_paths_agree(rows):
    as_frac = [[Fraction(x) for x in r] for r in rows]
    assert rref(rows) == rref(as_frac)


def test_rref_known():
    R, piv = rref([[2, 4], [1, 3]])
    assert R == [[1, 0], [0, 1]] and piv == [0, 1]
    R, piv = rref([[1, 2, 3], [2, 4, 6]])
    assert R == [[1, 2, 3]] and piv == [0]


def test_quadratic_field_nullspace():
    r2 = QuadElem(0, 1, 2)
    one = QuadElem(1, 0, 2)
    rows = [[one, r2], [r2, QuadElem(2, 0, 2)]]  # second row is sqrt2 times the first
    ns = nullspace(rows)
    assert len(ns) == 1
    assert all(x == 0 for x in matmul_vec(rows, ns[0]))


def test_solve_in_span():
    assert solve_in_span([[1, 0, 1], [0, 1, 1]], [2, 3, 5]) == [2, 3]
    assert solve_in_span([[1, 0, 1]], [1, 1, 1]) is None
    assert solve_in_span([], [0, 0]) == []


def test_mod_p_kernel_random():
    rng = random.Random(7)
    for p in (2, 3, 5):
        for _ in range(40):
            n, m = rng.randint(1, 6), rng.randint(1, 6)
            rows = [[rng.randrange(p) for _ in range(n)] for _ in range(m)]
            ns = nullspace_mod_p(rows, p, n)
            assert len(rref_mod_p(rows, p)[1]) + len(ns) == n
            for v in ns:
                assert all(x % p == 0 for x in matmul_vec(rows, v))
