"""Rosenlicht's compact unipotent group {(x, y) : y^p = t x^p - x} over F_p((t)),
studied modulo t^N.

Writing x = sum a_i t^i and y = sum b_i t^i, the coefficient of t^j in
y^p - t x^p + x is

    [b_{j/p} if p | j] - [a_{(j-1)/p} if j >= 1 and p | (j-1)] + a_j,

so the solutions modulo t^N form the null space of an N x 2N matrix over F_p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .exactnum import FpSeries, format_scalar, series_frobenius
from .groupmodels import GroupModel
from .linalg import nullspace_mod_p, rref_mod_p
from .pointsets import FinitePatch, WitnessSet, approx_subgroup_certificate

__all__ = [
    "RosenlichtSolutionSpace",
    "GrowthReport",
    "is_prime",
    "constraint_matrix",
    "rosenlicht_residual",
    "rosenlicht_solve",
    "enumerate_solutions",
    "laurent_search",
    "rosenlicht_growth",
    "finite_subset_certificate",
]


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % k for k in range(2, math.isqrt(p) + 1))


def constraint_matrix(p: int, N: int) -> list[list[int]]:
    """Row j encodes the t^j coefficient; columns a_0..a_{N-1}, b_0..b_{N-1}."""
    rows = []
    for j in range(N):
        row = [0] * (2 * N)
        row[j] += 1
        if j >= 1 and (j - 1) % p == 0:
            row[(j - 1) // p] -= 1
        if j % p == 0:
            row[N + j // p] += 1
        rows.append([c % p for c in row])
    return rows


def rosenlicht_residual(x: FpSeries, y: FpSeries) -> FpSeries:
    """y^p - t x^p + x, computed by repeated multiplication (not the Frobenius shortcut)."""
    p = x.p
    t = FpSeries.monomial(p, x.N, 1)
    return y ** p - t * x ** p + x


def _pair(p: int, N: int, vec: Sequence[int]) -> tuple[FpSeries, FpSeries]:
    return FpSeries(p, N, vec[:N]), FpSeries(p, N, vec[N:])


def _vec(x: FpSeries, y: FpSeries) -> tuple[int, ...]:
    return tuple(x.coefficient_list()) + tuple(y.coefficient_list())


@dataclass
class RosenlichtSolutionSpace:
    p: int
    N: int
    basis: list  # (x, y) pairs
    liftable_dimension: Optional[int] = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def count(self) -> int:
        return self.p ** self.dimension

    def vectors(self) -> list[tuple[int, ...]]:
        return [_vec(x, y) for x, y in self.basis]

    def span(self) -> set:
        """Every F_p-combination of the basis, as coefficient vectors."""
        vecs = self.vectors()
        out = set()
        for cs in itertools.product(range(self.p), repeat=len(vecs)):
            out.add(tuple(sum(c * v[i] for c, v in zip(cs, vecs)) % self.p for i in range(2 * self.N)))
        return out

    def elements(self) -> list[tuple[FpSeries, FpSeries]]:
        return [_pair(self.p, self.N, v) for v in sorted(self.span())]

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "N": self.N,
            "dimension": self.dimension,
            "solution_count": self.count,
            "liftable_dimension": self.liftable_dimension,
            "basis": [[format_scalar(x), format_scalar(y)] for x, y in self.basis],
        }


def rosenlicht_solve(p: int, N: int, lifting: bool = True) -> RosenlichtSolutionSpace:
    """Basis of the solutions modulo t^N (RREF null space, fixed column order).

    With ``lifting`` the report also carries the dimension of the image of the
    solutions modulo t^(N+1) in the solutions modulo t^N.
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if N < 1:
        raise ValueError("N must be at least 1")
    vecs = nullspace_mod_p(constraint_matrix(p, N), p, 2 * N)
    basis = [_pair(p, N, v) for v in vecs]
    for x, y in basis:
        if not rosenlicht_residual(x, y).is_zero():
            raise ArithmeticError(f"basis pair ({x}, {y}) does not solve the equation")
    lift = None
    if lifting:
        up = nullspace_mod_p(constraint_matrix(p, N + 1), p, 2 * N + 2)
        projected = [v[:N] + v[N + 1 : 2 * N + 1] for v in up]
        lift = len(rref_mod_p(projected, p)[1]) if projected else 0
    return RosenlichtSolutionSpace(p, N, basis, lift)


def enumerate_solutions(p: int, N: int) -> set:
    """Brute force over all p^(2N) coefficient pairs: the oracle for the solver."""
    found = set()
    for vec in itertools.product(range(p), repeat=2 * N):
        x, y = _pair(p, N, vec)
        if rosenlicht_residual(x, y).is_zero():
            found.add(tuple(vec))
    return found


@dataclass
class LaurentVerdict:
    valuation: int
    candidates: int
    solutions: int
    witness: Optional[tuple] = None  # least principal-part pair that solves, if any

    def as_dict(self) -> dict:
        return {
            "valuation": self.valuation,
            "candidates": self.candidates,
            "solutions": self.solutions,
            "witness": None if self.witness is None else [format_scalar(c) for c in self.witness],
        }


def laurent_search(p: int, V: int) -> list[LaurentVerdict]:
    """Exhaustive check of pairs whose smaller valuation lies in [-V, -1].

    The negative-index part of y^p - t x^p + x depends only on the principal
    parts of x and y, so enumerating principal parts (all p^(2V) of them) and
    computing that part exactly decides, for each valuation, whether any
    Laurent pair can solve the equation.  Over F_2 the pair (1/t, 0) does:
    t * t^-2 = t^-1 cancels x.  For odd p every solution is integral.
    """
    floor = max(p * V, 1)
    verdicts = {v: LaurentVerdict(v, 0, 0) for v in range(-V, 0)}
    for vec in itertools.product(range(p), repeat=2 * V):
        if not any(vec):
            continue
        # coefficients of t^-V .. t^-1, known modulo t^0
        x = FpSeries(p, 0, vec[:V], v=-V, floor=floor)
        y = FpSeries(p, 0, vec[V:], v=-V, floor=floor)
        res = series_frobenius(y) - series_frobenius(x).shift(1) + x
        verdict = verdicts[min(x.v, y.v)]
        verdict.candidates += 1
        if res.is_zero():
            verdict.solutions += 1
            if verdict.witness is None:
                verdict.witness = (x, y)
    return [verdicts[v] for v in sorted(verdicts, reverse=True)]


@dataclass
class GrowthReport:
    p: int
    N_range: list
    V: int
    spaces: list
    laurent: list
    oracle: dict = field(default_factory=dict)  # N -> bool (solver set == enumeration)

    @property
    def dimensions(self) -> list[int]:
        return [s.dimension for s in self.spaces]

    @property
    def strictly_increasing(self) -> bool:
        d = self.dimensions
        return all(a < b for a, b in zip(d, d[1:]))

    @property
    def laurent_free(self) -> bool:
        return all(v.solutions == 0 for v in self.laurent)

    @property
    def lowest_solution_valuation(self) -> int:
        """Smallest valuation in the searched band that carries a solution (0 if none)."""
        return min((v.valuation for v in self.laurent if v.solutions), default=0)

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "N_range": list(self.N_range),
            "valuation_floor": -self.V,
            "dimensions": {str(s.N): s.dimension for s in self.spaces},
            "solution_counts": {str(s.N): s.count for s in self.spaces},
            "liftable_dimensions": {str(s.N): s.liftable_dimension for s in self.spaces},
            "strictly_increasing": self.strictly_increasing,
            "laurent_search": [v.as_dict() for v in self.laurent],
            "laurent_solutions_found": not self.laurent_free,
            "lowest_solution_valuation": self.lowest_solution_valuation,
            "oracle_equal": {str(k): v for k, v in sorted(self.oracle.items())},
            "bases": {str(s.N): s.as_dict()["basis"] for s in self.spaces},
        }


def rosenlicht_growth(p: int, N_range: Iterable[int], V: int = 3, oracle_limit: int = 1 << 16) -> GrowthReport:
    """Dimensions over N_range, the bounded Laurent search, and the enumeration
    oracle for every N with p^(2N) <= oracle_limit."""
    Ns = list(N_range)
    if any(a >= b for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_range must be increasing")
    if V < 0:
        raise ValueError("V must be nonnegative")
    spaces = [rosenlicht_solve(p, N) for N in Ns]
    oracle = {}
    for s in spaces:
        if p ** (2 * s.N) <= oracle_limit:
            oracle[s.N] = s.span() == enumerate_solutions(p, s.N)
    return GrowthReport(p, Ns, V, spaces, laurent_search(p, V), oracle)


def finite_subset_certificate(space: RosenlichtSolutionSpace, elements: Optional[Sequence] = None) -> WitnessSet:
    """Run the approximate-subgroup certificate on a finite symmetric subset
    (default: the whole solution group modulo t^N) with the subset as the pool."""
    model = GroupModel.series(space.p, space.N, 2)
    pairs = space.elements() if elements is None else list(elements)
    patch = FinitePatch(model, tuple(model.point(x, y) for x, y in pairs))
    return approx_subgroup_certificate(patch, None, pool=list(patch.points))
