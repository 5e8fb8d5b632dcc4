"""Discrete point sets: finite patches, integer lattices and cut-and-project model sets.

Every set exposes ``model``, ``contains(point)`` and ``points_in(box)``.
``points_in`` is exact and complete for :class:`Lattice` and :class:`ModelSet`;
a :class:`FinitePatch` can only answer for boxes inside its window.

Boxes are tuples of ``(lo, hi)`` pairs of exact scalars, one per coordinate.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .exactnum import (
    QuadElem,
    as_fraction,
    exact_abs,
    exact_ceil,
    exact_floor,
    format_scalar,
    parse_scalar,
    quad_compare,
    sign,
)
from .groupmodels import GroupModel, GroupPoint, order_key, parse_model
from .linalg import pseudo_inverse, rank, solve_in_span

Box = tuple

__all__ = [
    "NotEvaluable",
    "CrossCheckError",
    "CertificateFailure",
    "CoverNotFound",
    "FinitePatch",
    "Lattice",
    "ModelSet",
    "WitnessSet",
    "DelonePair",
    "CosetReport",
    "centered_box",
    "shrink_box",
    "in_box",
    "patch_product",
    "modelset_product",
    "membership",
    "approx_subgroup_certificate",
    "verify_cover",
    "delone_parameters",
    "commensurability_witness",
    "coset_split",
    "union_density_locator",
    "difference_patch",
    "UnionNotDense",
    "ScaleInsufficient",
    "dump_patch",
    "load_patch",
    "dump_modelset",
    "load_modelset",
]


class NotEvaluable(ValueError):
    """A finite patch was asked about a region outside its complete window."""


class CrossCheckError(AssertionError):
    """Window arithmetic for a model-set product was falsified on a sampled point."""


class CoverNotFound(ValueError):
    def __init__(self, message: str, point: GroupPoint):
        super().__init__(f"{message}: {point!r}")
        self.point = point


class CertificateFailure(ValueError):
    """A certificate search did not produce a stable witness at the requested scale."""


# -- boxes -------------------------------------------------------------------------


def _exact(x):
    return x if isinstance(x, QuadElem) else as_fraction(x)


def exact_box(box: Box) -> Box:
    return tuple((_exact(lo), _exact(hi)) for lo, hi in box)


def centered_box(n: int, half_width, center=None) -> Box:
    h = as_fraction(half_width) if not isinstance(half_width, QuadElem) else half_width
    c = center or (0,) * n
    return tuple((ci - h, ci + h) for ci in c)


def shrink_box(box: Box, margin) -> Optional[Box]:
    out = tuple((lo + margin, hi - margin) for lo, hi in box)
    if any(sign(hi - lo) < 0 for lo, hi in out):
        return None
    return out


def in_box(coords: Sequence, box: Box) -> bool:
    return all(sign(c - lo) >= 0 and sign(hi - c) >= 0 for c, (lo, hi) in zip(coords, box))


def box_contains(outer: Box, inner: Box) -> bool:
    return all(sign(ilo - olo) >= 0 and sign(ohi - ihi) >= 0 for (olo, ohi), (ilo, ihi) in zip(outer, inner))


def translate_box(model: GroupModel, g: GroupPoint, box: Box) -> Box:
    """The box g * box (left translation maps boxes to boxes in Rn and ax+b)."""
    if model.kind == "Rn":
        return tuple((lo + c, hi + c) for (lo, hi), c in zip(box, g.coords))
    if model.kind == "axb":
        a, b = g.coords
        (alo, ahi), (blo, bhi) = box
        return ((a * alo, a * ahi), (a * blo + b, a * bhi + b))
    raise ValueError("boxes are not defined on series models")


def _fmt_box(box: Optional[Box]) -> str:
    if box is None:
        return "none"
    return " ".join(f"[{format_scalar(lo)},{format_scalar(hi)}]" for lo, hi in box)


def _is_integer(c) -> bool:
    if isinstance(c, QuadElem):
        return c.b == 0 and c.a.denominator == 1
    return as_fraction(c).denominator == 1


# -- sets ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePatch:
    """A finite sample of a discrete set.

    ``complete=True`` asserts that the underlying set meets ``window`` in
    exactly ``points``; ``False`` marks a heuristic truncation.  A window of
    ``None`` means the patch is the whole (finite) set.
    """

    model: GroupModel
    points: tuple
    window: Optional[Box] = None
    complete: bool = True

    def __post_init__(self):
        pts = sorted(set(self.points), key=order_key)
        if len(pts) != len(self.points):
            raise ValueError("duplicate points in patch")
        for p in pts:
            if p.model != self.model:
                raise ValueError(f"point {p!r} is not in model {self.model.descriptor}")
            if self.window is not None and not in_box(p.coords, self.window):
                raise ValueError(f"point {p!r} outside patch window")
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "_index", frozenset(pts))

    @classmethod
    def from_coords(cls, model: GroupModel, coords: Iterable[Sequence], window=None, complete=True, dedupe=False):
        pts = [model.point(*c) for c in coords]
        if dedupe:
            pts = list(dict.fromkeys(pts))
        return cls(model, tuple(pts), window, complete)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def contains(self, g: GroupPoint) -> bool:
        return g in self._index

    def points_in(self, box: Optional[Box]) -> list[GroupPoint]:
        if box is None:
            return list(self.points)
        if self.window is not None and not box_contains(self.window, box):
            raise NotEvaluable(f"box {_fmt_box(box)} exceeds patch window {_fmt_box(self.window)}")
        return [p for p in self.points if in_box(p.coords, box)]

    def restrict(self, box: Box) -> FinitePatch:
        return FinitePatch(self.model, tuple(self.points_in(box)), box, self.complete)

    def translate(self, g: GroupPoint) -> FinitePatch:
        window = None if self.window is None else translate_box(self.model, g, self.window)
        return FinitePatch(self.model, tuple(g * p for p in self.points), window, self.complete)

    def union(self, other: FinitePatch) -> FinitePatch:
        return FinitePatch(
            self.model,
            tuple(dict.fromkeys(self.points + other.points)),
            self.window,
            self.complete and other.complete and self.window == other.window,
        )


@dataclass(frozen=True)
class Lattice:
    """The Z-span of ``basis`` (possibly rank-deficient) in R^n, shifted by ``offset``."""

    model: GroupModel
    basis: tuple
    offset: Optional[tuple] = None

    def __post_init__(self):
        if self.model.kind != "Rn":
            raise ValueError("lattices live in an Rn model")
        basis = tuple(tuple(as_fraction(x) if not isinstance(x, QuadElem) else x for x in v) for v in self.basis)
        if any(len(v) != self.model.n for v in basis):
            raise ValueError("basis vector length does not match the model")
        if basis and rank([list(v) for v in basis]) != len(basis):
            raise ValueError("degenerate lattice: generators are linearly dependent")
        object.__setattr__(self, "basis", basis)
        off = tuple(self.offset) if self.offset is not None else (Fraction(0),) * self.model.n
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "_pinv", pseudo_inverse([list(v) for v in basis]) if basis else [])

    def contains(self, g: GroupPoint) -> bool:
        diff = [c - o for c, o in zip(g.coords, self.offset)]
        coeffs = solve_in_span([list(v) for v in self.basis], diff)
        if coeffs is None:
            return False
        return all(_is_integer(c) for c in coeffs)

    def shifted(self, g: GroupPoint) -> Lattice:
        return Lattice(self.model, self.basis, tuple(o + c for o, c in zip(self.offset, g.coords)))

    def reduce(self, g: GroupPoint) -> GroupPoint:
        """Coset representative of g modulo the lattice: subtract the integer part of its span coordinates."""
        if not self.basis:
            return g
        coeffs = [sum(row[t] * g.coords[t] for t in range(self.model.n)) for row in self._pinv]
        ints = [exact_floor(c) for c in coeffs]
        return self.model.point(*(g.coords[t] - sum(k * v[t] for k, v in zip(ints, self.basis)) for t in range(self.model.n)))

    def points_in(self, box: Box) -> list[GroupPoint]:
        n = self.model.n
        if not self.basis:
            pt = self.model.point(*self.offset)
            return [pt] if in_box(pt.coords, box) else []
        ranges = []
        for row in self._pinv:
            lo = hi = sum(row[t] * (-self.offset[t]) for t in range(n))
            for t in range(n):
                a, b = row[t] * box[t][0], row[t] * box[t][1]
                lo, hi = lo + min(a, b), hi + max(a, b)
            ranges.append(range(exact_ceil(lo), exact_floor(hi) + 1))
        out = []
        for ks in itertools.product(*ranges):
            coords = tuple(self.offset[t] + sum(k * v[t] for k, v in zip(ks, self.basis)) for t in range(n))
            if in_box(coords, box):
                out.append(self.model.point(*coords))
        return sorted(out, key=order_key)

    def patch(self, box: Box) -> FinitePatch:
        return FinitePatch(self.model, tuple(self.points_in(box)), box, True)


@dataclass(frozen=True)
class ModelSet:
    """Cut-and-project set Gamma cap (R x [lo, hi]) with Gamma = {(m + n sqrt d, m - n sqrt d)}.

    Points are pairs (physical, internal) of QuadElems in the model Rn:2:quad(d).
    """

    d: int
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.hi < self.lo:
            raise ValueError("empty internal window")
        QuadElem(0, 0, self.d)  # validates d

    @property
    def model(self) -> GroupModel:
        return GroupModel.rn(2, self.d)

    @property
    def symmetric(self) -> bool:
        return self.lo == -self.hi

    def lattice_point(self, m: int, n: int) -> GroupPoint:
        return self.model.point(QuadElem(m, n, self.d), QuadElem(m, -n, self.d))

    def lattice_coords(self, g: GroupPoint) -> Optional[tuple[int, int]]:
        """(m, n) if g lies in Gamma, else None."""
        x, w = (c if isinstance(c, QuadElem) else QuadElem(c, 0, self.d) for c in g.coords)
        if x.d != self.d or w.d != self.d:
            return None
        if x.a.denominator != 1 or x.b.denominator != 1:
            return None
        if w != x.conjugate():
            return None
        return int(x.a), int(x.b)

    def contains(self, g: GroupPoint) -> bool:
        if self.lattice_coords(g) is None:
            return False
        w = g.coords[1]
        return quad_compare(w, self.lo) >= 0 and quad_compare(w, self.hi) <= 0

    def points_in(self, box: Box) -> list[GroupPoint]:
        """All points of the set inside box = ((x0, x1), (w0, w1)); exact and complete."""
        (x0, x1), (w0, w1) = box
        w0 = w0 if sign(w0 - self.lo) >= 0 else self.lo
        w1 = w1 if sign(self.hi - w1) >= 0 else self.hi
        if sign(w1 - w0) < 0 or sign(x1 - x0) < 0:
            return []
        root = QuadElem(0, 1, self.d)
        inv2root = QuadElem(0, Fraction(1, 2 * self.d), self.d)  # 1 / (2 sqrt d)
        n_lo = exact_ceil((x0 - w1) * inv2root)
        n_hi = exact_floor((x1 - w0) * inv2root)
        out = []
        for n in range(n_lo, n_hi + 1):
            s = root * n
            m_lo = max(exact_ceil(x0 - s), exact_ceil(w0 + s))
            m_hi = min(exact_floor(x1 - s), exact_floor(w1 + s))
            for m in range(m_lo, m_hi + 1):
                out.append(self.lattice_point(m, n))
        return sorted(out, key=order_key)

    def physical_box(self, X) -> Box:
        return ((-as_fraction(X), as_fraction(X)), (self.lo, self.hi))

    def patch(self, X) -> FinitePatch:
        """Window-complete patch on |physical| <= X."""
        box = self.physical_box(X)
        return FinitePatch(self.model, tuple(self.points_in(box)), box, True)

    def index_patch(self, K: int) -> FinitePatch:
        """Points with |m|, |n| <= K (a heuristic sample; not window-complete)."""
        pts = []
        for m in range(-K, K + 1):
            for n in range(-K, K + 1):
                g = self.lattice_point(m, n)
                if self.contains(g):
                    pts.append(g)
        return FinitePatch(self.model, tuple(pts), None, False)

    def describe(self) -> str:
        return f"cutproject d={self.d} window=[{self.lo},{self.hi}]"


DiscreteSet = Union[FinitePatch, Lattice, ModelSet]


def membership(S: DiscreteSet, p: GroupPoint) -> bool:
    return S.contains(p)


# -- products ---------------------------------------------------------------------------


def _product_window(model: GroupModel, A: Optional[Box], B: Optional[Box]) -> Optional[Box]:
    if A is None or B is None:
        return None
    if model.kind == "Rn":
        return tuple((a0 + b0, a1 + b1) for (a0, a1), (b0, b1) in zip(A, B))
    if model.kind == "axb":
        (a0, a1), (s0, s1) = A
        (c0, c1), (t0, t1) = B
        corners = [a * t for a in (a0, a1) for t in (t0, t1)]
        return ((a0 * c0, a1 * c1), (min(corners) + s0, max(corners) + s1))
    return None


def patch_product(A: FinitePatch, B: FinitePatch) -> FinitePatch:
    """{ab : a in A, b in B}; flagged heuristic since truncations lose completeness."""
    if A.model != B.model:
        raise ValueError(f"model mismatch: {A.model.descriptor} vs {B.model.descriptor}")
    prods = dict.fromkeys(a * b for a in A.points for b in B.points)
    return FinitePatch(A.model, tuple(prods), _product_window(A.model, A.window, B.window), False)


@dataclass
class ProductCheck:
    """Outcome of the decomposition cross-check behind a model-set product."""

    result: ModelSet
    physical_window: Fraction
    forward_pairs: int
    reverse_points: int
    decompositions: list = field(default_factory=list)


def _decompose(target: GroupPoint, A: ModelSet, B: ModelSet, X, max_doublings: int) -> Optional[tuple]:
    """Find a in A with target - a in B, searching physical radius X, 2X, 4X, ..."""
    w = target.coords[1]
    # admissible internal coordinates of a: [lo1, hi1] cap (w - [lo2, hi2])
    lo = A.lo if sign(A.lo - (w - B.hi)) >= 0 else w - B.hi
    hi = A.hi if sign((w - B.lo) - A.hi) >= 0 else w - B.lo
    if sign(hi - lo) < 0:
        return None
    R = max(as_fraction(X), Fraction(1))
    for _ in range(max_doublings + 1):
        for a in A.points_in(((-R, R), (lo, hi))):
            rest = target - a
            if B.contains(rest):
                return a, rest
        R *= 2
    return None


def modelset_product(
    L1: ModelSet,
    L2: Optional[ModelSet] = None,
    op: str = "product",
    k: int = 2,
    check_window=20,
    max_doublings: int = 12,
) -> tuple[ModelSet, list[ProductCheck]]:
    """Window arithmetic for model sets, verified by explicit decomposition.

    ``product``: window I1 + I2; ``inverse``: -I; ``power``: k-fold sum.
    Every sampled product of members on |physical| <= check_window must be a
    member of the result, and every member of the result there must split as
    a product of members.  A failure raises :class:`CrossCheckError`.
    """
    X = as_fraction(check_window)
    if op == "inverse":
        res = ModelSet(L1.d, -L1.hi, -L1.lo)
        for g in L1.points_in(L1.physical_box(X)):
            if not res.contains(-g):
                raise CrossCheckError(f"inverse of {g!r} missing from {res.describe()}")
        return res, [ProductCheck(res, X, len(L1.points_in(L1.physical_box(X))), 0)]
    if op == "power":
        if k < 1:
            raise ValueError("power needs k >= 1")
        cur, checks = L1, []
        for _ in range(k - 1):
            cur, chk = modelset_product(cur, L1, "product", check_window=check_window, max_doublings=max_doublings)
            checks.extend(chk)
        return cur, checks
    if op != "product":
        raise ValueError(f"unknown op {op!r}")
    L2 = L1 if L2 is None else L2
    if L1.d != L2.d:
        raise ValueError("lattice mismatch: different d")
    res = ModelSet(L1.d, L1.lo + L2.lo, L1.hi + L2.hi)
    A = L1.points_in(L1.physical_box(X))
    B = L2.points_in(L2.physical_box(X))
    for a in A:
        for b in B:
            if not res.contains(a + b):
                raise CrossCheckError(f"{a!r} + {b!r} not in {res.describe()}")
    targets = res.points_in(res.physical_box(X))
    decs = []
    for t in targets:
        dec = _decompose(t, L1, L2, X, max_doublings)
        if dec is None:
            raise CrossCheckError(f"{t!r} in {res.describe()} has no decomposition into members")
        decs.append((t, dec[0], dec[1]))
    return res, [ProductCheck(res, X, len(A) * len(B), len(targets), decs)]


# -- approximate subgroup certificates -----------------------------------------------------


@dataclass
class WitnessSet:
    points: tuple
    relation: str
    scale: object
    stable: bool = True
    verified: bool = False
    sizes: tuple = ()
    checked_points: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def as_dict(self) -> dict:
        return {
            "points": [[format_scalar(c) for c in p.coords] for p in self.points],
            "relation": self.relation,
            "scale": format_scalar(self.scale) if self.scale is not None else None,
            "stable": self.stable,
            "verified": self.verified,
            "sizes_by_scale": list(self.sizes),
            "checked_points": self.checked_points,
        }


def _scale_box(model: GroupModel, X) -> Optional[Box]:
    if X is None:
        return None
    return centered_box(model.n, X)


def _contains_identity(S: DiscreteSet) -> bool:
    return S.contains(S.model.identity())


def _is_symmetric(S: DiscreteSet) -> bool:
    if isinstance(S, ModelSet):
        return S.symmetric
    if isinstance(S, Lattice):
        return all(sign(o) == 0 for o in S.offset)
    return all(S.contains(p.inverse()) for p in S.points)


def verify_cover(L: DiscreteSet, F: Sequence[GroupPoint], points: Iterable[GroupPoint]) -> Optional[GroupPoint]:
    """First point p with no f in F such that f^-1 p lies in L, or None if all are covered."""
    for p in points:
        if not any(L.contains(f.inverse() * p) for f in F):
            return p
    return None


def _greedy_cover(targets, pool, covered_by) -> list:
    F: list = []
    for p in targets:
        if any(covered_by(f, p) for f in F):
            continue
        for f in pool:
            if covered_by(f, p):
                F.append(f)
                break
        else:
            raise CoverNotFound("no candidate covers product point", p)
    return F


def _square_targets(L: DiscreteSet, X, pool_radius):
    model = L.model
    if isinstance(L, ModelSet):
        L2, _ = modelset_product(L, L, "product", check_window=X)
        targets = L2.points_in(L2.physical_box(X))
        pool = L2.points_in(L2.physical_box(pool_radius if pool_radius is not None else X))
        return targets, pool
    if isinstance(L, Lattice):
        box = _scale_box(model, X)
        targets = L.points_in(box)
        return targets, targets
    prods = sorted(dict.fromkeys(a * b for a in L.points for b in L.points), key=order_key)
    box = _scale_box(model, X)
    targets = prods if box is None else [p for p in prods if in_box(p.coords, box)]
    pool = prods
    if pool_radius is not None:
        pb = _scale_box(model, pool_radius)
        pool = [p for p in prods if in_box(p.coords, pb)]
    return targets, pool


def approx_subgroup_certificate(L: DiscreteSet, scale=None, pool=None, pool_radius=None) -> WitnessSet:
    """Search a finite F with L^2 subset F L at the given scale, and re-verify it.

    ``scale`` is a half-width X: product points in the box [-X, X]^n are
    covered (``None`` on a finite patch means all of L^2).  The search is
    repeated at 2X and succeeds only if |F| is unchanged.
    """
    if not _contains_identity(L):
        raise CertificateFailure("set does not contain the identity")
    if not _is_symmetric(L):
        raise CertificateFailure("set is not symmetric")

    def covered_by(f, p):
        return L.contains(f.inverse() * p)

    sizes = []
    result = None
    scales = [scale] if scale is None else [as_fraction(scale), 2 * as_fraction(scale)]
    for X in scales:
        targets, cand = _square_targets(L, X, pool_radius)
        if pool is not None:
            cand = sorted(pool, key=order_key)
        F = _greedy_cover(targets, cand, covered_by)
        bad = verify_cover(L, F, targets)
        if bad is not None:
            raise CertificateFailure(f"re-verification failed at {bad!r}")
        sizes.append(len(F))
        if result is None:
            result = WitnessSet(tuple(F), "product-cover", X, verified=True, checked_points=len(targets))
    result.sizes = tuple(sizes)
    result.stable = len(set(sizes)) == 1
    if not result.stable:
        raise CertificateFailure(f"|F| not stable under scale doubling: {sizes}")
    return result


# -- Delone parameters -------------------------------------------------------------------


@dataclass
class DelonePair:
    packing: object  # min pairwise distance, or None for fewer than two points
    covering: object  # covering radius on the shrunken window, or None when infinite
    infinite: bool
    window: Box
    packing_witness: Optional[tuple] = None
    covering_witness: Optional[tuple] = None
    far_probe: Optional[tuple] = None
    margin: object = None
    delta: object = None
    cap: object = None
    complete: bool = True

    @property
    def relatively_dense(self) -> bool:
        return not self.infinite

    def as_dict(self) -> dict:
        f = lambda x: None if x is None else format_scalar(x)  # noqa: E731
        pt = lambda t: None if t is None else [f(c) for c in t]  # noqa: E731
        return {
            "packing_radius": f(self.packing),
            "covering_radius": f(self.covering),
            "covering_infinite": self.infinite,
            "window": _fmt_box(self.window),
            "packing_witness": None if self.packing_witness is None else [pt(x) for x in self.packing_witness],
            "covering_witness": None if self.covering_witness is None else [pt(x) for x in self.covering_witness],
            "far_probe": pt(self.far_probe),
            "margin": f(self.margin),
            "probe_spacing": f(self.delta),
            "cap": f(self.cap),
            "scale_stamp": "complete" if self.complete else "heuristic",
        }


def _maxdist(u: Sequence, v: Sequence):
    return max(exact_abs(a - b) for a, b in zip(u, v))


def _nearest_float(probes: np.ndarray, pts: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty(len(probes))
    for s in range(0, len(probes), chunk):
        block = probes[s : s + chunk]
        d = np.abs(block[:, None, :] - pts[None, :, :]).max(axis=2)
        out[s : s + chunk] = d.min(axis=1)
    return out


def _exact_nearest(probe: tuple, pts: list, fpts: np.ndarray):
    fp = np.array([float(c) for c in probe])
    d = np.abs(fpts - fp).max(axis=1)
    near = np.nonzero(d <= d.min() + 1e-9 * (1 + d.min()))[0]
    best = None
    for i in near:
        e = _maxdist(probe, pts[i])
        if best is None or e < best[0]:
            best = (e, pts[i])
    return best


def _bisect_exact(seq: Sequence, pred) -> int:
    """First index where the monotone predicate ``pred`` turns true (len(seq) if never)."""
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(seq[mid]):
            hi = mid
        else:
            lo = mid + 1
    return lo


def delone_parameters(P, window: Box, delta=Fraction(1, 4), cap=None) -> DelonePair:
    """Packing radius (min pairwise max-norm distance) and scale-stamped covering radius.

    Probes sit on a grid of spacing ``delta`` over ``window``.  A probe in the
    window shrunk by ``cap`` that is farther than ``cap`` from every point
    yields the infinite flag with that probe as witness.  Otherwise the
    covering radius is the max nearest-point distance over probes in the
    window shrunk by the smallest margin m on the probe lattice with
    R(m) <= m.  Floats only prefilter; every reported value is exact.
    """
    window = exact_box(window)
    if isinstance(P, FinitePatch):
        pts_g = P.points_in(window)
        complete = P.complete
    else:
        pts_g = P.points_in(window)
        complete = True
    if not pts_g:
        raise ValueError("empty set on the window")
    pts = [g.coords for g in pts_g]
    fpts = np.array([[float(c) for c in p] for p in pts])
    delta = as_fraction(delta)
    halfwidths = [(hi - lo) / 2 for lo, hi in window]
    cap = min(halfwidths) / 4 if cap is None else cap

    packing = witness = None
    if len(pts) >= 2:
        rows = [np.abs(fpts[i + 1 :] - fpts[i]).max(axis=1) for i in range(len(pts) - 1)]
        best_f = min(r.min() for r in rows)
        tol = 1e-9 * (1 + best_f)
        for i, r in enumerate(rows):
            for j in np.nonzero(r <= best_f + tol)[0]:
                e = _maxdist(pts[i], pts[i + 1 + j])
                if packing is None or e < packing:
                    packing, witness = e, (pts[i], pts[i + 1 + j])

    axes = []
    for lo, hi in window:
        count = exact_floor((hi - lo) / delta)
        axes.append([lo + k * delta for k in range(count + 1)])
    probe_axes_f = [np.array([float(x) for x in ax]) for ax in axes]
    mesh = np.meshgrid(*probe_axes_f, indexing="ij")
    fprobes = np.stack([m.ravel() for m in mesh], axis=1)
    nearest = _nearest_float(fprobes, fpts)
    shape = tuple(len(ax) for ax in axes)

    def mask_for(margin):
        # axes are sorted, so the probes inside the shrunken window form a contiguous run
        masks = []
        for ax, (lo, hi) in zip(axes, window):
            first = _bisect_exact(ax, lambda x: sign(x - lo - margin) >= 0)
            stop = _bisect_exact(ax, lambda x: sign(hi - margin - x) < 0)
            m = np.zeros(len(ax), dtype=bool)
            m[first:stop] = True
            masks.append(m)
        full = masks[0]
        for m in masks[1:]:
            full = np.logical_and.outer(full, m)
        return full.reshape(-1)

    def exact_max(margin):
        mask = mask_for(margin)
        if not mask.any():
            return None
        sel = np.nonzero(mask)[0]
        vals = nearest[sel]
        top = vals.max()
        best = None
        for idx in sel[vals >= top - 1e-9 * (1 + top)]:
            multi = np.unravel_index(idx, shape)
            probe = tuple(axes[t][multi[t]] for t in range(len(axes)))
            e, q = _exact_nearest(probe, pts, fpts)
            # ties keep the first probe in grid order (lexicographically least)
            if best is None or e > best[0]:
                best = (e, probe, q)
        return best

    base = dict(window=window, delta=delta, cap=cap, complete=complete, packing=packing, packing_witness=witness)
    at_cap = exact_max(cap)
    if at_cap is None:
        raise ValueError("window too small: shrinking by the cap leaves no probes")
    if sign(at_cap[0] - cap) > 0:
        # witness: the least (by norm, then l1, then reversed-lex) probe farther than cap
        sel = np.nonzero(mask_for(cap) & (nearest > float(cap) - 1e-9 * (1 + float(cap))))[0]
        model = GroupModel.rn(len(axes))
        cands = []
        for idx in sel:
            multi = np.unravel_index(idx, shape)
            cands.append(model.point(*(axes[t][multi[t]] for t in range(len(axes)))))
        far = next(g.coords for g in sorted(cands, key=order_key) if sign(_exact_nearest(g.coords, pts, fpts)[0] - cap) > 0)
        return DelonePair(covering=None, infinite=True, far_probe=far, margin=cap, **base)

    margins = sorted({k * delta for k in range(int(exact_floor(cap / delta)) + 1)} | {cap}, key=float)
    lo_i, hi_i = 0, len(margins) - 1
    best = (margins[hi_i], at_cap)
    while lo_i <= hi_i:
        mid = (lo_i + hi_i) // 2
        res = exact_max(margins[mid])
        if res is not None and sign(res[0] - margins[mid]) <= 0:
            best = (margins[mid], res)
            hi_i = mid - 1
        else:
            lo_i = mid + 1
    margin, (R, probe, q) = best
    return DelonePair(covering=R, infinite=False, covering_witness=(probe, q), margin=margin, **base)


# -- commensurability ------------------------------------------------------------------


def commensurability_witness(A: DiscreteSet, B: DiscreteSet, scale) -> tuple[WitnessSet, WitnessSet]:
    """Finite F1, F2 with A subset B F1 and B subset A F2 on the box of half-width ``scale``.

    Each direction is searched at X and 2X; both sizes must agree.
    """
    if A.model != B.model:
        raise ValueError("model mismatch")
    model = A.model

    def one_way(S, T, X, tag):
        box = _scale_box(model, X)
        targets = sorted(S.points_in(box), key=order_key)
        Tpts = T.points_in(box)
        pool = sorted(dict.fromkeys(t.inverse() * s for s in targets for t in Tpts), key=order_key)
        pool = [f for f in pool if in_box(f.coords, box)]
        F = _greedy_cover(targets, pool, lambda f, p: T.contains(p * f.inverse()))
        bad = next((p for p in targets if not any(T.contains(p * f.inverse()) for f in F)), None)
        if bad is not None:
            raise CertificateFailure(f"{tag}: re-verification failed at {bad!r}")
        return WitnessSet(tuple(F), tag, X, verified=True, checked_points=len(targets))

    X = as_fraction(scale)
    out = []
    for S, T, tag in ((A, B, "commensurability-left"), (B, A, "commensurability-right")):
        w1 = one_way(S, T, X, tag)
        w2 = one_way(S, T, 2 * X, tag)
        w1.sizes = (len(w1), len(w2))
        w1.stable = len(w1) == len(w2)
        if not w1.stable:
            raise CertificateFailure(f"{tag}: |F| not stable under scale doubling {w1.sizes}")
        out.append(w1)
    return out[0], out[1]


# -- coset splittings ---------------------------------------------------------------------


@dataclass
class CosetReport:
    index: int
    representative: GroupPoint
    members: tuple
    differences: tuple
    delone: Optional[DelonePair]

    @property
    def relatively_dense(self) -> bool:
        return self.delone is not None and self.delone.relatively_dense


def coset_split(
    L: FinitePatch,
    H_basis: Sequence[Sequence],
    reps: Sequence[GroupPoint],
    h_window=None,
    delta=Fraction(1, 4),
    cap=None,
) -> list[CosetReport]:
    """Split L along the cosets reps[j] + H and measure each difference set inside H.

    H is the linear span of ``H_basis``; differences are expressed in those
    coordinates and measured on the box of half-width ``h_window`` (default:
    twice the patch window, since differences of window points span 2W).
    """
    model = L.model
    if model.kind != "Rn":
        raise ValueError("coset splitting needs an abelian Rn model")
    basis = [list(map(lambda x: x if isinstance(x, QuadElem) else as_fraction(x), v)) for v in H_basis]
    if any(len(v) != model.n for v in basis):
        raise ValueError("H spec: basis vector length does not match the model")
    if basis and rank(basis) != len(basis):
        raise ValueError("H spec is not a subspace basis (dependent or zero vectors)")
    groups: list[list] = [[] for _ in reps]
    stray = []
    for x in L.points:
        for j, g in enumerate(reps):
            if solve_in_span(basis, list((x - g).coords)) is not None:
                groups[j].append(x)
                break
        else:
            stray.append(x)
    if stray:
        raise CoverNotFound(f"{len(stray)} points outside reps + H", stray[0])
    if h_window is None:
        if L.window is None:
            raise ValueError("pass h_window for patches without a window")
        h_window = 2 * min((hi - lo) / 2 for lo, hi in L.window)
    k = len(basis)
    hmodel = GroupModel.rn(max(k, 1))
    hbox = centered_box(max(k, 1), h_window)
    reports = []
    for j, (g, members) in enumerate(zip(reps, groups)):
        diffs = dict.fromkeys(a - b for a in members for b in members)
        hpts = []
        for dlt in diffs:
            c = solve_in_span(basis, list(dlt.coords)) if k else [Fraction(0)]
            hp = hmodel.point(*c)
            if in_box(hp.coords, hbox):
                hpts.append(hp)
        dp = None
        if hpts:
            patch = FinitePatch(hmodel, tuple(hpts), hbox, complete=False)
            dp = delone_parameters(patch, hbox, delta=delta, cap=cap)
        reports.append(CosetReport(j + 1, g, tuple(members), tuple(diffs), dp))
    return reports


# -- locating a dense difference set --------------------------------------------------------


class UnionNotDense(ValueError):
    pass


class ScaleInsufficient(ValueError):
    pass


def difference_patch(P: FinitePatch, window: Box) -> FinitePatch:
    """b^-1 a over all pairs, restricted to ``window`` (heuristic: P is a truncation)."""
    coords = [p.coords for p in P.points]
    if P.model.kind == "Rn" and all(isinstance(c, Fraction) for p in coords for c in p):
        # rational fast path: integer numerators over a common denominator per axis
        dens = [math.lcm(*(p[t].denominator for p in coords)) for t in range(P.model.n)]
        ints = [tuple(int(c * d) for c, d in zip(p, dens)) for p in coords]
        diffs = {tuple(x - y for x, y in zip(a, b)) for a in ints for b in ints}
        cand = (tuple(Fraction(x, d) for x, d in zip(v, dens)) for v in sorted(diffs))
        pts = tuple(P.model.point(*d) for d in cand if in_box(d, window))
    elif P.model.kind == "Rn":
        diffs = dict.fromkeys(tuple(x - y for x, y in zip(a, b)) for a in coords for b in coords)
        pts = tuple(P.model.point(*d) for d in diffs if in_box(d, window))
    else:
        diffs = dict.fromkeys(b.inverse() * a for a in P.points for b in P.points)
        pts = tuple(d for d in diffs if in_box(d.coords, window))
    return FinitePatch(P.model, pts, window, complete=False)


def union_density_locator(patches: Sequence[FinitePatch], window: Box, delta=Fraction(1, 4), cap=None):
    """Least i (1-based) such that P_i^-1 P_i has finite covering radius at this scale.

    The union must itself be relatively dense on the window.  The default cap
    for the difference sets is 8 times the union's covering radius.
    Returns (i, DelonePair of the winner, list of all DelonePairs tried).
    """
    union = patches[0]
    for P in patches[1:]:
        union = FinitePatch(union.model, tuple(dict.fromkeys(union.points + P.points)), window, union.complete and P.complete)
    ud = delone_parameters(union, window, delta=delta)
    if ud.infinite:
        raise UnionNotDense(f"union not relatively dense: far probe {ud.far_probe}")
    cap = 8 * ud.covering if cap is None else cap
    if cap >= min((hi - lo) / 2 for lo, hi in window):
        raise ScaleInsufficient(f"difference-set cap {cap} leaves no probes in the window")
    tried = []
    for i, P in enumerate(patches, start=1):
        dp = delone_parameters(difference_patch(P, window), window, delta=delta, cap=cap)
        tried.append(dp)
        if not dp.infinite:
            return i, dp, tried
    raise ScaleInsufficient("no difference set is relatively dense at this scale")


# -- text format --------------------------------------------------------------------------


def _parse_box(fields: Sequence[str]) -> Optional[Box]:
    if list(fields) == ["none"]:
        return None
    box = []
    for f in fields:
        lo, hi = f.strip("[]").split(",")
        box.append((parse_scalar(lo), parse_scalar(hi)))
    return tuple(box)


def dump_patch(P: FinitePatch) -> str:
    lines = [
        f"model {P.model.descriptor}",
        f"window {_fmt_box(P.window)}",
        f"complete {'true' if P.complete else 'false'}",
    ]
    lines += [" ".join(format_scalar(c) for c in p.coords) for p in P.points]
    return "\n".join(lines) + "\n"


def load_patch(text: str) -> FinitePatch:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 3 or not lines[0].startswith("model ") or not lines[1].startswith("window ") or not lines[2].startswith("complete "):
        raise ValueError("patch file needs model/window/complete header lines")
    model = parse_model(lines[0][6:])
    window = _parse_box(lines[1][7:].split())
    flag = lines[2][9:].strip()
    if flag not in ("true", "false"):
        raise ValueError(f"complete must be true|false, got {flag!r}")
    pts = [model.point(*(parse_scalar(f) for f in ln.split())) for ln in lines[3:]]
    return FinitePatch(model, tuple(pts), window, flag == "true")


def dump_modelset(L: ModelSet) -> str:
    return L.describe() + "\n"


def load_modelset(text: str) -> ModelSet:
    m = re.match(r"^\s*cutproject d=(\d+) window=\[([^,\]]+),([^\]]+)\]\s*$", text.strip())
    if not m:
        raise ValueError(f"not a cutproject line: {text!r}")
    return ModelSet(int(m[1]), Fraction(m[2]), Fraction(m[3]))
