"""Chabauty-Fell geometry on discrete subsets of R^n: local-matching distance,
limit checks, hull samples, emptiness witnesses and inclusion propagation.

The distance between two patches is the least grid value eps such that each
set's points in the ball B(0, 1/eps) lie within eps of the other set (closed
max-norm balls), capped at 1.  Only symmetry, identity and limit behaviour are
relied on; no triangle inequality is claimed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exactnum import QuadElem, as_fraction, exact_abs, format_scalar, sign
from .groupmodels import GroupModel, GroupPoint, order_key
from .linalg import pseudo_inverse, rank, solve_in_span
from .pointsets import (
    DiscreteSet,
    FinitePatch,
    Lattice,
    NotEvaluable,
    centered_box,
    exact_box,
    in_box,
    shrink_box,
    translate_box,
)

__all__ = [
    "CFConfig",
    "WindowTooSmall",
    "BaseInclusionError",
    "HullSample",
    "Subspace",
    "cf_distance",
    "cf_limit_check",
    "union_continuity_check",
    "hull_sample",
    "emptiness_witness",
    "quasi_monotone_check",
    "subgroup_hull_check",
    "hull_report_json",
    "hull_counts_csv",
]


class WindowTooSmall(NotEvaluable):
    """The observation ball needed at the smallest evaluable eps is not covered by the patches."""


class BaseInclusionError(ValueError):
    def __init__(self, point: GroupPoint):
        super().__init__(f"base inclusion P subset QF fails at {point!r}")
        self.point = point


@dataclass(frozen=True)
class CFConfig:
    eps_grid: tuple = tuple(Fraction(i, 128) for i in range(128, 0, -1))
    cap: Fraction = Fraction(1)

    def __post_init__(self):
        g = tuple(as_fraction(e) for e in self.eps_grid)
        if any(e <= 0 for e in g) or any(a <= b for a, b in zip(g, g[1:])):
            raise ValueError("eps grid must be positive and strictly decreasing")
        object.__setattr__(self, "eps_grid", g)

    @property
    def tolerance(self) -> Fraction:
        return 2 * self.eps_grid[-1]


class _Index:
    """Exact proximity queries on a point list, prefiltered with floats."""

    def __init__(self, points: Sequence[GroupPoint]):
        self.points = [p.coords for p in points]
        self.f = np.array([[float(c) for c in p] for p in self.points]) if self.points else np.zeros((0, 0))

    def within(self, x: Sequence, r) -> bool:
        if not self.points:
            return False
        xf = np.array([float(c) for c in x])
        d = np.abs(self.f - xf).max(axis=1)
        rf = float(r)
        near = np.nonzero(d <= rf + 1e-9 * (1 + rf))[0]
        return any(sign(r - max(exact_abs(a - b) for a, b in zip(x, self.points[i]))) >= 0 for i in near)


def _norm(coords) -> object:
    return max(exact_abs(c) for c in coords)


def _nearest_profile(P: FinitePatch, Q: FinitePatch) -> list[tuple]:
    """(|p|, distance from p to Q) for every p in P, sorted by |p|, with the
    running maximum of the distances: entry k is (|p_k|, max_{j <= k} d(p_j, Q))."""
    if not P.points:
        return []
    norms = [_norm(p.coords) for p in P.points]
    order = sorted(range(len(P.points)), key=lambda i: norms[i])
    if not Q.points:
        return [(norms[i], None) for i in order]
    pf = np.array([[float(c) for c in p.coords] for p in P.points])
    qf = np.array([[float(c) for c in q.coords] for q in Q.points])
    out, running = [], None
    for i in order:
        d = np.abs(qf - pf[i]).max(axis=1)
        top = d.min()
        best = None
        for j in np.nonzero(d <= top + 1e-9 * (1 + top))[0]:
            e = max(exact_abs(a - b) for a, b in zip(P.points[i].coords, Q.points[j].coords))
            if best is None or sign(e - best) < 0:
                best = e
        if running is None or sign(best - running) > 0:
            running = best
        out.append((norms[i], running))
    return out


def _matches_profile(profile: list, eps) -> bool:
    """P cap B(0, 1/eps) lies within eps of Q."""
    R = 1 / eps
    worst = None
    for norm, running in profile:
        if sign(R - norm) < 0:
            break
        worst = running
        if worst is None:
            return False
    return worst is None or sign(eps - worst) >= 0


def _window_radius(P: FinitePatch):
    if P.window is None:
        raise NotEvaluable("patch has no window")
    return min(min(-lo, hi) for lo, hi in P.window)


def cf_distance(P: FinitePatch, Q: FinitePatch, config: CFConfig = CFConfig()) -> Fraction:
    """Local-matching distance between two window-complete patches in R^n."""
    if P.model != Q.model or P.model.kind != "Rn":
        raise ValueError("cf_distance needs two patches in the same Rn model")
    radius = min(_window_radius(P), _window_radius(Q))
    if sign(radius) <= 0:
        raise WindowTooSmall("windows do not contain a ball around 0")
    ball = centered_box(P.model.n, radius)
    Pb, Qb = P.points_in(ball), Q.points_in(ball)
    if set(Pb) == set(Qb):
        return Fraction(0)
    Pr = FinitePatch(P.model, tuple(Pb), ball, P.complete)
    Qr = FinitePatch(Q.model, tuple(Qb), ball, Q.complete)
    pq, qp = _nearest_profile(Pr, Qr), _nearest_profile(Qr, Pr)
    best = None
    last_evaluable = None
    for eps in config.eps_grid:
        if sign(radius - (1 / eps + eps)) < 0:
            break
        last_evaluable = eps
        if _matches_profile(pq, eps) and _matches_profile(qp, eps):
            best = eps
    if last_evaluable is None:
        raise WindowTooSmall(f"window radius {radius} too small for eps = {config.eps_grid[0]}")
    if best is None:
        return config.cap
    if best == last_evaluable and last_evaluable != config.eps_grid[-1]:
        raise WindowTooSmall(f"patches still match at the smallest evaluable eps {best}; widen the windows")
    return best


@dataclass
class LimitVerdict:
    passed: bool
    condition: Optional[str] = None
    witness: Optional[GroupPoint] = None
    patch_index: Optional[int] = None
    tolerance: Fraction = Fraction(0)
    tail: tuple = ()

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "condition": self.condition,
            "witness": None if self.witness is None else [format_scalar(c) for c in self.witness.coords],
            "patch_index": self.patch_index,
            "tolerance": str(self.tolerance),
            "tail": list(self.tail),
        }


def cf_limit_check(
    sequence: Sequence[FinitePatch],
    candidate: FinitePatch,
    config: CFConfig = CFConfig(),
    tail: Optional[int] = None,
    tolerance=None,
) -> LimitVerdict:
    """Window-scale test that ``candidate`` is the Chabauty-Fell limit of ``sequence``.

    CF1: every candidate point is within tolerance of a point of each tail patch.
    CF2: every tail patch point is within tolerance of a candidate point.
    Points within tolerance of the common window boundary are exempt.
    """
    patches = list(sequence) + [candidate]
    if any(not P.complete or P.window is None for P in patches):
        raise ValueError("limit check needs window-complete patches")
    tol = config.tolerance if tolerance is None else as_fraction(tolerance)
    common = patches[0].window
    for P in patches[1:]:
        common = tuple((max(a0, b0), min(a1, b1)) for (a0, a1), (b0, b1) in zip(common, P.window))
    inner = shrink_box(common, tol)
    if inner is None:
        raise ValueError("common window too small for the tolerance")
    k = max(1, len(sequence) // 2) if tail is None else tail
    start = len(sequence) - k
    cand_pts = sorted(candidate.points_in(inner), key=order_key)
    cidx = _Index(candidate.points)
    for i in range(start, len(sequence)):
        S = sequence[i]
        sidx = _Index(S.points)
        for x in cand_pts:
            if not sidx.within(x.coords, tol):
                return LimitVerdict(False, "CF1", x, i, tol, (start, len(sequence)))
        for y in sorted(S.points_in(inner), key=order_key):
            if not cidx.within(y.coords, tol):
                return LimitVerdict(False, "CF2", y, i, tol, (start, len(sequence)))
    return LimitVerdict(True, tolerance=tol, tail=(start, len(sequence)))


@dataclass
class HullSample:
    base: object
    window: tuple
    entries: list = field(default_factory=list)  # (translate, patch)

    def counts(self) -> list[tuple[GroupPoint, int]]:
        return [(g, len(P)) for g, P in self.entries]


def _translate_patch(P: DiscreteSet, g: GroupPoint, window) -> FinitePatch:
    model = P.model
    pre = translate_box(model, g.inverse(), window)
    pts = [g * q for q in P.points_in(pre)]
    return FinitePatch(model, tuple(pts), window, True if not isinstance(P, FinitePatch) else P.complete)


def hull_sample(P: DiscreteSet, translates: Sequence[GroupPoint], window) -> HullSample:
    """Exact patches (gP) cap W for each translate g."""
    window = exact_box(window)
    sample = HullSample(P, window)
    for g in translates:
        sample.entries.append((g, _translate_patch(P, g, window)))
    return sample


@dataclass
class EmptinessResult:
    translate: Optional[GroupPoint]
    radius: object
    tried: int
    skipped: int

    @property
    def found(self) -> bool:
        return self.translate is not None

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "translate": None if self.translate is None else [format_scalar(c) for c in self.translate.coords],
            "radius": format_scalar(self.radius),
            "translates_tried": self.tried,
            "translates_skipped": self.skipped,
        }


def identity_ball(model: GroupModel, R):
    """Box neighbourhood of the identity: [-R, R]^n on Rn, [1/(1+R), 1+R] x [-R, R] on ax+b."""
    R = as_fraction(R)
    if model.kind == "axb":
        return ((1 / (1 + R), 1 + R), (-R, R))
    return centered_box(model.n, R)


def default_translates(model: GroupModel, max_power: int = 12) -> list[GroupPoint]:
    """Axis translates of size 2^k (both signs) on Rn; (2^k, 0) on ax+b."""
    out = []
    for k in range(max_power + 1):
        s = Fraction(2) ** k
        if model.kind == "axb":
            out.append(model.point(s, 0))
            continue
        for axis in range(model.n):
            for sgn in (1, -1):
                c = [Fraction(0)] * model.n
                c[axis] = sgn * s
                out.append(model.point(*c))
    return out


def emptiness_witness(P: DiscreteSet, R, translates: Optional[Sequence[GroupPoint]] = None) -> EmptinessResult:
    """First translate g with (gP) cap B(e, R) empty.

    A hit certifies that P has no covering radius <= R.  Translates a finite
    patch cannot evaluate are skipped and counted.
    """
    model = P.model
    ball = identity_ball(model, R)
    translates = default_translates(model) if translates is None else translates
    tried = skipped = 0
    for g in translates:
        tried += 1
        try:
            hits = P.points_in(translate_box(model, g.inverse(), ball))
        except NotEvaluable:
            skipped += 1
            continue
        if not hits:
            return EmptinessResult(g, as_fraction(R), tried, skipped)
    return EmptinessResult(None, as_fraction(R), tried, skipped)


def _diameter(F: Sequence[GroupPoint]):
    if not F:
        return Fraction(0)
    return max(max(exact_abs(a - b) for a, b in zip(f.coords, h.coords)) for f in F for h in F)


@dataclass
class UnionContinuityVerdict:
    passed: bool
    limits: dict  # name -> LimitVerdict
    bound_violations: list = field(default_factory=list)  # (i, d_union, d_F, d_G)
    distances: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "limits": {k: v.as_dict() for k, v in self.limits.items()},
            "bound_violations": [[i, str(a), str(b), str(c)] for i, a, b, c in self.bound_violations],
            "distances": [[i, str(a), str(b), str(c)] for i, a, b, c in self.distances],
        }


def union_continuity_check(
    F_seq: Sequence[FinitePatch],
    F: FinitePatch,
    G_seq: Sequence[FinitePatch],
    G: FinitePatch,
    config: CFConfig = CFConfig(),
) -> UnionContinuityVerdict:
    """F_i -> F and G_i -> G should give F_i cup G_i -> F cup G.

    Checks the three limits and, for every i,
    d(F_i cup G_i, F cup G) <= max(d(F_i, F), d(G_i, G)) + tolerance.
    """
    if len(F_seq) != len(G_seq):
        raise ValueError("sequences must have equal length")
    U_seq = [a.union(b) for a, b in zip(F_seq, G_seq)]
    U = F.union(G)
    limits = {
        "F": cf_limit_check(F_seq, F, config),
        "G": cf_limit_check(G_seq, G, config),
        "union": cf_limit_check(U_seq, U, config),
    }
    verdict = UnionContinuityVerdict(all(v.passed for v in limits.values()), limits)
    tol = config.tolerance
    for i, (a, b, u) in enumerate(zip(F_seq, G_seq, U_seq)):
        du, da, db = cf_distance(u, U, config), cf_distance(a, F, config), cf_distance(b, G, config)
        verdict.distances.append((i, du, da, db))
        if du > max(da, db) + tol:
            verdict.bound_violations.append((i, du, da, db))
            verdict.passed = False
    return verdict


@dataclass
class PropagationVerdict:
    passed: bool
    translate: Optional[GroupPoint] = None
    witness: Optional[GroupPoint] = None
    margin: object = Fraction(0)
    checked: int = 0
    translates: tuple = ()

    def as_dict(self) -> dict:
        fmt = lambda g: None if g is None else [format_scalar(c) for c in g.coords]  # noqa: E731
        return {
            "passed": self.passed,
            "translate": fmt(self.translate),
            "witness": fmt(self.witness),
            "boundary_margin": format_scalar(self.margin),
            "points_checked": self.checked,
            "translates": [fmt(g) for g in self.translates],
        }


def quasi_monotone_check(P: DiscreteSet, Q: DiscreteSet, F: Sequence[GroupPoint], translates, window) -> PropagationVerdict:
    """Check that P subset QF persists along sampled translates: (gP) cap W subset (gQ)F.

    Points within diam(F) of the window boundary are exempt.  Raises
    :class:`BaseInclusionError` (with the least violating point) when P is
    not covered by QF on the window itself.
    """
    window = exact_box(window)
    F = list(F)

    def covered(x: GroupPoint, shift: Optional[GroupPoint]) -> bool:
        for f in F:
            y = x * f.inverse()
            if shift is not None:
                y = shift.inverse() * y
            if Q.contains(y):
                return True
        return False

    for p in sorted(P.points_in(window), key=order_key):
        if not covered(p, None):
            raise BaseInclusionError(p)
    margin = _diameter(F)
    inner = shrink_box(window, margin)
    checked = 0
    for g in translates:
        patch = _translate_patch(P, g, window)
        for x in sorted(patch.points, key=order_key):
            if inner is None or not in_box(x.coords, inner):
                continue
            checked += 1
            if not covered(x, g):
                return PropagationVerdict(False, g, x, margin, checked, tuple(translates))
    return PropagationVerdict(True, margin=margin, checked=checked, translates=tuple(translates))


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of R^n spanned by ``basis`` (a closed, non-discrete subgroup)."""

    model: GroupModel
    basis: tuple
    offset: Optional[tuple] = None

    def __post_init__(self):
        basis = tuple(tuple(as_fraction(x) if not isinstance(x, QuadElem) else x for x in v) for v in self.basis)
        if basis and rank([list(v) for v in basis]) != len(basis):
            raise ValueError("degenerate subspace basis")
        object.__setattr__(self, "basis", basis)
        off = tuple(self.offset) if self.offset is not None else (Fraction(0),) * self.model.n
        object.__setattr__(self, "offset", off)

    def contains(self, g: GroupPoint) -> bool:
        return solve_in_span([list(v) for v in self.basis], [c - o for c, o in zip(g.coords, self.offset)]) is not None

    def shifted(self, g: GroupPoint) -> Subspace:
        return Subspace(self.model, self.basis, tuple(o + c for o, c in zip(self.offset, g.coords)))

    def reduce(self, g: GroupPoint) -> GroupPoint:
        """Coset representative orthogonal to the subspace."""
        if not self.basis:
            return g
        pinv = pseudo_inverse([list(v) for v in self.basis])
        n = self.model.n
        coeffs = [sum(row[t] * g.coords[t] for t in range(n)) for row in pinv]
        return self.model.point(*(g.coords[t] - sum(c * v[t] for c, v in zip(coeffs, self.basis)) for t in range(n)))

    def clip(self, box):
        """Exact description of (offset + span) cap box: None, a point, a segment, or the box."""
        n = self.model.n
        k = len(self.basis)
        if k == n:
            return ("box", box)
        if k == 0:
            return ("point", self.offset) if in_box(self.offset, box) else None
        if k != 1:
            raise NotImplementedError("clipping implemented for lines and full or zero subspaces")
        v = self.basis[0]
        lo, hi = None, None
        for t in range(n):
            b0, b1 = box[t]
            if v[t] == 0:
                if not (sign(self.offset[t] - b0) >= 0 and sign(b1 - self.offset[t]) >= 0):
                    return None
                continue
            s0, s1 = (b0 - self.offset[t]) / v[t], (b1 - self.offset[t]) / v[t]
            if s0 > s1:
                s0, s1 = s1, s0
            lo = s0 if lo is None or s0 > lo else lo
            hi = s1 if hi is None or s1 < hi else hi
        if lo is None:
            return ("point", self.offset)
        if sign(hi - lo) < 0:
            return None
        a = tuple(self.offset[t] + lo * v[t] for t in range(n))
        b = tuple(self.offset[t] + hi * v[t] for t in range(n))
        return ("segment", a, b)


@dataclass
class SubgroupHullVerdict:
    passed: bool
    entries: list = field(default_factory=list)  # (translate, representative, kind)
    empty_seen: bool = False

    def as_dict(self) -> dict:
        fmt = lambda g: [format_scalar(c) for c in g.coords]  # noqa: E731
        return {
            "passed": self.passed,
            "empty_element_seen": self.empty_seen,
            "entries": [
                {"translate": fmt(g), "coset_representative": fmt(k), "verdict": kind} for g, k, kind in self.entries
            ],
        }


def subgroup_hull_check(H, translates: Sequence[GroupPoint], window) -> SubgroupHullVerdict:
    """Every sampled translate patch of a closed subgroup is a coset patch or empty.

    ``H`` is a :class:`~approxlab.pointsets.Lattice` or a :class:`Subspace`.
    The coset representative comes from reduction modulo H and the two
    patches are compared exactly.
    """
    window = exact_box(window)
    verdict = SubgroupHullVerdict(True)
    for g in translates:
        k = H.reduce(g)
        if isinstance(H, Lattice):
            patch_g = set(H.shifted(g).points_in(window))
            patch_k = set(H.shifted(k).points_in(window))
        else:
            patch_g = H.shifted(g).clip(window)
            patch_k = H.shifted(k).clip(window)
        if not patch_g:
            verdict.entries.append((g, k, "empty"))
            verdict.empty_seen = True
            continue
        if patch_g == patch_k:
            verdict.entries.append((g, k, "coset"))
        else:
            verdict.entries.append((g, k, "mismatch"))
            verdict.passed = False
    return verdict


def hull_report_json(sections: dict) -> str:
    return json.dumps(sections, indent=2, sort_keys=True)


def hull_counts_csv(sample: HullSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = sample.base.model.n
    w.writerow([f"g{i}" for i in range(n)] + ["count"])
    for g, count in sample.counts():
        w.writerow([format_scalar(c) for c in g.coords] + [count])
    return buf.getvalue()
