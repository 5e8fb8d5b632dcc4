"""Degree-bounded vanishing ideals of exact point sets and the certificates built on them.

A finite set is never literally Zariski dense; "dense up to degree d" means
no nonzero polynomial of total degree <= d vanishes on the sample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import comb, gcd, lcm
from typing import Optional, Sequence

from .exactnum import QuadElem, domain_of, format_scalar
from .groupmodels import GroupModel, GroupPoint, order_key
from .linalg import nullspace, rref, solve_in_span

__all__ = [
    "DENSITY_CAVEAT",
    "MonomialBasis",
    "VanishingBasis",
    "DensityCertificate",
    "NonlinearClosure",
    "vanishing_basis",
    "density_certificate",
    "affine_hull",
    "coset_cover_verifier",
    "evaluate",
    "format_polynomial",
]

DENSITY_CAVEAT = (
    "granted(d) means no nonzero polynomial of degree <= d vanishes on the sample; "
    "a finite sample is never Zariski dense outright"
)


class NonlinearClosure(ValueError):
    """The sample's degree-d closure is not a union of parallel affine pieces."""


@dataclass(frozen=True)
class MonomialBasis:
    """Exponent tuples of total degree <= d in graded-lex order (degree, then x1 before x2 ...)."""

    n: int
    d: int

    @cached_property
    def exponents(self) -> tuple:
        out = []
        for deg in range(self.d + 1):
            # compositions of deg into n parts, lexicographically descending
            for combo in itertools.combinations_with_replacement(range(self.n), deg):
                e = [0] * self.n
                for i in combo:
                    e[i] += 1
                out.append(tuple(e))
        return tuple(out)

    def __len__(self) -> int:
        return comb(self.n + self.d, self.d)

    def evaluate_row(self, point: Sequence) -> list:
        # powers[i][k] = x_i^k
        powers = []
        for x in point:
            row = [Fraction(1)]
            for _ in range(self.d):
                row.append(row[-1] * x)
            powers.append(row)
        out = []
        for e in self.exponents:
            v = Fraction(1)
            for i, k in enumerate(e):
                if k:
                    v = v * powers[i][k]
            out.append(v)
        return out


    def integer_row(self, point: Sequence) -> Optional[list[int]]:
        """The evaluation row times prod(q_i^d) for a rational point x_i = n_i/q_i
        (a positive multiple, so the zero pattern and null space are unchanged);
        None if some coordinate is irrational."""
        nums, dens = [], []
        for x in point:
            if isinstance(x, QuadElem):
                if x.b != 0:
                    return None
                x = x.a
            x = Fraction(x)
            nums.append([x.numerator ** k for k in range(self.d + 1)])
            dens.append([x.denominator ** k for k in range(self.d + 1)])
        out = []
        for e in self.exponents:
            v = 1
            for i, k in enumerate(e):
                v *= nums[i][k] * dens[i][self.d - k]
            out.append(v)
        return out


def evaluate(coeffs: Sequence, basis: MonomialBasis, point: Sequence):
    return sum((c * m for c, m in zip(coeffs, basis.evaluate_row(point)) if c != 0), Fraction(0))


def _row(basis: MonomialBasis, point: Sequence) -> list:
    r = basis.integer_row(point)
    return r if r is not None else basis.evaluate_row(point)


def _var_names(n: int) -> list[str]:
    if n <= 3:
        return ["x", "y", "z"][:n]
    return [f"x{i + 1}" for i in range(n)]


def format_polynomial(coeffs: Sequence, basis: MonomialBasis, names: Optional[Sequence[str]] = None) -> str:
    """Human-readable form such as ``(1) + (-1)*a``."""
    names = list(names) if names is not None else _var_names(basis.n)
    terms = []
    for c, e in zip(coeffs, basis.exponents):
        if c == 0:
            continue
        mono = "*".join(
            (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
        )
        cs = f"({format_scalar(c)})"
        terms.append(cs if not mono else f"{cs}*{mono}")
    return " + ".join(terms) if terms else "0"


def _normalize(v: list) -> list:
    """Rationals: primitive integers, first nonzero positive.  Q(sqrt d): first nonzero 1."""
    lead = next(x for x in v if x != 0)
    if all(not isinstance(x, QuadElem) or x.b == 0 for x in v):
        fr = [Fraction(x.a) if isinstance(x, QuadElem) else Fraction(x) for x in v]
        den = 1
        for x in fr:
            den = lcm(den, x.denominator)
        ints = [int(x * den) for x in fr]
        g = 0
        for x in ints:
            g = gcd(g, x)
        s = 1 if (Fraction(lead.a) if isinstance(lead, QuadElem) else lead) > 0 else -1
        return [Fraction(s * x // g) for x in ints]
    return [x / lead for x in v]


@dataclass
class VanishingBasis:
    points: tuple
    degree: int
    monomials: MonomialBasis
    basis: list  # coefficient vectors
    field: str

    @property
    def hilbert(self) -> int:
        return len(self.monomials) - len(self.basis)

    def polynomials(self, names=None) -> list[str]:
        return [format_polynomial(v, self.monomials, names) for v in self.basis]

    def vanishes_on(self, points) -> bool:
        """Re-evaluate every basis polynomial at every point (independent of the elimination)."""
        for p in points:
            row = _row(self.monomials, p)
            for v in self.basis:
                if sum((c * m for c, m in zip(v, row) if c != 0), 0) != 0:
                    return False
        return True


def _coords(p) -> tuple:
    return tuple(p.coords) if isinstance(p, GroupPoint) else tuple(p)


def _field_of(points) -> str:
    doms = {domain_of(c) for p in points for c in p}
    quads = {d for d in doms if d[0] == "quad"}
    if any(d[0] == "series" for d in doms):
        raise ValueError("series coordinates are not supported")
    if len(quads) > 1:
        raise ValueError(f"mixed fields: {sorted(quads)}")
    return f"Q(sqrt {next(iter(quads))[1]})" if quads else "Q"


def vanishing_basis(points, d: int) -> VanishingBasis:
    """All polynomials of degree <= d vanishing on ``points``: exact null space
    of the evaluation matrix (rows = points, columns = monomials)."""
    pts = [_coords(p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate points")
    fld = _field_of(pts)
    n = len(pts[0])
    mb = MonomialBasis(n, d)
    rows = [_row(mb, p) for p in pts]
    basis = [_normalize(v) for v in nullspace(rows, len(mb))]
    return VanishingBasis(tuple(pts), d, mb, basis, fld)


@dataclass
class DensityCertificate:
    verdict: str  # granted | refuted | inconclusive
    degree: int
    sample_size: int
    field: str
    witness: Optional[list] = None
    witness_text: Optional[str] = None
    hilbert: Optional[int] = None

    @property
    def granted(self) -> bool:
        return self.verdict == "granted"

    def as_dict(self) -> dict:
        return {
            "verdict": f"{self.verdict}({self.degree})",
            "sample_size": self.sample_size,
            "field": self.field,
            "hilbert_value": self.hilbert,
            "witness": self.witness_text,
            "witness_coefficients": None if self.witness is None else [format_scalar(c) for c in self.witness],
            "caveat": DENSITY_CAVEAT if self.granted else None,
        }


def density_certificate(points, d: int, names=None) -> DensityCertificate:
    pts = [_coords(p) for p in points]
    n = len(pts[0])
    need = comb(n + d, d)
    fld = _field_of(pts)
    if len(pts) < need:
        return DensityCertificate("inconclusive", d, len(pts), fld)
    vb = vanishing_basis(pts, d)
    if not vb.basis:
        return DensityCertificate("granted", d, len(pts), fld, hilbert=vb.hilbert)
    w = vb.basis[0]
    return DensityCertificate(
        "refuted", d, len(pts), fld, witness=w, witness_text=format_polynomial(w, vb.monomials, names), hilbert=vb.hilbert
    )


def affine_hull(points) -> tuple[tuple, list]:
    """Base point (the first point) and an RREF basis of the direction space."""
    pts = [_coords(p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    diffs = [v for v in diffs if any(x != 0 for x in v)]
    if not diffs:
        return base, []
    R, _ = rref(diffs)
    return base, [list(r) for r in R]


def _line_in_zero_set(vb: VanishingBasis, x: Sequence, y: Sequence) -> bool:
    # a degree <= d polynomial vanishing at d+1 points of a line vanishes on it
    for s in range(2, vb.degree + 1):
        q = [a + s * (b - a) for a, b in zip(x, y)]
        if any(evaluate(v, vb.monomials, q) != 0 for v in vb.basis):
            return False
    return True


@dataclass
class CosetCover:
    H: list  # basis of the subspace
    g: tuple
    F: list
    clusters: list = field(default_factory=list)
    density: Optional[DensityCertificate] = None
    sample_checked: int = 0
    inclusions_verified: bool = False
    grid_checked: int = 0

    def as_dict(self) -> dict:
        fmt = lambda v: [format_scalar(c) for c in v]  # noqa: E731
        return {
            "H_basis": [fmt(v) for v in self.H],
            "g": fmt(self.g),
            "F": [fmt(f) for f in self.F],
            "cluster_sizes": [len(c) for c in self.clusters],
            "density": None if self.density is None else self.density.as_dict(),
            "H_sample_points_checked": self.sample_checked,
            "inclusions_verified": self.inclusions_verified,
            "closure_grid_points_checked": self.grid_checked,
        }


def _in_coset(x, f, H) -> bool:
    return solve_in_span(H, [a - b for a, b in zip(x, f)]) is not None


def coset_cover_verifier(points, d: int, sample_radius: int = 3, grid_limit: int = 4096) -> CosetCover:
    """Shape gH subset closure subset FH for an abelian patch, with H a linear subspace.

    Dense up to degree d: H is everything.  Otherwise points are clustered by
    whether the line through them lies in the degree-d zero set; H is the
    direction space of the largest cluster and F holds one representative per
    cluster.  Both inclusions are then re-checked by exact membership:
    the sampled g + H lies in the zero set and every point lies in F + H.
    Finally a rational grid around the sample is searched for points of the
    degree-d zero set outside F + H (a curve such as y = x^2 is caught there).
    """
    pts = sorted((_coords(p) for p in points), key=lambda c: order_key(GroupModel.rn(len(c)).point(*c)))
    n = len(pts[0])
    cert = density_certificate(pts, d)
    zero = tuple(Fraction(0) for _ in range(n))
    if cert.granted:
        H = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
        return CosetCover(H, zero, [zero], [pts], cert, 0, True)
    vb = vanishing_basis(pts, d)
    clusters: list[list] = []
    for x in pts:
        for c in clusters:
            if _line_in_zero_set(vb, c[0], x):
                c.append(x)
                break
        else:
            clusters.append([x])
    largest = max(clusters, key=len)
    _, H = affine_hull(largest)
    reps = [c[0] for c in clusters]
    for c in clusters:
        for x in c:
            if not _in_coset(x, c[0], H):
                raise NonlinearClosure(f"cluster of {c[0]} is not a coset of the largest cluster's direction space")
    g = largest[0]
    checked = 0
    for ks in itertools.product(range(-sample_radius, sample_radius + 1), repeat=len(H)):
        q = [gi + sum(k * h[i] for k, h in zip(ks, H)) for i, gi in enumerate(g)]
        checked += 1
        if not _in_coset(q, g, H):
            raise NonlinearClosure(f"g + H sample point {q} is outside the largest cluster's affine hull")
        if any(evaluate(v, vb.monomials, q) != 0 for v in vb.basis):
            raise NonlinearClosure(f"g + H sample point {q} is not in the degree-{d} zero set")
    if any(not any(_in_coset(x, f, H) for f in reps) for x in pts):
        raise NonlinearClosure("a point lies outside F + H")
    grid = _closure_probe_grid(pts, grid_limit)
    for q in grid:
        if all(evaluate(v, vb.monomials, q) == 0 for v in vb.basis) and not any(_in_coset(q, f, H) for f in reps):
            raise NonlinearClosure(f"degree-{d} zero set contains {tuple(str(c) for c in q)} outside F + H")
    return CosetCover(H, g, reps, clusters, cert, checked, True, len(grid))


def _closure_probe_grid(pts: list, limit: int) -> list:
    """Rational grid over the sample's bounding box widened by its own size on
    every side, spacing 1/(lcm of denominators); strided down to at most
    ``limit`` points.  Empty for irrational samples."""
    if any(isinstance(c, QuadElem) and c.b != 0 for p in pts for c in p):
        return []
    fr = [[Fraction(c.a) if isinstance(c, QuadElem) else Fraction(c) for c in p] for p in pts]
    axes = []
    for t in range(len(fr[0])):
        col = [p[t] for p in fr]
        den = lcm(*(c.denominator for c in col))
        lo, hi = min(col), max(col)
        span = max(hi - lo, Fraction(1))
        a, b = int((lo - span) * den), int((hi + span) * den)
        axes.append([Fraction(k, den) for k in range(a, b + 1)])
    total = 1
    for ax in axes:
        total *= len(ax)
    stride = 1
    while total > limit:
        stride += 1
        total = 1
        for ax in axes:
            total *= len(ax[::stride])
    return [tuple(q) for q in itertools.product(*(ax[::stride] for ax in axes))]
