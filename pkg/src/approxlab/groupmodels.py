"""Concrete locally compact groups: R^n, the ax+b group, and (F_p[[t]]/t^N)^m.

A :class:`GroupModel` fixes the group law, a left-Haar density and the modular
function.  Convention for the modular function:

    integral of f(t g) dm(t) = Delta(g)^{-1} * integral of f dm,

so for the ax+b group (left Haar density a^-2 da db) Delta(a, b) = 1/a.
"""

from __future__ import annotations

import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exactnum import (
    FpSeries,
    QuadElem,
    as_fraction,
    exact_abs,
    format_scalar,
)

__all__ = [
    "ModelMismatch",
    "GroupModel",
    "GroupPoint",
    "HaarQuadrature",
    "parse_model",
    "group_op",
    "modular_function",
    "haar_quadrature",
]


class ModelMismatch(ValueError):
    """Points from different group models were combined."""


@dataclass(frozen=True)
class GroupModel:
    """Descriptor of an ambient group.

    kind is one of ``"Rn"`` (additive R^n, coordinates in Q or Q(sqrt d)),
    ``"axb"`` (the identity component {a > 0} of the ax+b group) or
    ``"series"`` (additive group of m-tuples of F_p series mod t^N).
    """

    kind: str
    n: int = 2
    quad_d: int | None = None
    p: int | None = None
    N: int | None = None

    def __post_init__(self):
        if self.kind not in ("Rn", "axb", "series"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "axb" and self.n != 2:
            raise ValueError("ax+b points have two coordinates")
        if self.kind == "series" and (self.p is None or self.N is None):
            raise ValueError("series model needs p and N")

    @classmethod
    def rn(cls, n: int, quad_d: int | None = None) -> GroupModel:
        return cls("Rn", n, quad_d=quad_d)

    @classmethod
    def axb(cls) -> GroupModel:
        return cls("axb", 2)

    @classmethod
    def series(cls, p: int, N: int, m: int = 2) -> GroupModel:
        return cls("series", m, p=p, N=N)

    @property
    def descriptor(self) -> str:
        if self.kind == "Rn":
            field_ = f":quad({self.quad_d})" if self.quad_d else ""
            return f"Rn:{self.n}{field_}"
        if self.kind == "axb":
            return "axb"
        return f"series:p={self.p}:N={self.N}:m={self.n}"

    @property
    def abelian(self) -> bool:
        return self.kind != "axb"

    @property
    def unimodular(self) -> bool:
        return self.kind != "axb"

    def point(self, *coords) -> GroupPoint:
        return GroupPoint(self, tuple(self._coerce(c) for c in coords))

    def _coerce(self, c):
        if self.kind == "series":
            if not isinstance(c, FpSeries):
                raise TypeError("series model coordinates must be FpSeries")
            return c
        if isinstance(c, QuadElem):
            return c
        if isinstance(c, float):
            return c
        return as_fraction(c)

    def identity(self) -> GroupPoint:
        if self.kind == "axb":
            return GroupPoint(self, (Fraction(1), Fraction(0)))
        if self.kind == "series":
            z = FpSeries.zero(self.p, self.N)
            return GroupPoint(self, (z,) * self.n)
        return GroupPoint(self, (Fraction(0),) * self.n)

    def mul(self, g: GroupPoint, h: GroupPoint) -> GroupPoint:
        if g.model != self or h.model != self:
            raise ModelMismatch(f"{g.model.descriptor} * {h.model.descriptor} in {self.descriptor}")
        if self.kind == "axb":
            (a, b), (a2, b2) = g.coords, h.coords
            return GroupPoint(self, (a * a2, a * b2 + b))
        return GroupPoint(self, tuple(x + y for x, y in zip(g.coords, h.coords)))

    def inv(self, g: GroupPoint) -> GroupPoint:
        if g.model != self:
            raise ModelMismatch(f"{g.model.descriptor} in {self.descriptor}")
        if self.kind == "axb":
            a, b = g.coords
            if a <= 0:
                raise ValueError("ax+b point with a <= 0 is outside the model")
            return GroupPoint(self, (1 / a, -b / a))
        return GroupPoint(self, tuple(-x for x in g.coords))

    def modular(self, g: GroupPoint):
        """Delta(g): 1 on abelian models, 1/a on ax+b (exact for exact input)."""
        if self.kind == "axb":
            return 1 / g.coords[0]
        return Fraction(1)

    def haar_density(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        if self.kind == "axb":
            return coords[0] ** -2.0
        return np.ones_like(coords[0], dtype=float)

    def norm(self, g: GroupPoint):
        """Size of g: max-norm on R^n, max |t|-adic size on series, distance-to-identity box norm on ax+b."""
        if self.kind == "series":
            worst = Fraction(0)
            for c in g.coords:
                if not c.is_zero():
                    worst = max(worst, Fraction(c.p) ** (-c.v))
            return worst
        if self.kind == "axb":
            a, b = g.coords
            return max(exact_abs(a - 1), exact_abs(b))
        return max((exact_abs(c) for c in g.coords), default=Fraction(0))

    def distance(self, g: GroupPoint, h: GroupPoint):
        """Max-norm distance of coordinates (Rn, ax+b) or size of g - h (series)."""
        if self.kind == "series":
            return self.norm(self.mul(self.inv(h), g))
        return max(exact_abs(x - y) for x, y in zip(g.coords, h.coords))


def order_key(g: GroupPoint) -> tuple:
    """Deterministic ordering: size first, then l1 size, then reversed lexicographic.

    The reversed coordinate tie-break prefers positive representatives, so
    witness searches pick 1 before -1.
    """
    m = g.model
    if m.kind == "series":
        return (m.norm(g), tuple(format_scalar(c) for c in g.coords))
    l1 = sum((exact_abs(c) for c in g.coords), Fraction(0))
    return (m.norm(g), l1, tuple(-c for c in g.coords))


@dataclass(frozen=True)
class GroupPoint:
    model: GroupModel
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.model.n:
            raise ValueError(f"{self.model.descriptor} points have {self.model.n} coordinates")
        if self.model.kind == "axb" and self.coords[0] <= 0:
            raise ValueError("ax+b points need a > 0")

    def __mul__(self, other: GroupPoint) -> GroupPoint:
        return self.model.mul(self, other)

    def __add__(self, other: GroupPoint) -> GroupPoint:
        if not self.model.abelian:
            raise TypeError("use * for the ax+b law")
        return self.model.mul(self, other)

    def __sub__(self, other: GroupPoint) -> GroupPoint:
        if not self.model.abelian:
            raise TypeError("use * and inverse() for the ax+b law")
        return self.model.mul(self, self.model.inv(other))

    def __neg__(self) -> GroupPoint:
        return self.model.inv(self)

    def inverse(self) -> GroupPoint:
        return self.model.inv(self)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __repr__(self) -> str:
        return f"({', '.join(format_scalar(c) for c in self.coords)})"

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coords)


_RN_RE = re.compile(r"^Rn:(?P<n>\d+)(?::quad\((?P<d>\d+)\))?$")
_SERIES_DESC_RE = re.compile(r"^series:p=(?P<p>\d+):N=(?P<N>\d+):m=(?P<m>\d+)$")


def parse_model(descriptor: str) -> GroupModel:
    """Parse ``Rn:2``, ``Rn:2:quad(2)``, ``axb`` or ``series:p=2:N=16:m=2``."""
    s = descriptor.strip()
    if s == "axb":
        return GroupModel.axb()
    m = _RN_RE.match(s)
    if m:
        return GroupModel.rn(int(m["n"]), int(m["d"]) if m["d"] else None)
    m = _SERIES_DESC_RE.match(s)
    if m:
        return GroupModel.series(int(m["p"]), int(m["N"]), int(m["m"]))
    raise ValueError(f"unknown model descriptor {descriptor!r}")


def group_op(g: GroupPoint, h: GroupPoint | None = None, op: str = "mul") -> GroupPoint:
    if op == "mul":
        if h is None:
            raise TypeError("mul needs two points")
        if g.model != h.model:
            raise ModelMismatch(f"{g.model.descriptor} vs {h.model.descriptor}")
        return g.model.mul(g, h)
    if op == "inv":
        return g.model.inv(g)
    raise ValueError(f"unknown op {op!r}")


def modular_function(model: GroupModel, g: GroupPoint):
    return model.modular(g)


@dataclass(frozen=True)
class HaarQuadrature:
    """Midpoint rule on a coordinate box.

    ``resolution`` is the number of cells per axis (an int, or one int per axis).
    """

    region: tuple[tuple[float, float], ...]
    resolution: int | tuple[int, ...] = 200
    workers: int = 1
    strips: int = 8

    def cells_per_axis(self) -> tuple[int, ...]:
        if isinstance(self.resolution, int):
            return (self.resolution,) * len(self.region)
        return tuple(self.resolution)


def _strip_contributions(model, f, region, cells, rows) -> np.ndarray:
    (lo0, hi0) = region[0]
    h0 = (hi0 - lo0) / cells[0]
    axes = [lo0 + h0 * (np.arange(rows[0], rows[1]) + 0.5)]
    widths = [h0]
    for (lo, hi), n in zip(region[1:], cells[1:]):
        h = (hi - lo) / n
        axes.append(lo + h * (np.arange(n) + 0.5))
        widths.append(h)
    grids = np.meshgrid(*axes, indexing="ij")
    values = np.asarray(f(*grids), dtype=float)
    if values.shape != grids[0].shape:
        values = np.broadcast_to(values, grids[0].shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("integrand produced non-finite values")
    return (values * model.haar_density(grids) * math.prod(widths)).ravel()


def haar_quadrature(model: GroupModel, f: Callable[..., np.ndarray], q: HaarQuadrature) -> float:
    """Integrate ``f`` against left-Haar measure over ``q.region``.

    ``f`` receives one numpy array per coordinate.  Cell contributions are
    combined with :func:`math.fsum`, so any split into strips (serial or
    threaded) returns the same float.
    """
    if model.kind == "series":
        return _series_haar_sum(model, f)
    if len(q.region) != model.n:
        raise ValueError(f"region has {len(q.region)} axes, model has {model.n}")
    if any(hi <= lo for lo, hi in q.region):
        raise ValueError("empty quadrature region")
    if model.kind == "axb" and q.region[0][0] <= 0:
        raise ValueError("ax+b region must have a > 0")
    cells = q.cells_per_axis()
    bounds = np.linspace(0, cells[0], min(q.strips, cells[0]) + 1).astype(int)
    pieces = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    region = tuple((float(lo), float(hi)) for lo, hi in q.region)
    if q.workers > 1:
        with ThreadPoolExecutor(max_workers=q.workers) as pool:
            parts = list(pool.map(lambda r: _strip_contributions(model, f, region, cells, r), pieces))
    else:
        parts = [_strip_contributions(model, f, region, cells, r) for r in pieces]
    return math.fsum(np.concatenate(parts).tolist())


def _series_haar_sum(model: GroupModel, f) -> float:
    """Exact Haar integral on (F_p[[t]]/t^N)^m, total mass 1: average over residues."""
    p, N, m = model.p, model.N, model.n
    if p ** (N * m) > 1 << 20:
        raise ValueError("series Haar sum limited to p^(N*m) <= 2^20 residues")
    residues = [FpSeries(p, N, cs) for cs in itertools.product(range(p), repeat=N)]
    total = math.fsum(float(f(*combo)) for combo in itertools.product(residues, repeat=m))
    return total / p ** (N * m)
