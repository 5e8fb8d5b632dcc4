"""Densities with large modular mass on the ax+b group, and the {1} x Z example.

Everything here is stated under the convention
integral f(t g) dm(t) = Delta(g)^-1 integral f dm, with Delta(a, b) = 1/a.

The density is rho(t) = alpha rho0(t) + (1 - alpha) rho0(s t), where
rho0(t) = sum_n w_n phi(s_n t) and phi is a normalized tent bump around the
identity.  Since left translation preserves m, the integral of rho is 1, while
the integral of rho * Delta equals alpha gamma + (1 - alpha) gamma Delta(s)^-1
with gamma the integral of rho0 * Delta.  Pushing s far along the a-axis makes
the second term as large as needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exactnum import format_scalar
from .groupmodels import GroupModel, GroupPoint, HaarQuadrature, haar_quadrature, order_key
from .hull import emptiness_witness
from .pointsets import FinitePatch
from .zariski import density_certificate

__all__ = [
    "WeightSequence",
    "DensitySpec",
    "B2Report",
    "b3_weights",
    "tent_bump",
    "dense_sequence",
    "b2_density",
    "example3_report",
]

AXB = GroupModel.axb()


@dataclass
class WeightSequence:
    weights: list
    b: list
    sum_a: float
    sum_ab: float
    c: float  # normalizing constant; sum a*b <= c
    tail_bound: float  # bound on the a*b mass of the terms n > M in the infinite sequence

    def as_dict(self) -> dict:
        return {
            "M": len(self.weights),
            "sum_a": self.sum_a,
            "sum_ab": self.sum_ab,
            "c": self.c,
            "tail_bound": self.tail_bound,
        }


def b3_weights(b: Sequence[float]) -> WeightSequence:
    """a_n = c 2^-n / (1 + b_n), n = 1..M, with c chosen so that sum a_n = 1.

    Termwise a_n b_n <= c 2^-n, so sum a_n b_n <= c whatever b is.
    """
    if not b:
        raise ValueError("need at least one b value")
    bs = [float(x) for x in b]
    if any(x < 0 or not math.isfinite(x) for x in bs):
        raise ValueError("b values must be finite and nonnegative")
    raw = [2.0 ** -(n + 1) / (1 + x) for n, x in enumerate(bs)]
    c = 1 / math.fsum(raw)
    a = [c * r for r in raw]
    return WeightSequence(
        weights=a,
        b=bs,
        sum_a=math.fsum(a),
        sum_ab=math.fsum(x * y for x, y in zip(a, bs)),
        c=c,
        tail_bound=c * 2.0 ** -len(bs),
    )


@dataclass(frozen=True)
class TentBump:
    """phi(x, y) = tent((x - 1)/h) tent(y/h) / Z on [1-h, 1+h] x [-h, h].

    Z = -log(1 - h^2) is the exact integral of the unnormalized bump against
    x^-2 dx dy, so phi has Haar mass 1.
    """

    h: float

    @property
    def Z(self) -> float:
        return -math.log1p(-self.h * self.h)

    @property
    def box(self) -> tuple:
        return ((1 - self.h, 1 + self.h), (-self.h, self.h))

    def __call__(self, x, y):
        tx = np.maximum(0.0, 1 - np.abs(x - 1) / self.h)
        ty = np.maximum(0.0, 1 - np.abs(y) / self.h)
        return tx * ty / self.Z


def tent_bump(h: float = 0.3) -> TentBump:
    if not 0 < h < 1:
        raise ValueError("bump half-width must lie in (0, 1)")
    return TentBump(h)


def dense_sequence(M: int = 64) -> list[GroupPoint]:
    """s_1..s_M whose inverses form a k x k grid (a = 3/5 (7/6)^i, b from -1 to 1),
    ordered by distance of s_n^-1 from the identity."""
    k = max(2, math.isqrt(M - 1) + 1)
    grid = [
        AXB.point(Fraction(3, 5) * Fraction(7, 6) ** i, Fraction(-1) + Fraction(2 * j, k - 1))
        for i in range(k)
        for j in range(k)
    ]
    grid.sort(key=order_key)
    return [g.inverse() for g in grid[:M]]


def _affine_of(g: GroupPoint) -> tuple[float, float]:
    a, b = g.coords
    return float(a), float(b)


def _support_box(g: GroupPoint, box) -> tuple:
    """Exact box {t : g t in box} as floats: t = g^-1 u is (u_a / a, (u_b - b) / a)."""
    a, b = g.coords
    (x0, x1), (y0, y1) = box
    x0, x1, y0, y1 = (Fraction(v) for v in (x0, x1, y0, y1))
    return ((float(x0 / a), float(x1 / a)), (float((y0 - b) / a), float((y1 - b) / a)))


@dataclass
class DensitySpec:
    phi: TentBump
    sequence: list  # s_n
    weights: WeightSequence
    alpha: float
    s: GroupPoint
    gamma: float

    def rho0(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape)
        for g, w in zip(self.sequence, self.weights.weights):
            a, b = _affine_of(g)
            out = out + w * self.phi(a * x, a * y + b)
        return out

    def rho(self, x, y):
        A, B = _affine_of(self.s)
        return self.alpha * self.rho0(x, y) + (1 - self.alpha) * self.rho0(A * x, A * y + B)

    def as_dict(self) -> dict:
        return {
            "bump_half_width": self.phi.h,
            "M": len(self.sequence),
            "alpha": self.alpha,
            "gamma": self.gamma,
            "s": [format_scalar(c) for c in self.s.coords],
            "weights": self.weights.as_dict(),
        }


def _termwise(spec_terms, phi: TentBump, weight_fn, resolution, workers=1) -> float:
    """sum over (w, g) of w * integral phi(g t) weight_fn(t) dm(t), each over {t : g t in supp phi}."""
    parts = []
    for w, g in spec_terms:
        a, b = _affine_of(g)
        q = HaarQuadrature(_support_box(g, phi.box), resolution, workers=workers)
        parts.append(w * haar_quadrature(AXB, lambda x, y: phi(a * x, a * y + b) * weight_fn(x, y), q))
    return math.fsum(parts)


@dataclass
class B2Report:
    spec: DensitySpec
    resolution: tuple
    tolerance: float
    mass: float  # integral of rho
    modular_mass: float  # integral of rho * Delta
    closed_form: float  # alpha gamma + (1 - alpha) gamma Delta(s)^-1
    min_on_grid: float
    grid_region: tuple
    grid_shape: tuple
    refined_mass: float
    refined_modular_mass: float
    margin: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "density": self.spec.as_dict(),
            "resolution": list(self.resolution),
            "tolerance": self.tolerance,
            "margin": self.margin,
            "integral_rho": self.mass,
            "integral_rho_delta": self.modular_mass,
            "closed_form_rho_delta": self.closed_form,
            "refined_integral_rho": self.refined_mass,
            "refined_integral_rho_delta": self.refined_modular_mass,
            "min_rho_on_test_grid": self.min_on_grid,
            "test_grid_region": [list(r) for r in self.grid_region],
            "test_grid_shape": list(self.grid_shape),
            "checks": dict(self.checks),
            "note": "positivity is checked on a compact test grid only; full support needs the infinite sequence",
        }


def b2_density(
    model: GroupModel = AXB,
    M: int = 64,
    margin: float = 0.05,
    resolution: tuple = (1024, 16),
    tolerance: float = 1e-6,
    h: float = 0.3,
    test_region: tuple = ((0.5, 2.2), (-1.1, 1.1)),
    test_shape: tuple = (69, 89),
    max_power: int = 40,
    workers: int = 1,
) -> B2Report:
    """Build rho and verify positivity, unit mass and modular mass > 1."""
    if model.unimodular:
        raise ValueError(f"model {model.descriptor} is unimodular; no density has modular mass > 1")
    if model != AXB:
        raise ValueError("only the ax+b model is supported")
    phi = tent_bump(h)
    seq = dense_sequence(M)
    # b(s) = Delta(s)^-1, as the weighted sum of a(s) Delta(s)^-1 must converge
    ws = b3_weights([1 / model.modular(g) for g in seq])
    terms = list(zip(ws.weights, seq))
    delta = lambda x, y: 1.0 / x  # noqa: E731

    def gamma_at(res):
        return _termwise(terms, phi, delta, res, workers)

    gamma = gamma_at(resolution)
    target = 0.5 + margin
    if gamma <= target:
        raise ValueError(f"gamma = {gamma:.6f} leaves no alpha < 1 with alpha gamma >= {target}")
    alpha = target / gamma
    s = None
    for k in range(max_power + 1):
        cand = model.point(Fraction(2) ** k, 0)
        if (1 - alpha) * gamma * float(1 / model.modular(cand)) > target:
            s = cand
            break
    if s is None:
        raise ValueError(f"no admissible s = (2^k, 0) with k <= {max_power}")
    spec = DensitySpec(phi, seq, ws, alpha, s, gamma)

    def integrals(res):
        # rho0(s t) = sum w phi(s_n s t): the same bumps translated by s_n s
        shifted = [(w, g * s) for w, g in terms]
        one = lambda x, y: np.ones_like(x)  # noqa: E731
        mass = alpha * _termwise(terms, phi, one, res, workers) + (1 - alpha) * _termwise(shifted, phi, one, res, workers)
        mod = alpha * _termwise(terms, phi, delta, res, workers) + (1 - alpha) * _termwise(shifted, phi, delta, res, workers)
        return mass, mod

    mass, mod = integrals(resolution)
    fine = tuple(2 * r for r in resolution)
    fine_mass, fine_mod = integrals(fine)
    closed = alpha * gamma + (1 - alpha) * gamma * float(1 / model.modular(s))

    xs = np.linspace(*test_region[0], test_shape[0])
    ys = np.linspace(*test_region[1], test_shape[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    min_rho = float(spec.rho(X, Y).min())

    checks = {
        "positive_on_test_grid": min_rho > 0,
        "unit_mass": abs(mass - 1) <= tolerance,
        "modular_mass_exceeds_one": mod > 1,
        "modular_mass_margin": mod >= 1 + 0.01,
        "closed_form_agrees": abs(mod - closed) <= 2 * tolerance * max(1.0, abs(closed)),
        "refinement_stable": abs(fine_mass - mass) < tolerance and abs(fine_mod - mod) < tolerance * max(1.0, abs(mod)),
    }
    return B2Report(
        spec, tuple(resolution), tolerance, mass, mod, closed, min_rho, test_region, tuple(test_shape),
        fine_mass, fine_mod, margin, checks,
    )


@dataclass
class Example3Report:
    patch: FinitePatch
    packing: Fraction
    packing_witness: tuple
    emptiness: object
    density: object
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "set": "{1} x Z in ax+b",
            "patch_size": len(self.patch),
            "window": [[format_scalar(x) for x in r] for r in self.patch.window],
            "packing_radius": format_scalar(self.packing),
            "packing_witness": [[format_scalar(c) for c in p.coords] for p in self.packing_witness],
            "emptiness": self.emptiness.as_dict(),
            "density": self.density.as_dict(),
            "checks": dict(self.checks),
        }


def example3_report(window: int = 20, R=1, translates: Optional[Sequence[GroupPoint]] = None, degree: int = 1) -> Example3Report:
    """Uniform discreteness, failure of relative density, and a vanishing
    degree-1 polynomial for {1} x Z in the ax+b group.

    The patch holds (1, n) for |n| <= window on [2^-10, 2^10] x [-window, window],
    where it is complete.
    """
    K = int(window)
    box = ((Fraction(1, 1024), Fraction(1024)), (Fraction(-K), Fraction(K)))
    P = FinitePatch(AXB, tuple(AXB.point(1, n) for n in range(-K, K + 1)), box)
    pts = P.points
    packing, pair = None, None
    for i, g in enumerate(pts):
        for q in pts[i + 1 :]:
            d = AXB.distance(g, q)
            if packing is None or d < packing:
                packing, pair = d, (g, q)
    empt = emptiness_witness(P, R, translates)
    dens = density_certificate([p.coords for p in pts], degree, names=("a", "b"))
    w = dens.witness
    # proportional to a - 1: only the constant and the a-coefficient are nonzero, and they are opposite
    prop = w is not None and w[0] != 0 and w[1] == -w[0] and all(c == 0 for c in w[2:])
    checks = {
        "packing_radius_is_one": packing == 1,
        "emptiness_witness_found": empt.found,
        "refuted_by_a_minus_1": dens.verdict == "refuted" and prop,
    }
    return Example3Report(P, packing, pair, empt, dens, checks)
