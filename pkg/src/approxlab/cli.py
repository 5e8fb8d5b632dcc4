"""Command-line scenarios.  Each subcommand builds one example, runs its checks,
writes ``<out>/<scenario>.json`` (and ``.csv`` plot data with ``--format csv``)
and exits 0 when every check passes, 1 otherwise, 2 on usage errors."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .charp import finite_subset_certificate, rosenlicht_growth, rosenlicht_solve
from .exactnum import QuadElem, format_scalar
from .groupmodels import GroupModel
from .hull import (
    BaseInclusionError,
    CFConfig,
    Subspace,
    WindowTooSmall,
    cf_distance,
    cf_limit_check,
    default_translates,
    emptiness_witness,
    hull_sample,
    identity_ball,
    quasi_monotone_check,
    subgroup_hull_check,
    union_continuity_check,
)
from .pointsets import (
    FinitePatch,
    NotEvaluable,
    ScaleInsufficient,
    Lattice,
    ModelSet,
    approx_subgroup_certificate,
    delone_parameters,
    dump_patch,
    membership,
    modelset_product,
    translate_box,
    union_density_locator,
)
from .unimod import b2_density, b3_weights, example3_report
from .zariski import coset_cover_verifier, density_certificate, vanishing_basis

__all__ = ["main", "run", "SCENARIOS"]


class Scenario:
    """Collects checks, report sections and optional CSV rows for one run."""

    def __init__(self, name: str, scale: dict):
        self.name = name
        self.report: dict = {"scenario": name, "scale": scale}
        self.checks: dict[str, bool] = {}
        self.csv_header: Optional[list] = None
        self.csv_rows: list = []
        self.notes: list[str] = []
        self.files: dict[str, str] = {}

    def check(self, name: str, ok: bool) -> bool:
        self.checks[name] = bool(ok)
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def finish(self) -> dict:
        self.report["checks"] = dict(self.checks)
        self.report["passed"] = self.passed
        return self.report


def _pt(g) -> list[str]:
    return [format_scalar(c) for c in g.coords]


def _density_note(sc: Scenario, cert) -> None:
    if cert.granted:
        sc.notes.append(f"Zariski dense up to degree {cert.degree} (over {cert.field}, sample of {cert.sample_size})")


# -- scenarios -------------------------------------------------------------------------------


def scenario_meyer(args) -> Scenario:
    X = Fraction(args.window if args.window is not None else 20)
    sc = Scenario("meyer", {"d": 2, "internal_window": "[-1,1]", "physical_window": str(X)})
    L = ModelSet(2, -1, 1)
    r2 = QuadElem(0, 1, 2)
    samples = {
        "(1,1)": (L.model.point(1, 1), True),
        "(1+sqrt2,1-sqrt2)": (L.model.point(1 + r2, 1 - r2), True),
        "(3,3)": (L.model.point(3, 3), False),
    }
    sc.report["membership"] = {}
    for label, (g, expected) in samples.items():
        got = membership(L, g)
        sc.report["membership"][label] = got
        sc.check(f"membership {label}", got == expected)
    sq, chk = modelset_product(L, L, "product", check_window=X)
    inv, _ = modelset_product(L, op="inverse", check_window=X)
    cube, chk3 = modelset_product(L, op="power", k=3, check_window=X)
    sc.report["square"] = {"set": sq.describe(), "forward_pairs": chk[0].forward_pairs, "decomposed": chk[0].reverse_points}
    sc.report["inverse"] = inv.describe()
    sc.report["cube"] = {"set": cube.describe(), "decomposed": [c.reverse_points for c in chk3]}
    sc.check("square window [-2,2]", (sq.lo, sq.hi) == (-2, 2))
    sc.check("inverse window [-1,1]", (inv.lo, inv.hi) == (-1, 1))
    sc.check("cube window [-3,3]", (cube.lo, cube.hi) == (-3, 3))
    # physical projection is a Meyer set in R: finite covering radius on the window
    R1 = GroupModel.rn(1)
    proj = FinitePatch(R1, tuple(R1.point(g.coords[0]) for g in L.points_in(L.physical_box(X))), ((-X, X),), True)
    dp = delone_parameters(proj, ((-X, X),))
    sc.report["projection_delone"] = dp.as_dict()
    sc.check("projection relatively dense at window scale", dp.relatively_dense)
    sc.check("projection uniformly discrete", dp.packing is not None and dp.packing > 0)
    patch = L.patch(X)
    sc.report["patch_size"] = len(patch)
    sc.report["patch_file"] = "meyer_patch.txt"
    sc.files = {"meyer_patch.txt": dump_patch(patch)}
    sc.csv_header = ["physical", "internal"]
    sc.csv_rows = [[float(g.coords[0]), float(g.coords[1])] for g in patch.points]
    return sc


def scenario_thin(args) -> Scenario:
    X = Fraction(args.window if args.window is not None else 50)
    dmax = args.degree if args.degree is not None else 3
    K, scale, R = 30, Fraction(10), 5
    sc = Scenario("thin", {"d": 2, "internal_window": "[-1,1]", "index_window": K, "count_box": str(X),
                           "certificate_scale": str(scale), "emptiness_radius": R, "max_degree": dmax})
    L = ModelSet(2, -1, 1)
    # (a) symmetric, identity, growth
    big = len(L.points_in(L.physical_box(X)))
    small = len(L.points_in(L.physical_box(X / 2)))
    sc.report["counts"] = {str(X / 2): small, str(X): big}
    sc.check("symmetric", L.symmetric and all(L.contains(-g) for g in L.points_in(L.physical_box(X))))
    sc.check("contains identity", L.contains(L.model.identity()))
    sc.check("growth", big > small >= 10)
    # (b) approximate subgroup certificate
    w = approx_subgroup_certificate(L, scale)
    sq, _ = modelset_product(L, L, check_window=scale)
    targets = sq.points_in(sq.physical_box(scale))
    reverified = all(any(L.contains(p - f) for f in w.points) for p in targets)
    sc.report["certificate"] = w.as_dict()
    sc.check("certificate |F| <= 3", len(w) <= 3)
    sc.check("certificate re-verifies", reverified and w.verified)
    # Lambda^3 inside F^2 Lambda
    cube, _ = modelset_product(L, op="power", k=3, check_window=scale)
    F2 = {f + h for f in w.points for h in w.points}
    cube_pts = cube.points_in(cube.physical_box(scale))
    sc.check("cube covered by F^2 Lambda", all(any(L.contains(p - f) for f in F2) for p in cube_pts))
    # (c) not relatively dense
    e = emptiness_witness(L, R)
    sc.report["emptiness"] = e.as_dict()
    sc.check("emptiness witness (0,T)", e.found and e.translate.coords[0] == 0)
    # (d) density up to degree dmax, and for the square
    patch = L.index_patch(K)
    sq_patch = sq.index_patch(K)
    sc.report["density"] = {}
    for d in range(1, dmax + 1):
        cert = density_certificate(patch.points, d)
        cert2 = density_certificate(sq_patch.points, d)
        sc.report["density"][str(d)] = {"set": cert.as_dict(), "square": cert2.as_dict()}
        sc.check(f"granted({d})", cert.granted)
        sc.check(f"square granted({d})", (not cert.granted) or cert2.granted)
        _density_note(sc, cert)
    sc.csv_header = ["half_width", "count"]
    sc.csv_rows = [[k, len(L.points_in(L.physical_box(k)))] for k in range(5, int(X) + 1, 5)]
    return sc


def scenario_example3(args) -> Scenario:
    window = args.window if args.window is not None else 20
    d = args.degree if args.degree is not None else 1
    sc = Scenario("example3", {"window": window, "degree": d, "emptiness_radius": 1})
    rep = example3_report(window, 1, None, d)
    sc.report.update(rep.as_dict())
    for k, v in rep.checks.items():
        sc.check(k, v)
    sc.csv_header = ["translate_a", "points_in_ball"]
    ball = identity_ball(rep.patch.model, 1)
    for g in default_translates(rep.patch.model, 6):
        sc.csv_rows.append([format_scalar(g.coords[0]), len(rep.patch.points_in(translate_box(rep.patch.model, g.inverse(), ball)))])
    return sc


def scenario_rosenlicht(args) -> Scenario:
    p = args.p if args.p is not None else 2
    N = args.N if args.N is not None else 8
    V = args.valuation_floor if args.valuation_floor is not None else 3
    sc = Scenario("rosenlicht", {"p": p, "N": N, "valuation_floor": -V})
    rep = rosenlicht_growth(p, range(1, N + 1), V)
    sc.report.update(rep.as_dict())
    sc.check("solver equals enumeration", bool(rep.oracle) and all(rep.oracle.values()))
    dims = rep.dimensions
    sc.check("dimension strictly increasing from N=2", all(a < b for a, b in zip(dims[1:], dims[2:])))
    top = rep.spaces[-1]
    closed = True
    vecs = top.vectors()
    span = top.span()
    for u in vecs:
        for v in vecs:
            closed &= tuple((a + b) % p for a, b in zip(u, v)) in span
        closed &= tuple((-a) % p for a in u) in span
    sc.check("closed under addition and negation", closed)
    sc.check("no Laurent solutions", rep.laurent_free)
    sc.check("solutions integral or of valuation -1 only", rep.lowest_solution_valuation >= -1)
    small = rosenlicht_solve(p, min(N, 3))
    w = finite_subset_certificate(small)
    sc.report["finite_subset_certificate"] = w.as_dict()
    sc.check("finite subset is an approximate subgroup", w.verified)
    sc.csv_header = ["N", "dimension"]
    sc.csv_rows = [[s.N, s.dimension] for s in rep.spaces]
    return sc


def scenario_borel_shape(args) -> Scenario:
    K = int(args.window if args.window is not None else 10)
    d = args.degree if args.degree is not None else 2
    sc = Scenario("borel-shape", {"index_window": K, "degree": d})
    pts = [(Fraction(n), Fraction(0)) for n in range(-K, K + 1)] + [(Fraction(n), Fraction(1)) for n in range(-K, K + 1)]
    cover = coset_cover_verifier(pts, d)
    sc.report["cover"] = cover.as_dict()
    sc.check("H is the first axis", [list(v) for v in cover.H] == [[1, 0]])
    sc.check("|F| = 2", len(cover.F) == 2)
    sc.check("inclusions re-verified", cover.inclusions_verified)
    _density_note(sc, cover.density)
    dense = coset_cover_verifier([(Fraction(i), Fraction(j)) for i in range(-2, 3) for j in range(-2, 3)], d)
    sc.report["lattice_patch_cover"] = dense.as_dict()
    sc.check("Z^2 patch gives full space", len(dense.H) == 2 and len(dense.F) == 1)
    sc.csv_header = ["x", "y", "cluster"]
    for i, c in enumerate(cover.clusters):
        sc.csv_rows.extend([[format_scalar(x), format_scalar(y), i] for x, y in c])
    return sc


def _parse_resolution(text) -> tuple:
    if text is None:
        return (1024, 16)
    if isinstance(text, tuple):
        return text
    if "x" in str(text):
        a, b = str(text).split("x")
        return (int(a), int(b))
    return (int(text), 16)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _prime(text: str) -> int:
    v = _positive_int(text)
    if v < 2 or any(v % q == 0 for q in range(2, math.isqrt(v) + 1)):
        raise argparse.ArgumentTypeError(f"expected a prime, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _resolution(text: str) -> tuple:
    try:
        res = _parse_resolution(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CELLS or CELLSxCELLS, got {text!r}")
    if min(res) < 1:
        raise argparse.ArgumentTypeError(f"cell counts must be positive, got {text!r}")
    return res


def scenario_unimod(args) -> Scenario:
    res = _parse_resolution(args.resolution)
    tol = args.tolerance if args.tolerance is not None else 1e-6
    sc = Scenario("unimod", {"resolution": list(res), "tolerance": tol, "M": 64, "margin": 0.05})
    rep = b2_density(resolution=res, tolerance=tol)
    sc.report["b2"] = rep.as_dict()
    for k, v in rep.checks.items():
        sc.check(k, v)
    w0 = b3_weights([0] * 16)
    w1 = b3_weights([2.0 ** n for n in range(1, 17)])
    w2 = b3_weights(list(range(1, 17)))
    sc.report["b3"] = {"zero": w0.as_dict(), "powers_of_two": w1.as_dict(), "linear": w2.as_dict()}
    sc.check("b3 unit mass", all(abs(w.sum_a - 1) <= 1e-12 for w in (w0, w1, w2)))
    sc.check("b3 bounded", all(w.sum_ab <= w.c for w in (w0, w1, w2)))
    sc.csv_header = ["a", "rho_at_b0"]
    xs = np.linspace(0.5, 2.2, 35)
    vals = rep.spec.rho(xs, np.zeros_like(xs))
    sc.csv_rows = [[float(x), float(v)] for x, v in zip(xs, vals)]
    return sc


def _random_patch(rng: random.Random, model: GroupModel, W: int, count: int) -> FinitePatch:
    pts = set()
    while len(pts) < count:
        pts.add(tuple(Fraction(rng.randint(-8 * W, 8 * W), 8) for _ in range(model.n)))
    box = tuple((Fraction(-W), Fraction(W)) for _ in range(model.n))
    return FinitePatch(model, tuple(model.point(*c) for c in sorted(pts)), box, True)


def scenario_hull_suite(args) -> Scenario:
    seed = args.seed if args.seed is not None else 0
    Wn = int(args.window if args.window is not None else 48)
    sc = Scenario("hull-suite", {"seed": seed, "window": Wn, "eps_grid": "i/128", "random_patches": 100})
    rng = random.Random(seed)
    R1, R2 = GroupModel.rn(1), GroupModel.rn(2)
    # identity and symmetry on random patches
    patches = [_random_patch(rng, R1 if i % 2 else R2, 16, rng.randint(1, 12)) for i in range(100)]
    ident = all(cf_distance(P, P) == 0 for P in patches)
    sym = True
    for P, Q in zip(patches, patches[2:] + patches[:2]):
        a = b = "window too small"
        try:
            a = cf_distance(P, Q)
        except WindowTooSmall:
            pass
        try:
            b = cf_distance(Q, P)
        except WindowTooSmall:
            pass
        sym &= a == b
    sc.check("d(P,P) = 0 on 100 patches", ident)
    sc.check("symmetry on random pairs", sym)
    W = ((Fraction(-200), Fraction(200)),)
    Z = Lattice(R1, ((1,),))
    dq = cf_distance(Z.patch(W), Z.shifted(R1.point(Fraction(1, 4))).patch(W))
    sc.report["d(Z, Z+1/4)"] = str(dq)
    sc.check("d(Z, Z+1/4) = 1/4", dq == Fraction(1, 4))
    # limits
    Wl = ((Fraction(-Wn), Fraction(Wn)),)
    cfg = CFConfig(tuple(Fraction(i, 32) for i in range(32, 0, -1)))
    seq = [Z.shifted(R1.point(Fraction(1, n))).patch(Wl) for n in range(1, 41)]
    lim = cf_limit_check(seq, Z.patch(Wl), cfg)
    sc.report["limit_1_over_n"] = lim.as_dict()
    sc.check("1/n translates converge to Z", lim.passed)
    L = ModelSet(2, -1, 1)
    box2 = ((Fraction(-8), Fraction(8)), (Fraction(-8), Fraction(8)))
    vert = [P for _, P in hull_sample(L, [L.model.point(0, n) for n in range(1, 21)], box2).entries]
    empty = FinitePatch(L.model, (), box2, True)
    lim2 = cf_limit_check(vert, empty, cfg)
    sc.report["limit_vertical_to_empty"] = lim2.as_dict()
    sc.check("vertical translates of the model set tend to the empty set", lim2.passed)
    Z2 = Lattice(R1, ((2,),), (Fraction(1, 3),))
    Fs = [Z.shifted(R1.point(Fraction(1, n))).patch(Wl) for n in range(1, 41)]
    Gs = [Z2.shifted(R1.point(Fraction(-1, n))).patch(Wl) for n in range(1, 41)]
    uc = union_continuity_check(Fs, Z.patch(Wl), Gs, Z2.patch(Wl), cfg)
    sc.report["union_continuity"] = uc.as_dict()
    sc.check("union continuity", uc.passed)
    # inclusion propagation
    two = Lattice(R1, ((2,),))
    tr = [R1.point(Fraction(k, 3)) for k in range(-6, 7)]
    Wq = ((Fraction(-20), Fraction(20)),)
    q1 = quasi_monotone_check(two, Z, [R1.point(0)], tr, Wq)
    q2 = quasi_monotone_check(Z, two, [R1.point(0), R1.point(1)], tr, Wq)
    sc.report["propagation"] = {"2Z in Z": q1.as_dict(), "Z in 2Z+{0,1}": q2.as_dict()}
    sc.check("propagation 2Z in Z+{0}", q1.passed)
    sc.check("propagation Z in 2Z+{0,1}", q2.passed)
    try:
        quasi_monotone_check(Z, two, [R1.point(0)], tr, Wq)
        witness = None
    except BaseInclusionError as exc:
        witness = exc.point
    sc.report["propagation"]["Z in 2Z+{0}"] = {"base_inclusion_witness": None if witness is None else _pt(witness)}
    sc.check("base inclusion fails with witness 1", witness is not None and witness.coords == (1,))
    # closed subgroups
    Wh2 = ((Fraction(-6), Fraction(6)), (Fraction(-6), Fraction(6)))
    tr1 = [R1.point(Fraction(k, 4)) for k in range(-8, 9)]
    tr2 = [R2.point(Fraction(a, 2), Fraction(b, 1)) for a in range(-3, 4) for b in range(-10, 11, 5)]
    h1 = subgroup_hull_check(Z, tr1, ((Fraction(-6), Fraction(6)),))
    h2 = subgroup_hull_check(Lattice(R2, ((1, 0),)), tr2, Wh2)
    h3 = subgroup_hull_check(Subspace(R2, ((1, 0),)), tr2, Wh2)
    sc.report["subgroup_hulls"] = {"Z": h1.as_dict(), "Zx0": h2.as_dict(), "Rx0": h3.as_dict()}
    sc.check("hull of Z in R", h1.passed)
    sc.check("hull of Zx0 in R^2 (empty element seen)", h2.passed and h2.empty_seen)
    sc.check("hull of Rx0 in R^2", h3.passed)
    # difference-set locator
    Wd = ((Fraction(-512), Fraction(512)),)
    pw = [R1.point(s * 2 ** k) for k in range(10) for s in (1, -1)]
    pw_patch = FinitePatch(R1, tuple(pw), Wd, True)
    three = Lattice(R1, ((3,),)).patch(Wd)
    i1, dp1, tried1 = union_density_locator([pw_patch, three], Wd)
    sparse = FinitePatch(R1, tuple(R1.point(s * 100 * k) for k in range(1, 6) for s in (1, -1)), Wd, True)
    i2, dp2, tried2 = union_density_locator([two.patch(Wd), sparse], Wd)
    sc.report["density_locator"] = {
        "powers_of_two_vs_3Z": {"index": i1, "witness": dp1.as_dict(), "tried": [t.as_dict() for t in tried1]},
        "2Z_vs_sparse": {"index": i2, "witness": dp2.as_dict()},
    }
    sc.check("locator picks 3Z", i1 == 2)
    sc.check("locator picks 2Z", i2 == 1)
    hs = hull_sample(L, [L.model.point(0, n) for n in range(0, 9)], box2)
    sc.csv_header = ["g0", "g1", "count"]
    sc.csv_rows = [[format_scalar(g.coords[0]), format_scalar(g.coords[1]), c] for g, c in hs.counts()]
    return sc


def random_point_set(rng: random.Random, size: int) -> list[tuple]:
    pts: set = set()
    while len(pts) < size:
        pts.add((Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6), rng.randint(1, 3))))
    return sorted(pts)


def zariski_property_suite(seed: int = 0, sets: int = 50, max_size: int = 12) -> dict:
    """Hilbert-function and soundness properties on random rational point sets in the plane."""
    rng = random.Random(seed)
    out = {"nondecreasing": True, "saturates": True, "vanishes": True, "monotone": True, "sets": sets}
    for _ in range(sets):
        P = random_point_set(rng, rng.randint(1, max_size))
        hs = []
        for d in range(0, len(P) + 1):
            vb = vanishing_basis(P, d)
            hs.append(vb.hilbert)
            out["vanishes"] &= vb.vanishes_on(P)
            out["saturates"] &= vb.hilbert <= min(len(P), len(vb.monomials))
            if d >= len(P) - 1:
                out["saturates"] &= vb.hilbert == len(P)
        out["nondecreasing"] &= all(a <= b for a, b in zip(hs, hs[1:]))
        extra = random_point_set(rng, len(P) + 1)
        bigger = list(dict.fromkeys(P + [q for q in extra if q not in P][:1]))
        for d in (1, 2, 3):
            if density_certificate(P, d).granted:
                out["monotone"] &= density_certificate(bigger, d).granted
    return out


def scenario_zariski(args) -> Scenario:
    seed = args.seed if args.seed is not None else 0
    d = args.degree if args.degree is not None else 3
    sc = Scenario("zariski", {"seed": seed, "degree": d, "random_sets": 50, "max_set_size": 12})
    grid5 = [(Fraction(i), Fraction(j)) for i in range(5) for j in range(5)]
    cert = density_certificate(grid5, d)
    sc.report["Z2_5x5"] = cert.as_dict()
    sc.check(f"5x5 grid granted({d})", cert.granted)
    _density_note(sc, cert)
    line = vanishing_basis([(0, 0), (1, 0), (2, 0)], 1)
    sc.report["collinear"] = {"basis": line.polynomials(), "hilbert": line.hilbert}
    sc.check("collinear points: basis {y}", line.polynomials() == ["(1)*y"] and line.hilbert == 2)
    props = zariski_property_suite(seed)
    sc.report["properties"] = props
    for k in ("nondecreasing", "saturates", "vanishes", "monotone"):
        sc.check(f"property {k}", props[k])
    sc.csv_header = ["degree", "hilbert_5x5"]
    sc.csv_rows = [[k, vanishing_basis(grid5, k).hilbert] for k in range(0, 7)]
    return sc


SCENARIOS: dict[str, Callable] = {
    "meyer": scenario_meyer,
    "thin": scenario_thin,
    "example3": scenario_example3,
    "rosenlicht": scenario_rosenlicht,
    "borel-shape": scenario_borel_shape,
    "unimod": scenario_unimod,
    "hull-suite": scenario_hull_suite,
    "zariski": scenario_zariski,
}


SCENARIO_HELP = {
    "meyer": "cut-and-project set over sqrt 2: membership, window arithmetic, Delone parameters",
    "thin": "Zariski-dense approximate subgroup that is not relatively dense",
    "example3": "{1} x Z in the ax+b group: discrete, not relatively dense, not Zariski dense",
    "rosenlicht": "solutions of y^p = t x^p - x over F_p((t)): growth, oracle, Laurent search",
    "borel-shape": "coset cover g + F + H of two horizontal lines of integers",
    "unimod": "density on ax+b with unit mass and modular mass above 1",
    "hull-suite": "local-matching distance, limits, inclusion propagation, subgroup hulls",
    "zariski": "vanishing-ideal properties on random rational point sets",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxlab", description="Exact certificates for discrete approximate subgroups.")
    sub = parser.add_subparsers(dest="scenario", metavar="scenario")
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=SCENARIO_HELP[name], description=SCENARIO_HELP[name])
        sp.add_argument("--window", type=_positive_int, default=None, help="window size (scenario-specific; see README)")
        sp.add_argument("--degree", type=_positive_int, default=None, help="polynomial degree bound")
        sp.add_argument("--p", type=_prime, default=None, help="characteristic for rosenlicht")
        sp.add_argument("--N", type=_positive_int, default=None, help="series precision for rosenlicht")
        sp.add_argument("--valuation-floor", type=_positive_int, default=None, dest="valuation_floor", help="Laurent search depth V")
        sp.add_argument("--tolerance", type=_positive_float, default=None, help="quadrature tolerance")
        sp.add_argument("--resolution", type=_resolution, default=None, help="quadrature cells, e.g. 1024 or 1024x16")
        sp.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--format", choices=("json", "csv"), default="json", help="also write CSV plot data with csv")
    return parser


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run(argv: Optional[list] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(stdout)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    if args.scenario is None:
        parser.print_usage(stdout)
        return 2
    try:
        sc = SCENARIOS[args.scenario](args)
    except (NotEvaluable, ScaleInsufficient) as exc:
        # the requested window or scale cannot support the scenario
        print(f"approxlab {args.scenario}: error: {exc}", file=sys.stderr)
        return 2
    report = sc.finish()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{sc.name}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for fname, text in sc.files.items():
        (out / fname).write_text(text)
    if args.format == "csv" and sc.csv_header is not None:
        (out / f"{sc.name}.csv").write_text(_write_csv(sc.csv_header, sc.csv_rows))
    for name, ok in sc.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=stdout)
    for note in sc.notes:
        print(note, file=stdout)
    print(f"{sc.name}: {'all checks passed' if sc.passed else 'some checks failed'}", file=stdout)
    return 0 if sc.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
