"""Exact-arithmetic laboratory for discrete approximate subgroups of concrete groups."""

from .charp import rosenlicht_growth, rosenlicht_solve
from .exactnum import FpSeries, QuadElem, quad_compare, scalar_arith, series_frobenius
from .groupmodels import GroupModel, GroupPoint, HaarQuadrature, group_op, haar_quadrature, modular_function
from .hull import CFConfig, cf_distance, cf_limit_check, emptiness_witness, quasi_monotone_check, subgroup_hull_check
from .pointsets import (
    FinitePatch,
    Lattice,
    ModelSet,
    WitnessSet,
    approx_subgroup_certificate,
    commensurability_witness,
    coset_split,
    delone_parameters,
    membership,
    modelset_product,
    patch_product,
    union_density_locator,
)
from .unimod import b2_density, b3_weights, example3_report
from .zariski import coset_cover_verifier, density_certificate, vanishing_basis

__version__ = "0.1.0"

__all__ = [
    "FpSeries",
    "QuadElem",
    "quad_compare",
    "scalar_arith",
    "series_frobenius",
    "GroupModel",
    "GroupPoint",
    "HaarQuadrature",
    "group_op",
    "haar_quadrature",
    "modular_function",
    "FinitePatch",
    "Lattice",
    "ModelSet",
    "WitnessSet",
    "approx_subgroup_certificate",
    "commensurability_witness",
    "coset_split",
    "delone_parameters",
    "membership",
    "modelset_product",
    "patch_product",
    "union_density_locator",
    "CFConfig",
    "cf_distance",
    "cf_limit_check",
    "emptiness_witness",
    "quasi_monotone_check",
    "subgroup_hull_check",
    "vanishing_basis",
    "density_certificate",
    "coset_cover_verifier",
    "rosenlicht_solve",
    "rosenlicht_growth",
    "b3_weights",
    "b2_density",
    "example3_report",
]
