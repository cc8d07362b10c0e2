"""Exact finite-stage construction of asymptotic functions and distribution products."""

from .asympfunc import (
    Representative,
    check_pairing_preservation,
    check_smooth_consistency,
    classify,
    embed_distribution,
    embed_smooth,
    product_experiment,
    rep_pair,
)
from .delta import DeltaNet, Domain1D, audit_delta, build_cutoff, instantiate_delta, parse_domain
from .distributions import continuity_bound, convolve_with_test, pair, parse_distribution, parse_test_function
from .exact import Enclosure, PiecewisePoly, Poly, isolate_real_roots, pw_abs, pw_convolve, pw_integrate
from .expansion import fit_expansion, make_ladder, measure_order, parse_ladder
from .field import AsymptoticNumber, an_cmp, parse_series, puiseux_root
from .mollifier import build_base, build_mollifier, exponent_report, find_epsilon, l1_norm, solve_vandermonde

__all__ = [name for name in dir() if not name.startswith("_")]
