"""Normal-form holomorphic vector fields: exact algebra, formal kernels of the conjugate
operator, closed-form complex flows, plane-region diagnostics and leafwise holomorphy checks."""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import GaussianRational, MixedPolynomial, Part, Q, TruncatedSeries
from .fields import NormalFormField, classify, compute_A, validate_normal_form
from .flow import Direction, numeric_flow, symbolic_flow, transport
from .gallery import CounterexampleSpec, Kind, build_counterexample, verify_case
from .kernel import apply_conjugate, solve_kernel
from .region import RegionSpec, find_star_component, membership

__all__ = [
    "CounterexampleSpec",
    "Direction",
    "GaussianRational",
    "Kind",
    "MixedPolynomial",
    "NormalFormField",
    "Part",
    "Q",
    "RegionSpec",
    "TruncatedSeries",
    "apply_conjugate",
    "build_counterexample",
    "classify",
    "compute_A",
    "find_star_component",
    "membership",
    "numeric_flow",
    "solve_kernel",
    "symbolic_flow",
    "transport",
    "validate_normal_form",
    "verify_case",
]
