"""Closed-form functions that are holomorphic along every leaf of a field but not holomorphic,
and finite-difference checks of leafwise and global holomorphy.

Wirtinger derivatives are estimated by central differences,
``d/dzbar = (d/dx + i d/dy) / 2`` with steps ``+-h`` and ``+-ih``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import MixedPolynomial, Q
from .errors import ParameterError, SingularEvaluationError, TrajectoryEscapeError
from .fields import NormalFormField, euler_field
from .flow import Direction, FlowCurve, symbolic_flow

DEFAULT_H = 1e-4
LEAFWISE_TOL = 1e-6
WITNESS_FLOOR = 0.1
HOLOMORPHIC_TOL = 1e-6
# bases within this angle of the negative real axis are treated as on the branch cut,
# so finite-difference stencils never straddle the discontinuity of the principal power
BRANCH_GUARD = 1e-3

DEFAULT_ETAS = ((0.4, 0.3), (0.5, 0.6), (0.3 + 0.2j, 0.45 - 0.1j), (-0.35, 0.25 + 0.3j))
NONREAL_ETAS = ((0.8, 0.7), (0.6, 0.9), (0.7 + 0.3j, 0.8 - 0.2j), (-0.75, 0.5 + 0.6j))


@dataclass(frozen=True)
class SampledFunction:
    n: int
    evaluator: Callable[[Sequence[complex]], complex]
    label: str

    def __call__(self, z: Sequence[complex]) -> complex:
        if len(z) != self.n:
            raise ParameterError(f"{self.label} expects {self.n} coordinates")
        return complex(self.evaluator([complex(x) for x in z]))

    @classmethod
    def from_polynomial(cls, p: MixedPolynomial, label: str | None = None) -> "SampledFunction":
        return cls(p.n, p.to_callable(), label or p.format())


class Kind(enum.Enum):
    FINITE_SMOOTH = "finite-smooth"
    NEGATIVE_RATIO = "negative-ratio"
    NONREAL_RATIO = "nonreal-ratio"


@dataclass(frozen=True)
class CounterexampleSpec:
    """One of the three families; unused parameters are ignored.

    finite-smooth:  F = (zbar_2 / zbar_1) z_1^(k+2), along the Euler field.
    negative-ratio: f = exp(-1 / (|w|^t |z|)), along alpha z d_z + beta w d_w, alpha/beta = -t
                    (default alpha = 1).
    nonreal-ratio:  f = exp[(gamma log|z| + (conj(gamma)/t) log|w|)^b], along
                    alpha z d_z + t conj(alpha) w d_w with gamma = 1/(2 alpha_1) - i/(2 alpha_2)
                    (default alpha = 1 + i/2, b = 2).
    """

    kind: Kind
    k: int = 1
    t: float = 1.0
    alpha: complex | None = None
    beta: complex | None = None
    b: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.FINITE_SMOOTH:
            if int(self.k) != self.k or self.k < 1:
                raise ParameterError("k must be a positive integer")
            object.__setattr__(self, "k", int(self.k))
            return
        if not self.t > 0:
            raise ParameterError("t must be positive")
        if self.alpha is None:
            alpha = 1 + 0.5j if self.kind is Kind.NONREAL_RATIO else 1.0 + 0j
        else:
            alpha = complex(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.kind is Kind.NEGATIVE_RATIO:
            beta = -alpha / self.t if self.beta is None else complex(self.beta)
            if alpha == 0 or beta == 0 or abs(alpha / beta + self.t) > 1e-12 * max(1.0, self.t):
                raise ParameterError("need alpha / beta = -t with alpha, beta nonzero")
            object.__setattr__(self, "beta", beta)
        else:
            if not (alpha.real > 0 and alpha.imag > 0):
                raise ParameterError("nonreal-ratio needs alpha_1 > 0 and alpha_2 > 0")
            if not self.b > 1:
                raise ParameterError("b must exceed 1")
            object.__setattr__(self, "beta", self.t * alpha.conjugate())

    @property
    def gamma(self) -> complex:
        a = self.alpha
        return complex(1 / (2 * a.real), -1 / (2 * a.imag))

    def field(self) -> NormalFormField:
        """The field along whose leaves the function is holomorphic."""
        if self.kind is Kind.FINITE_SMOOTH:
            return euler_field(2)
        return NormalFormField.make([_to_q(self.alpha), _to_q(self.beta)])

    def witness_points(self) -> list[tuple[complex, complex]]:
        if self.kind is Kind.FINITE_SMOOTH:
            return [(0.5, 0.5), (1.0, 1.0)]
        if self.kind is Kind.NEGATIVE_RATIO:
            return [(0.8, 0.9), (1.0, 1.0)]
        return [(0.5, 0.5), (0.3, 0.6)]

    def flow_etas(self) -> tuple:
        """Leaf starting points; nonreal-ratio uses moduli near 1, where |f| and its
        derivatives along leaves stay moderate and the O(h^2) error stays small."""
        if self.kind is Kind.NONREAL_RATIO:
            return NONREAL_ETAS
        return DEFAULT_ETAS

    def to_json(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is Kind.FINITE_SMOOTH:
            out["k"] = self.k
        else:
            out.update(t=self.t, alpha=[self.alpha.real, self.alpha.imag],
                       beta=[self.beta.real, self.beta.imag])
            if self.kind is Kind.NONREAL_RATIO:
                out.update(b=self.b, gamma=[self.gamma.real, self.gamma.imag])
        return out


def _to_q(x: complex) -> Q:
    """Nearest Gaussian rational with a modest denominator (exact for the usual inputs)."""
    return Q(Fraction(x.real).limit_denominator(10**6), Fraction(x.imag).limit_denominator(10**6))


class BranchCounter:
    """Counts evaluations of the nonreal-ratio function whose base sits on the branch cut."""

    def __init__(self):
        self.skipped = 0


def build_counterexample(spec: CounterexampleSpec, branch: BranchCounter | None = None) -> SampledFunction:
    if spec.kind is Kind.FINITE_SMOOTH:
        k = spec.k

        def F(z):
            z1, z2 = z
            if z1 == 0:
                return 0j
            return (z2.conjugate() / z1.conjugate()) * z1 ** (k + 2)

        return SampledFunction(2, F, f"finite-smooth(k={k})")

    if spec.kind is Kind.NEGATIVE_RATIO:
        t = spec.t

        def f(z):
            z1, w = z
            if z1 == 0 or w == 0:
                return 0j
            return complex(math.exp(-1.0 / (abs(w) ** t * abs(z1))))

        return SampledFunction(2, f, f"negative-ratio(t={t:g})")

    gamma, t, b = spec.gamma, spec.t, spec.b
    integer_b = float(b).is_integer()

    def f(z):
        z1, w = z
        if z1 == 0 or w == 0:
            return 0j
        base = gamma * math.log(abs(z1)) + (gamma.conjugate() / t) * math.log(abs(w))
        if not integer_b and base.real < 0 and abs(cmath.phase(base)) > math.pi - BRANCH_GUARD:
            if branch is not None:
                branch.skipped += 1
            raise SingularEvaluationError("base on the branch cut of the principal power")
        return cmath.exp(base ** int(b) if integer_b else cmath.exp(b * cmath.log(base)))

    return SampledFunction(2, f, f"nonreal-ratio(t={t:g}, b={b:g})")


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def _dbar_1d(g: Callable[[complex], complex], x: complex, h: float) -> complex:
    dx = (g(x + h) - g(x - h)) / (2 * h)
    dy = (g(x + 1j * h) - g(x - 1j * h)) / (2 * h)
    return 0.5 * (dx + 1j * dy)


def _d_1d(g: Callable[[complex], complex], x: complex, h: float) -> complex:
    dx = (g(x + h) - g(x - h)) / (2 * h)
    dy = (g(x + 1j * h) - g(x - 1j * h)) / (2 * h)
    return 0.5 * (dx - 1j * dy)


def _along(f: Callable, point: Sequence[complex], j: int) -> Callable[[complex], complex]:
    base = [complex(x) for x in point]

    def g(x):
        p = list(base)
        p[j] = x
        return f(p)

    return g


def wirtinger_residual(f: SampledFunction, point: Sequence[complex], h: float = DEFAULT_H) -> np.ndarray:
    """Estimates of ``df/dzbar_j`` for every j (O(h^2) truncation error)."""
    if len(point) != f.n:
        raise ParameterError(f"point has {len(point)} coordinates, function expects {f.n}")
    try:
        return np.array([_dbar_1d(_along(f, point, j), complex(point[j]), h) for j in range(f.n)])
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise SingularEvaluationError(f"evaluation failed near {list(point)}: {exc}") from exc


def wirtinger_holo(f: SampledFunction, point: Sequence[complex], h: float = DEFAULT_H) -> np.ndarray:
    """Estimates of ``df/dz_j``."""
    return np.array([_d_1d(_along(f, point, j), complex(point[j]), h) for j in range(f.n)])


def _flow_map(field: NormalFormField, direction: Direction) -> FlowCurve:
    return symbolic_flow(field, direction)


def _checked(z: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(z)):
        raise TrajectoryEscapeError("flow left the representable range")
    return z


def leafwise_holomorphy_check(
    f: SampledFunction,
    field: NormalFormField,
    eta: Sequence[complex],
    zeta_samples: Sequence[complex],
    h: float = DEFAULT_H,
    direction: Direction = Direction.FORWARD,
) -> float:
    """Max over samples of ``|dG/dzetabar|`` for ``G(zeta) = f(flow(eta, zeta))``."""
    if field.n != f.n:
        raise ParameterError("field and function dimensions differ")
    curve = _flow_map(field, direction)

    def G(zeta):
        return f(_checked(curve.evaluate(eta, zeta)))

    return max(abs(_dbar_1d(G, complex(z), h)) for z in zeta_samples)


@dataclass(frozen=True)
class CascadeRow:
    j: int
    lhs: complex  # dG/d etabar_j by finite differences
    rhs: complex  # sum_k dF/dzbar_k * conj(dz_k/d eta_j)
    residual: float

    def to_json(self) -> dict:
        return {"j": self.j, "lhs": [self.lhs.real, self.lhs.imag],
                "rhs": [self.rhs.real, self.rhs.imag], "residual": self.residual}


def chain_rule_cascade_check(
    F: SampledFunction,
    field: NormalFormField,
    eta: Sequence[complex],
    zeta: complex,
    h: float = DEFAULT_H,
    direction: Direction = Direction.BACKWARD,
) -> list[CascadeRow]:
    """Compare ``dG/d etabar_j`` (``G(eta) = F(z(eta; zeta))``) with the chain rule.

    Since the flow is holomorphic in ``eta``,
    ``dG/d etabar_j = sum_k dF/dzbar_k(z) * conj(exp(s lambda_k zeta) d(eta_k + q_k)/d eta_j)``.
    For ``j = n`` only ``k = n`` survives; for ``j = n - 1`` the ``k = n`` term carries the
    derivative of the ``g_n`` contribution.  Rows are returned for ``j = n, n-1, ..., 1``.
    """
    if field.n != F.n:
        raise ParameterError("field and function dimensions differ")
    curve = _flow_map(field, direction)
    n = field.n
    eta = [complex(x) for x in eta]
    zeta = complex(zeta)
    z = _checked(curve.evaluate(eta, zeta))
    dF = wirtinger_residual(F, list(z), h)
    point = eta + [zeta]
    rows = []
    for j in reversed(range(n)):
        G = _along(lambda e: F(_checked(curve.evaluate(e, zeta))), eta, j)
        lhs = _dbar_1d(G, eta[j], h)
        rhs = 0j
        for k in range(j, n):
            dk = curve.eta_derivative(k, j)
            if not dk:
                continue
            jac = cmath.exp(curve.exponent_sign * complex(field.lam[k]) * zeta) * dk.evaluate(point)
            rhs += dF[k] * complex(jac).conjugate()
        rows.append(CascadeRow(j, complex(lhs), complex(rhs), float(abs(lhs - rhs))))
    return rows


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

class Verdict(enum.Enum):
    LEAFWISE_HOLOMORPHIC_NOT_GLOBAL = "LeafwiseHolomorphicNotGlobal"
    HOLOMORPHIC = "Holomorphic"
    INCONSISTENT = "Inconsistent"


def decide(leafwise_max: float, dbar_max: float, leafwise_tol: float = LEAFWISE_TOL,
           witness_floor: float = WITNESS_FLOOR, holomorphic_tol: float = HOLOMORPHIC_TOL) -> Verdict:
    if leafwise_max <= leafwise_tol:
        if dbar_max >= witness_floor:
            return Verdict.LEAFWISE_HOLOMORPHIC_NOT_GLOBAL
        if dbar_max <= holomorphic_tol:
            return Verdict.HOLOMORPHIC
    return Verdict.INCONSISTENT


@dataclass(frozen=True)
class Witness:
    point: tuple[complex, ...]
    dbar: tuple[complex, ...]

    @property
    def magnitude(self) -> float:
        return max(abs(x) for x in self.dbar)

    def to_json(self) -> dict:
        return {"point": [[p.real, p.imag] for p in self.point],
                "dbar": [[d.real, d.imag] for d in self.dbar],
                "abs_dbar": [abs(d) for d in self.dbar]}


@dataclass(frozen=True)
class VerificationReport:
    label: str
    leafwise_residual_max: float
    leafwise_samples: int
    witnesses: list[Witness]
    verdict: Verdict
    thresholds: dict
    spec: dict | None = None
    skipped_samples: int = 0
    smoothness_probe: dict | None = None
    extras: dict = dc_field(default_factory=dict)

    @property
    def dbar_witness(self) -> Witness:
        return max(self.witnesses, key=lambda w: w.magnitude)

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "spec": self.spec,
            "leafwise_residual_max": self.leafwise_residual_max,
            "leafwise_samples": self.leafwise_samples,
            "skipped_samples": self.skipped_samples,
            "witnesses": [w.to_json() for w in self.witnesses],
            "dbar_witness": self.dbar_witness.to_json(),
            "thresholds": self.thresholds,
            "verdict": self.verdict.value,
        }
        if self.smoothness_probe is not None:
            out["smoothness_probe"] = self.smoothness_probe
        out.update(self.extras)
        return out


def default_zeta_samples(count: int = 36, radius: float = 0.5) -> list[complex]:
    side = max(2, int(math.ceil(math.sqrt(count))))
    xs = np.linspace(-radius, radius, side)
    return [complex(x, y) for y in xs for x in xs]


def verify_function(
    f: SampledFunction,
    field: NormalFormField,
    witness_points: Sequence[Sequence[complex]],
    etas: Sequence[Sequence[complex]] = DEFAULT_ETAS,
    zeta_samples: Sequence[complex] | None = None,
    h: float = DEFAULT_H,
    leafwise_tol: float = LEAFWISE_TOL,
    witness_floor: float = WITNESS_FLOOR,
    spec: dict | None = None,
    branch: BranchCounter | None = None,
) -> VerificationReport:
    zs = default_zeta_samples() if zeta_samples is None else list(zeta_samples)
    worst = 0.0
    used = skipped = 0
    for eta in etas:
        for z in zs:
            try:
                r = leafwise_holomorphy_check(f, field, eta, [z], h)
            except SingularEvaluationError:
                skipped += 1
                continue
            worst = max(worst, r)
            used += 1
    witnesses = []
    for p in witness_points:
        try:
            d = wirtinger_residual(f, p, h)
        except SingularEvaluationError:
            skipped += 1
            continue
        witnesses.append(Witness(tuple(complex(x) for x in p), tuple(complex(x) for x in d)))
    if not witnesses:
        raise SingularEvaluationError("no witness point could be evaluated")
    dbar_max = max(w.magnitude for w in witnesses)
    thresholds = {"leafwise_tol": leafwise_tol, "witness_floor": witness_floor,
                  "holomorphic_tol": HOLOMORPHIC_TOL, "h": h}
    verdict = decide(worst, dbar_max, leafwise_tol, witness_floor)
    extras = {} if branch is None else {"branch_cut_evaluations": branch.skipped}
    return VerificationReport(f.label, worst, used, witnesses, verdict, thresholds, spec, skipped,
                              extras=extras)


def smoothness_probe(spec: CounterexampleSpec, radii: Sequence[float] = (0.1, 0.05, 0.025, 0.0125)) -> dict:
    """Qualitative look at the finite-smooth family near ``z_1 = 0`` with ``z_2 = 1``.

    On ``z_1 = r e^(i theta)`` the function is ``r^(k+1) e^(i (k+3) theta)``.  Order-(k+1)
    derivatives in ``x_1`` are homogeneous of degree 0 (bounded, with a direction-dependent
    limit at 0); order k+2 grows like ``1/r``.  Reported, not asserted.
    """
    if spec.kind is not Kind.FINITE_SMOOTH:
        return {}
    f = build_counterexample(spec)
    k = spec.k
    diag = cmath.exp(0.25j * math.pi)

    def nth(order, base, r):
        step = r / 8
        total = 0j
        for i in range(order + 1):
            c = math.comb(order, i) * (-1) ** (order - i)
            total += c * f([base + (i - order / 2) * step, 1.0])
        return total / step ** order

    rows = []
    for r in radii:
        rows.append({
            "r": r,
            "order_k1_diagonal": abs(nth(k + 1, r * diag, r)),
            "order_k2_diagonal": abs(nth(k + 2, r * diag, r)),
        })
    first = rows[0]["order_k2_diagonal"]
    growth = rows[-1]["order_k2_diagonal"] / first if first else float("inf")
    return {"rows": rows, "order_k2_growth": growth, "radius_ratio": radii[0] / radii[-1]}


def verify_case(spec: CounterexampleSpec, h: float = DEFAULT_H, zeta_samples: Sequence[complex] | None = None) -> VerificationReport:
    branch = BranchCounter()
    f = build_counterexample(spec, branch)
    report = verify_function(f, spec.field(), spec.witness_points(), etas=spec.flow_etas(),
                             zeta_samples=zeta_samples,
                             h=h, spec=spec.to_json(), branch=branch)
    if spec.kind is Kind.FINITE_SMOOTH:
        report = VerificationReport(**{**report.__dict__, "smoothness_probe": smoothness_probe(spec)})
    return report


def parse_case(name: str, **params) -> CounterexampleSpec:
    return CounterexampleSpec(Kind(name), **{k: v for k, v in params.items() if v is not None})
