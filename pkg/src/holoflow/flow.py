"""Exact complex flows of normal-form fields, with an RK4 integrator as an independent check.

For a field in normal form the flow through ``eta`` is

    z_j(eta; zeta) = exp(s * lambda_j * zeta) * (eta_j + q_j(eta, zeta)),   s = +1 or -1

where ``q_j`` is a polynomial in ``eta_1..eta_{j-1}`` and ``zeta``.  Each resonant
monomial ``c z^m`` of ``g_j`` contributes ``exp(s lambda_j zeta) * c * prod (eta_k + q_k)^m_k``
to ``dz_j/dzeta``, so ``q_j`` is the zeta-primitive of that product (variation of
constants), computed exactly.

Polynomials in the flow live in ``n + 1`` variables: ``eta_1..eta_n`` then ``zeta``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (
    ExponentialPolynomial,
    MixedPolynomial,
    Part,
    Q,
    substitute,
)
from .errors import InvalidNormalFormError, StepTooLargeError, TrajectoryEscapeError
from .fields import NormalFormField, hard_violations

MAX_STEP = 0.1
DEFAULT_STEP = 0.01
ESCAPE_RADIUS = 1e100


class Direction(enum.Enum):
    FORWARD = 1
    BACKWARD = -1

    @classmethod
    def parse(cls, text: str) -> "Direction":
        return cls[text.strip().upper()]


def _integrate_zeta(p: MixedPolynomial, zeta: int) -> MixedPolynomial:
    """Primitive in ``zeta`` vanishing at ``zeta = 0``."""
    terms = {}
    for (h, a), c in p.items():
        e = h[zeta]
        nh = list(h)
        nh[zeta] = e + 1
        terms[(tuple(nh), a)] = c * Fraction(1, e + 1)
    return MixedPolynomial(p.n, terms)


def reflect_zeta(p: MixedPolynomial, zeta: int) -> MixedPolynomial:
    """``p(eta, -zeta)``."""
    return MixedPolynomial(p.n, {(h, a): (-c if h[zeta] % 2 else c) for (h, a), c in p.items()})


@dataclass(frozen=True)
class FlowCurve:
    """Symbolic flow ``z_j = exp(exponent_sign * lambda_j * zeta) (eta_j + q_j)``.

    ``direction`` names the ODE being solved (``dz/dzeta = +-X(z)``);
    ``exponent_sign`` defaults to match it and is only set apart to build
    deliberately inconsistent curves for negative controls.
    """

    field: NormalFormField
    direction: Direction
    q: tuple[MixedPolynomial, ...]
    exponent_sign: int | None = None

    def __post_init__(self):
        n = self.field.n
        if self.exponent_sign is None:
            object.__setattr__(self, "exponent_sign", self.direction.value)
        if self.exponent_sign not in (1, -1):
            raise ValueError("exponent_sign must be +1 or -1")
        if len(self.q) != n:
            raise ValueError(f"expected {n} polynomials q_j")
        for j, qj in enumerate(self.q):
            if qj.n != n + 1 or not qj.is_holomorphic():
                raise ValueError(f"q[{j}] must be a holomorphic polynomial in (eta, zeta)")
            if j == 0 and qj:
                raise ValueError("q_1 must vanish")
            for (h, _), _c in qj.items():
                if h[n] == 0:
                    raise ValueError(f"q[{j}] does not vanish at zeta = 0")
                if any(h[k] for k in range(j, n)):
                    raise ValueError(f"q[{j}] depends on eta_{j + 1} or later")

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def zeta_index(self) -> int:
        return self.field.n

    def coordinates(self) -> list[ExponentialPolynomial]:
        n = self.n
        out = []
        for j in range(n):
            base = MixedPolynomial.variable(n + 1, j) + self.q[j]
            w = self.field.lam[j] * self.exponent_sign
            out.append(ExponentialPolynomial.single(base, n, weight=w))
        return out

    def evaluate(self, eta: Sequence[complex], zeta: complex) -> np.ndarray:
        n = self.n
        point = [complex(x) for x in eta] + [complex(zeta)]
        out = np.empty(n, dtype=complex)
        for j in range(n):
            w = complex(self.field.lam[j]) * self.exponent_sign
            out[j] = cmath.exp(w * zeta) * (point[j] + self._compiled[j](point))
        return out

    @property
    def _compiled(self):
        cache = self.__dict__.get("_compiled_cache")
        if cache is None:
            cache = [qj.to_callable() for qj in self.q]
            object.__setattr__(self, "_compiled_cache", cache)
        return cache

    def eta_derivative(self, j: int, k: int) -> MixedPolynomial:
        """``d(eta_j + q_j)/d eta_k`` as a polynomial in ``(eta, zeta)``."""
        base = MixedPolynomial.variable(self.n + 1, j) + self.q[j]
        return base.wirtinger_d(Part.HOLO, k)

    def closed_form(self) -> list[str]:
        n = self.n
        names = [f"eta{j + 1}" for j in range(n)] + ["zeta"]
        lines = []
        for j in range(n):
            base = (MixedPolynomial.variable(n + 1, j) + self.q[j]).format(names)
            w = self.field.lam[j] * self.exponent_sign
            lines.append(f"z{j + 1}(eta; zeta) = exp({w}*zeta) * ({base})")
        return lines

    def to_json(self) -> dict:
        return {
            "direction": self.direction.name.lower(),
            "exponent_sign": self.exponent_sign,
            "variables": [f"eta{j + 1}" for j in range(self.n)] + ["zeta"],
            "coordinates": [c.to_json() for c in self.coordinates()],
        }


def symbolic_flow(field: NormalFormField, direction: Direction = Direction.FORWARD) -> FlowCurve:
    bad = hard_violations(field)
    if bad:
        raise InvalidNormalFormError(bad)
    n = field.n
    s = direction.value
    zeta = n
    eta_plus_q: list[MixedPolynomial] = []
    q: list[MixedPolynomial] = []
    for j in range(n):
        integrand = MixedPolynomial.zero(n + 1)
        for (m, _), c in field.g[j].items():
            term = MixedPolynomial.constant(n + 1, c * s)
            for k, e in enumerate(m):
                if e:
                    term = term * eta_plus_q[k] ** e
            integrand = integrand + term
        qj = _integrate_zeta(integrand, zeta)
        q.append(qj)
        eta_plus_q.append(MixedPolynomial.variable(n + 1, j) + qj)
    return FlowCurve(field, direction, tuple(q))


def flow_residual(curve: FlowCurve) -> list[ExponentialPolynomial]:
    """``dz_j/dzeta - s * X_j(z)`` per coordinate, as exact exponential polynomials."""
    coords = curve.coordinates()
    field = curve.field
    s = curve.direction.value
    out = []
    for j in range(curve.n):
        rhs = coords[j].scale(field.lam[j])
        if field.g[j]:
            rhs = rhs + substitute(field.g[j], coords)
        out.append(coords[j].d_zeta() - rhs.scale(s))
    return out


def residual_is_zero(curve: FlowCurve) -> bool:
    return all(not r for r in flow_residual(curve))


def transport(F: MixedPolynomial, curve: FlowCurve) -> ExponentialPolynomial:
    """``F(z(eta; zeta))`` expanded over ``exp(w zeta + w' conj(zeta))`` times (eta, zeta) monomials."""
    coords = curve.coordinates()
    return substitute(F, coords, [c.conj() for c in coords])


def leafwise_holomorphic_symbolic(F: MixedPolynomial, curve: FlowCurve) -> bool:
    """True iff the transported expression has no conj(zeta)-dependent term."""
    return not transport(F, curve).depends_on_conj_zeta()


# ---------------------------------------------------------------------------
# numerical oracle
# ---------------------------------------------------------------------------

def straight_path(zeta_end: complex, step: float = DEFAULT_STEP) -> list[complex]:
    """Equal steps of modulus ``<= step`` along the segment from 0 to ``zeta_end``."""
    zeta_end = complex(zeta_end)
    if zeta_end == 0:
        return []
    count = max(1, math.ceil(abs(zeta_end) / step - 1e-12))
    return [zeta_end / count] * count


def _vector_field(field: NormalFormField, direction: Direction):
    lam = np.array([complex(x) for x in field.lam])
    g = [gj.to_callable() if gj else None for gj in field.g]
    s = direction.value

    def rhs(z):
        out = lam * z
        for j, gj in enumerate(g):
            if gj is not None:
                out[j] += gj(z)
        return s * out

    return rhs


def numeric_flow(
    field: NormalFormField,
    eta: Sequence[complex],
    zeta_path: Sequence[complex],
    direction: Direction = Direction.FORWARD,
) -> np.ndarray:
    """Classical RK4 along a piecewise-linear path given as a list of complex steps."""
    for dz in zeta_path:
        if abs(dz) > MAX_STEP:
            raise StepTooLargeError(f"step {dz} exceeds {MAX_STEP}")
    rhs = _vector_field(field, direction)
    z = np.array([complex(x) for x in eta], dtype=complex)
    for h in zeta_path:
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * h * k1)
        k3 = rhs(z + 0.5 * h * k2)
        k4 = rhs(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > ESCAPE_RADIUS:
            raise TrajectoryEscapeError("trajectory left the representable range")
    return z


def numeric_flow_to(field, eta, zeta_end, direction=Direction.FORWARD, step=DEFAULT_STEP) -> np.ndarray:
    return numeric_flow(field, eta, straight_path(zeta_end, step), direction)
