"""Holomorphic vector fields in Poincare-Dulac normal form and their classification.

A field is ``X = sum_j (lambda_j z_j + g_j(z)) d/dz_j`` with exact eigenvalues
``lambda_j`` and pure-holomorphic polynomials ``g_j``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .algebra import (
    ZERO,
    GaussianRational,
    MixedPolynomial,
    MultiIndex,
    Part,
    Q,
    multi_indices,
    parse_rational,
)
from .errors import DegenerateFieldError, DimensionError, EnumerationUnboundedError

# violation kinds; the first two describe coordinate arrangement and do not block
# the kernel solver or the flow engine
SOFT_KINDS = frozenset({"eigenvalue-order", "not-contracting"})


@dataclass(frozen=True)
class NormalFormField:
    n: int
    lam: tuple[GaussianRational, ...]
    g: tuple[MixedPolynomial, ...]

    def __post_init__(self):
        lam = tuple(Q.coerce(x) for x in self.lam)
        g = tuple(self.g)
        if len(lam) != self.n or len(g) != self.n:
            raise DimensionError(f"expected {self.n} eigenvalues and {self.n} polynomials")
        for j, gj in enumerate(g):
            if gj.n != self.n:
                raise DimensionError(f"g[{j}] has dimension {gj.n}, expected {self.n}")
            if not gj.is_holomorphic():
                raise ValueError(f"g[{j}] contains conjugate variables")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "g", g)

    @classmethod
    def make(cls, lam: Sequence, g: Sequence[MixedPolynomial] | None = None) -> "NormalFormField":
        n = len(lam)
        if g is None:
            g = [MixedPolynomial.zero(n)] * n
        return cls(n, tuple(lam), tuple(g))

    def component(self, j: int) -> MixedPolynomial:
        """``lambda_j z_j + g_j`` as a polynomial."""
        return MixedPolynomial.variable(self.n, j).scale(self.lam[j]) + self.g[j]

    def evaluate(self, z: Sequence[complex]) -> list[complex]:
        return [complex(self.lam[j]) * z[j] + self.g[j].evaluate(z) for j in range(self.n)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lambda": [x.to_json() for x in self.lam],
            "g": [
                [{"holo": list(h), "re": c.to_json()[0], "im": c.to_json()[1]} for (h, _), c in gj.items()]
                for gj in self.g
            ],
        }

    @classmethod
    def from_json(cls, data) -> "NormalFormField":
        n = int(data["n"])
        lam = [Q.coerce(x) for x in data["lambda"]]
        g = [MixedPolynomial(n, MixedPolynomial._terms_from_json(n, terms)) for terms in data["g"]]
        return cls(n, tuple(lam), tuple(g))

    @classmethod
    def load(cls, path) -> "NormalFormField":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def describe(self) -> str:
        names = [f"z{j + 1}" for j in range(self.n)]
        parts = []
        for j in range(self.n):
            comp = self.component(j).format(names)
            parts.append(f"({comp}) d/d{names[j]}")
        return " + ".join(parts)


@dataclass(frozen=True)
class ResonanceRelation:
    target: int
    m: MultiIndex

    def weight(self, lam: Sequence[GaussianRational]) -> GaussianRational:
        return sum((lam[k] * e for k, e in enumerate(self.m)), ZERO)


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    detail: str
    monomial: MultiIndex | None = None

    @property
    def soft(self) -> bool:
        return self.kind in SOFT_KINDS

    def __str__(self):
        where = f" monomial {self.monomial}" if self.monomial is not None else ""
        return f"[{self.kind}] j={self.index}{where}: {self.detail}"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "detail": self.detail,
            "monomial": list(self.monomial) if self.monomial is not None else None,
        }


@dataclass(frozen=True)
class AStatus:
    """Outcome of the search for ``m != 0`` in N^n with ``sum m_j lambda_j = 0``.

    ``kind`` is ``"empty"`` (certified), ``"empty-up-to-cap"`` or ``"nonempty"``.
    """

    kind: str
    cap: int | None = None
    witness: MultiIndex | None = None

    @property
    def certified_empty(self) -> bool:
        return self.kind == "empty"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.cap is not None:
            out["cap"] = self.cap
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


@dataclass(frozen=True)
class Classification:
    is_valid_normal_form: bool
    violations: tuple[Violation, ...]
    is_contracting: bool
    is_aligned: bool | None
    resonances: tuple[ResonanceRelation, ...]
    A_status: AStatus
    notes: tuple[str, ...] = dc_field(default=())

    def to_json(self) -> dict:
        return {
            "valid_normal_form": self.is_valid_normal_form,
            "violations": [v.to_json() for v in self.violations],
            "contracting": self.is_contracting,
            "aligned": self.is_aligned,
            "resonances": [{"target": r.target, "m": list(r.m)} for r in self.resonances],
            "A": self.A_status.to_json(),
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_normal_form(field: NormalFormField) -> list[Violation]:
    """Every violated normal-form condition, as data.

    Quasi-homogeneity of ``g_j`` is checked monomial by monomial through the
    exact identity ``sum_k m_k lambda_k == lambda_j``.
    """
    out: list[Violation] = []
    lam = field.lam
    for j, x in enumerate(lam):
        if x.re <= 0:
            out.append(Violation("not-contracting", j, f"Re lambda_{j + 1} = {x.re} is not positive"))
    for j in range(field.n - 1):
        if lam[j].re > lam[j + 1].re:
            out.append(Violation(
                "eigenvalue-order", j + 1,
                f"Re lambda_{j + 1} = {lam[j].re} > Re lambda_{j + 2} = {lam[j + 1].re}",
            ))
    for j, gj in enumerate(field.g):
        if j == 0 and gj:
            out.append(Violation("g1-nonzero", 0, "g_1 must vanish identically"))
        for (h, _), c in gj.items():
            if not any(h):
                out.append(Violation("constant-term", j, f"constant term {c}", h))
                continue
            late = [k for k in range(j, field.n) if h[k]]
            if late:
                allowed = f"only z_1..z_{j} are allowed" if j else "no variable is allowed"
                out.append(Violation(
                    "variable-dependence", j, f"depends on z_{late[0] + 1}; {allowed}", h,
                ))
                continue
            w = sum((lam[k] * e for k, e in enumerate(h)), ZERO)
            if w != lam[j]:
                out.append(Violation(
                    "non-resonant-monomial", j, f"monomial weight {w} != lambda_{j + 1} = {lam[j]}", h,
                ))
    return out


def hard_violations(field: NormalFormField) -> list[Violation]:
    return [v for v in validate_normal_form(field) if not v.soft]


def is_contracting(lam: Sequence) -> bool:
    return all(Q.coerce(x).re > 0 for x in lam)


def is_aligned(lam: Sequence) -> bool:
    """All ratios ``lambda_j / lambda_1`` are positive reals (exact test)."""
    lam = [Q.coerce(x) for x in lam]
    if any(not x for x in lam):
        raise DegenerateFieldError("zero eigenvalue: alignment undefined")
    first = lam[0]
    for x in lam[1:]:
        r = x / first
        if r.im or r.re <= 0:
            return False
    return True


def _bounded_vectors(bounds: Sequence[int]):
    if not bounds:
        yield ()
        return
    for head in range(bounds[0] + 1):
        for tail in _bounded_vectors(bounds[1:]):
            yield (head,) + tail


def resonance_relations(lam: Sequence, j: int, cap: int | None = None) -> list[ResonanceRelation]:
    """All ``m`` on indices ``< j`` with ``|m| >= 1`` and ``sum m_k lambda_k == lambda_j``.

    Without ``cap`` the search needs ``Re lambda_k > 0`` for ``k < j`` so that
    ``m_k <= Re lambda_j / Re lambda_k``.  With ``cap`` only ``|m| <= cap`` is searched.
    """
    lam = [Q.coerce(x) for x in lam]
    n = len(lam)
    if not 0 <= j < n:
        raise IndexError(f"target index {j} out of range")
    target = lam[j]
    earlier = lam[:j]
    found = []
    if cap is None:
        if any(x.re <= 0 for x in earlier):
            raise EnumerationUnboundedError(
                "an earlier eigenvalue has nonpositive real part; pass a degree cap"
            )
        if target.re <= 0:
            return []
        bounds = [int(target.re // x.re) for x in earlier]
        candidates = _bounded_vectors(bounds)
    else:
        candidates = (m for d in range(1, cap + 1) for m in multi_indices(j, d))
    for m in candidates:
        if not any(m):
            continue
        w = sum((earlier[k] * e for k, e in enumerate(m) if e), ZERO)
        if w == target:
            found.append(m + (0,) * (n - j))
    found.sort()
    return [ResonanceRelation(j, m) for m in found]


def _cross(a: GaussianRational, b: GaussianRational) -> Fraction:
    return a.re * b.im - a.im * b.re


def _dot(a: GaussianRational, b: GaussianRational) -> Fraction:
    return a.re * b.re + a.im * b.im


def _primitive(coeffs: Sequence[Fraction]) -> tuple[int, ...]:
    from math import gcd, lcm

    den = 1
    for c in coeffs:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints)


def zero_in_hull_witness(lam: Sequence) -> MultiIndex | None:
    """Exact decision of ``A(lambda)``: a witness iff 0 lies in the convex hull of the ``lambda_j``.

    By Caratheodory it suffices to look at single points, opposite pairs and
    triangles; barycentric coordinates are rational, giving an integer witness.
    """
    lam = [Q.coerce(x) for x in lam]
    n = len(lam)
    best: MultiIndex | None = None

    def consider(coeffs: dict):
        nonlocal best
        prim = _primitive([coeffs.get(k, Fraction(0)) for k in range(n)])
        if best is None or (sum(prim), prim) < (sum(best), best):
            best = prim

    for k, x in enumerate(lam):
        if not x:
            consider({k: Fraction(1)})
    for a, b in combinations(range(n), 2):
        if lam[a] and lam[b] and _cross(lam[a], lam[b]) == 0 and _dot(lam[a], lam[b]) < 0:
            # lam[a] = -c lam[b] with c > 0
            c = -(lam[a] / lam[b]).re
            consider({a: Fraction(1), b: c})
    for a, b, c in combinations(range(n), 3):
        xa, xb, xc = _cross(lam[b], lam[c]), _cross(lam[c], lam[a]), _cross(lam[a], lam[b])
        if xa == 0 or xb == 0 or xc == 0:
            continue
        if (xa > 0) == (xb > 0) == (xc > 0):
            consider({a: abs(xa), b: abs(xb), c: abs(xc)})
    return best


def compute_A(lam: Sequence, cap: int) -> AStatus:
    """Status of ``A(lambda)`` following the definition literally.

    Empty is certified when the eigenvalues lie in an open half-plane through
    the origin (covers all-``Re > 0`` and all-``Re < 0``); otherwise the
    smallest witness with ``|m| <= cap`` is returned, or ``empty-up-to-cap``.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    lam = [Q.coerce(x) for x in lam]
    if zero_in_hull_witness(lam) is None:
        return AStatus("empty")
    n = len(lam)
    for d in range(1, cap + 1):
        for m in multi_indices(n, d):
            if sum((lam[k] * e for k, e in enumerate(m) if e), ZERO) == 0:
                return AStatus("nonempty", witness=m)
    return AStatus("empty-up-to-cap", cap=cap)


def classify(field: NormalFormField, cap: int = 8) -> Classification:
    violations = tuple(validate_normal_form(field))
    notes = []
    try:
        aligned: bool | None = is_aligned(field.lam)
    except DegenerateFieldError:
        aligned = None
        notes.append("zero eigenvalue: alignment undefined")
    resonances: list[ResonanceRelation] = []
    for j in range(1, field.n):
        try:
            resonances.extend(resonance_relations(field.lam, j))
        except EnumerationUnboundedError:
            resonances.extend(resonance_relations(field.lam, j, cap=cap))
            notes.append(f"resonances for lambda_{j + 1} searched only up to |m| <= {cap}")
    return Classification(
        is_valid_normal_form=not violations,
        violations=violations,
        is_contracting=is_contracting(field.lam),
        is_aligned=aligned,
        resonances=tuple(resonances),
        A_status=compute_A(field.lam, cap),
        notes=tuple(notes),
    )


def reorder_by_real_part(field: NormalFormField) -> tuple[NormalFormField, list[int]]:
    """Permute coordinates so that ``Re lambda`` is nondecreasing (stable).

    Returns the permuted field and ``perm`` with ``new[i] = old[perm[i]]``.
    The result is not re-validated.
    """
    perm = sorted(range(field.n), key=lambda j: field.lam[j].re)
    inv = {old: new for new, old in enumerate(perm)}
    n = field.n

    def move(p: MixedPolynomial) -> MixedPolynomial:
        terms = {}
        for (h, a), c in p.items():
            nh = [0] * n
            na = [0] * n
            for old, e in enumerate(h):
                nh[inv[old]] = e
            for old, e in enumerate(a):
                na[inv[old]] = e
            terms[(tuple(nh), tuple(na))] = c
        return MixedPolynomial(n, terms)

    return NormalFormField(n, tuple(field.lam[p] for p in perm), tuple(move(field.g[p]) for p in perm)), perm


# ---------------------------------------------------------------------------
# stock fields
# ---------------------------------------------------------------------------

def euler_field(n: int) -> NormalFormField:
    return NormalFormField.make([1] * n)


def plane_jordan_field(alpha=1, m: int = 2, beta=1) -> NormalFormField:
    """``alpha (z d/dz + (m w + beta z^m) d/dw)``: the non-diagonalizable planar contracting field."""
    alpha, beta = Q.coerce(alpha), Q.coerce(beta)
    if m < 1:
        raise ValueError("m must be a positive integer")
    g2 = MixedPolynomial.monomial(2, (m, 0), coeff=alpha * beta)
    return NormalFormField.make([alpha, alpha * m], [MixedPolynomial.zero(2), g2])


def saddle_field(q: int, p: int) -> NormalFormField:
    """``z1 d/dz1 - (q/p) z2 d/dz2``."""
    return NormalFormField.make([1, Q(-Fraction(q, p))])


def parse_eigenvalue(text: str) -> GaussianRational:
    """Parse ``"a/b"`` or ``"a/b,c/d"`` (real, imaginary)."""
    parts = [s for s in text.split(",") if s.strip()]
    if len(parts) == 1:
        return Q(parse_rational(parts[0]))
    return Q(parse_rational(parts[0]), parse_rational(parts[1]))


_SMALL_FRACTIONS = sorted({Fraction(a, b) for a in range(1, 6) for b in range(1, 6)})


def random_aligned_field(
    rng: random.Random,
    n_max: int = 3,
    coeff_bound: int = 2,
    max_monomial_degree: int = 4,
    resonance_bias: float = 0.7,
) -> NormalFormField:
    """A random valid aligned normal form with positive rational eigenvalues.

    Eigenvalues are fractions with numerator and denominator in 1..5, sorted
    increasingly; later eigenvalues are biased toward resonant choices so that
    ``g`` is frequently nonzero.  Coefficients are Gaussian integers of modulus
    at most ``coeff_bound``.
    """
    n = rng.randint(1, n_max)
    lam: list[Fraction] = [rng.choice(_SMALL_FRACTIONS)]
    for j in range(1, n):
        pool = [f for f in _SMALL_FRACTIONS if f >= lam[-1]]
        resonant = [f for f in pool if resonance_relations(lam + [f], j)]
        resonant = [
            f for f in resonant
            if any(sum(r.m) <= max_monomial_degree for r in resonance_relations(lam + [f], j))
        ]
        if resonant and rng.random() < resonance_bias:
            lam.append(rng.choice(resonant))
        else:
            lam.append(rng.choice(pool))
    coeffs = [Q(a, b) for a in range(-coeff_bound, coeff_bound + 1)
              for b in range(-coeff_bound, coeff_bound + 1)
              if 0 < a * a + b * b <= coeff_bound * coeff_bound]
    g = [MixedPolynomial.zero(n)]
    for j in range(1, n):
        rels = [r for r in resonance_relations(lam, j) if sum(r.m) <= max_monomial_degree]
        terms = {}
        for r in rels:
            if rng.random() < 0.75:
                terms[(r.m, (0,) * n)] = rng.choice(coeffs)
        g.append(MixedPolynomial(n, terms))
    return NormalFormField.make([Q(x) for x in lam], g)
