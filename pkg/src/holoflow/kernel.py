"""The conjugate operator and the kernel of ``Xbar S = 0`` on truncated mixed series.

``Xbar = sum_nu (conj(lambda_nu) zbar_nu + conj(g_nu)(zbar)) d/dzbar_nu``; both
the eigenvalues and the coefficients of ``g_nu`` are conjugated.

The solver works on blocks of unknowns ``C[alpha, J]`` sharing ``alpha`` and the
weight ``w = sum_nu lambda_nu J_nu``; ``Xbar`` preserves both.  Inside a block the
coefficient of ``z^alpha zbar^J`` in ``Xbar S`` is

    (sum_nu conj(lambda_nu) J_nu) C[alpha, J] + (terms in C[alpha, J'] with J' lex-smaller)

so unknowns are determined by forward substitution in lex order.  A vanishing
diagonal makes ``C[alpha, J]`` a free parameter and turns its row into a
consistency constraint on earlier parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .algebra import (
    ONE,
    ZERO,
    GaussianRational,
    MixedPolynomial,
    MultiIndex,
    Ordering,
    Part,
    TruncatedSeries,
    lex_compare,
    multi_indices,
    multi_indices_upto,
)
from .errors import DimensionError, InvalidNormalFormError, PreconditionError
from .fields import NormalFormField, compute_A, hard_violations
from .linalg import in_span, nullspace, same_span


def conjugate_coefficients(field: NormalFormField) -> list[MixedPolynomial]:
    """``conj(lambda_nu z_nu + g_nu)``, the coefficient of d/dzbar_nu in Xbar."""
    return [field.component(nu).conj() for nu in range(field.n)]


def apply_conjugate(field: NormalFormField, S: TruncatedSeries) -> TruncatedSeries:
    """``Xbar S`` with terms above ``S.degree_cap`` discarded (and flagged)."""
    if S.n != field.n:
        raise DimensionError(f"series has dimension {S.n}, field has {field.n}")
    out = MixedPolynomial.zero(field.n)
    for nu, coeff in enumerate(conjugate_coefficients(field)):
        d = S.poly.wirtinger_d(Part.ANTI, nu)
        if d:
            out = out + coeff * d
    return TruncatedSeries.from_poly(out, S.degree_cap)


@dataclass(frozen=True)
class KernelBasis:
    degree_cap: int
    basis: tuple[TruncatedSeries, ...]
    holomorphic_only: bool

    def __len__(self):
        return len(self.basis)

    @property
    def polynomials(self) -> list[MixedPolynomial]:
        return [s.poly for s in self.basis]

    def contains(self, p: MixedPolynomial) -> bool:
        """Exact membership of ``p`` in the span of the basis."""
        return in_span(p, self.polynomials)

    def to_json(self) -> dict:
        return {
            "degree_cap": self.degree_cap,
            "basis_size": len(self.basis),
            "holomorphic_only": self.holomorphic_only,
            "basis": [s.poly.to_json() for s in self.basis],
        }


def _weight(lam: Sequence[GaussianRational], J: MultiIndex) -> GaussianRational:
    return sum((lam[k] * e for k, e in enumerate(J) if e), ZERO)


def _column(field: NormalFormField, J: MultiIndex, budget: int) -> dict:
    """``Xbar zbar^J`` as ``{J': coefficient}``, keeping ``|J'| <= budget``."""
    out: dict = {}
    for nu, e in enumerate(J):
        if not e:
            continue
        lowered = list(J)
        lowered[nu] -= 1
        lowered = tuple(lowered)
        diag = field.lam[nu].conjugate() * e
        out[J] = out.get(J, ZERO) + diag
        for (m, _), c in field.g[nu].items():
            target = tuple(a + b for a, b in zip(lowered, m))
            if sum(target) > budget:
                continue
            out[target] = out.get(target, ZERO) + c.conjugate() * e
    return {k: v for k, v in out.items() if v}


def _block_kernel(field: NormalFormField, block: list[MultiIndex], budget: int) -> list[dict]:
    """Forward substitution over one weight block (``block`` sorted lex)."""
    rows: dict = {J: {} for J in block}
    for Jp in block:
        for J, a in _column(field, Jp, budget).items():
            if lex_compare(Jp, J) is Ordering.GREATER:
                raise AssertionError(f"operator is not lex-triangular at {Jp} -> {J}")
            rows[J][Jp] = a
    expr: dict = {}  # J -> {param: coeff}
    params: list = []  # param id -> J where it was introduced

    def substitute_param(pid, replacement: dict):
        for J, e in expr.items():
            c = e.pop(pid, None)
            if c is None:
                continue
            for q, v in replacement.items():
                s = e.get(q, ZERO) + c * v
                if s:
                    e[q] = s
                else:
                    e.pop(q, None)

    for J in block:
        row = rows[J]
        diag = row.get(J, ZERO)
        rest: dict = {}
        for Jp, a in row.items():
            if Jp == J:
                continue
            for q, v in expr[Jp].items():
                s = rest.get(q, ZERO) + a * v
                if s:
                    rest[q] = s
                else:
                    rest.pop(q, None)
        if diag:
            f = -diag.inverse()
            expr[J] = {q: v * f for q, v in rest.items()}
            continue
        pid = len(params)
        params.append(J)
        expr[J] = {pid: ONE}
        if rest:
            # constraint sum rest[q] * q = 0: eliminate the newest parameter in it
            piv = max(rest)
            inv = -rest[piv].inverse()
            replacement = {q: v * inv for q, v in rest.items() if q != piv}
            substitute_param(piv, replacement)
    alive = sorted({q for e in expr.values() for q in e})
    basis = []
    for q in alive:
        vec = {J: e[q] for J, e in expr.items() if q in e}
        basis.append(vec)
    return basis


def _jspace_kernel(field: NormalFormField, budget: int) -> list[dict]:
    """Kernel of Xbar restricted to ``span{zbar^J : |J| <= budget}``."""
    blocks: dict = {}
    for J in multi_indices_upto(field.n, budget):
        blocks.setdefault(_weight(field.lam, J), []).append(J)
    out = []
    for key in sorted(blocks, key=lambda w: min(blocks[w])):
        block = sorted(blocks[key])
        out.extend(_block_kernel(field, block, budget))
    return out


def solve_kernel(field: NormalFormField, degree_cap: int) -> KernelBasis:
    """Full kernel of ``apply_conjugate`` on series of total degree ``<= degree_cap``."""
    bad = hard_violations(field)
    if bad:
        raise InvalidNormalFormError(bad)
    if degree_cap < 0:
        raise ValueError("degree_cap must be nonnegative")
    n = field.n

    @lru_cache(maxsize=None)
    def jkernel(budget):
        return _jspace_kernel(field, budget)

    basis = []
    holo_only = True
    for alpha in multi_indices_upto(n, degree_cap):
        for vec in jkernel(degree_cap - sum(alpha)):
            terms = {(alpha, J): c for J, c in vec.items()}
            if any(any(J) for J in vec):
                holo_only = False
            basis.append(TruncatedSeries(MixedPolynomial(n, terms), degree_cap))
    return KernelBasis(degree_cap, tuple(basis), holo_only)


def kernel_holomorphic_when_A_empty(field: NormalFormField, degree_cap: int, A_cap: int | None = None) -> bool:
    """With ``A(lambda)`` certified empty, check that the truncated kernel is holomorphic."""
    status = compute_A(field.lam, A_cap or max(degree_cap, 1))
    if not status.certified_empty:
        raise PreconditionError(f"A(lambda) is not certified empty: {status.kind}")
    return solve_kernel(field, degree_cap).holomorphic_only


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

def dense_kernel(field: NormalFormField, degree_cap: int) -> list[MixedPolynomial]:
    """Kernel by exact elimination over every coefficient ``C[alpha, beta]`` at once.

    Builds the full matrix of ``apply_conjugate`` on the monomial basis and
    computes its nullspace; no block or ordering structure is used.
    """
    n = field.n
    monos = [
        (h, a)
        for d in range(degree_cap + 1)
        for k in range(d + 1)
        for h in multi_indices(n, k)
        for a in multi_indices(n, d - k)
    ]
    images = []
    for h, a in monos:
        S = TruncatedSeries(MixedPolynomial(n, {(h, a): 1}), degree_cap)
        images.append(dict(apply_conjugate(field, S).poly.items()))
    vecs = nullspace(images)
    return [MixedPolynomial(n, {monos[i]: c for i, c in v.items()}) for v in vecs]


def kernel_matches_oracle(field: NormalFormField, degree_cap: int, kb: KernelBasis | None = None) -> tuple[bool, int, int]:
    """Compare the triangular solver against the dense oracle: (same span, dims)."""
    kb = kb or solve_kernel(field, degree_cap)
    oracle = dense_kernel(field, degree_cap)
    ok = len(kb) == len(oracle) and same_span(kb.polynomials, oracle)
    return ok, len(kb), len(oracle)


def check_kernel_elements(field: NormalFormField, kb: KernelBasis) -> bool:
    return all(not apply_conjugate(field, s).poly for s in kb.basis)
