"""Exact sparse Gaussian elimination over Q(i).

Vectors are dicts ``{column: GaussianRational}``.  Used by the dense kernel
oracle and for span comparisons; the triangular kernel solver does not use it.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Sequence

from .algebra import GaussianRational, MixedPolynomial

Vector = dict


def rref(rows: Iterable[Vector], columns: Sequence[Hashable]) -> tuple[list[Vector], list[Hashable]]:
    """Reduced row echelon form; columns are processed in the order given.

    Returns the nonzero reduced rows (pivot entry 1) and their pivot columns.
    """
    pending = [dict(r) for r in rows if r]
    col_rank = {c: i for i, c in enumerate(columns)}
    reduced: list[Vector] = []
    pivots: list[Hashable] = []
    for r in pending:
        # eliminate existing pivots from the incoming row
        for pr, pc in zip(reduced, pivots):
            f = r.get(pc)
            if f:
                _axpy(r, pr, -f)
        if not r:
            continue
        pc = min(r, key=col_rank.__getitem__)
        inv = r[pc].inverse()
        r = {k: v * inv for k, v in r.items()}
        # keep earlier rows reduced with respect to the new pivot
        for pr in reduced:
            f = pr.get(pc)
            if f:
                _axpy(pr, r, -f)
        reduced.append(r)
        pivots.append(pc)
    order = sorted(range(len(pivots)), key=lambda i: col_rank[pivots[i]])
    return [reduced[i] for i in order], [pivots[i] for i in order]


def _axpy(target: Vector, source: Vector, factor: GaussianRational) -> None:
    for k, v in source.items():
        s = target.get(k)
        s = v * factor if s is None else s + v * factor
        if s:
            target[k] = s
        else:
            target.pop(k, None)


def nullspace(columns_images: Sequence[Vector]) -> list[Vector]:
    """Basis of ``{x : sum_i x_i * columns_images[i] = 0}`` as dicts over column indices."""
    rows: dict = {}
    for i, img in enumerate(columns_images):
        for rk, v in img.items():
            rows.setdefault(rk, {})[i] = v
    ncols = len(columns_images)
    reduced, pivots = rref(rows.values(), list(range(ncols)))
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        vec = {f: GaussianRational(1)}
        for r, pc in zip(reduced, pivots):
            v = r.get(f)
            if v:
                vec[pc] = -v
        basis.append(vec)
    return basis


def poly_vector(p: MixedPolynomial) -> Vector:
    return dict(p.items())


def rank(vectors: Iterable[Vector]) -> int:
    vs = [v for v in vectors if v]
    cols = sorted({k for v in vs for k in v})
    return len(rref(vs, cols)[0])


def same_span(a: Sequence[MixedPolynomial], b: Sequence[MixedPolynomial]) -> bool:
    """Exact test that two families of polynomials span the same space."""
    va = [poly_vector(p) for p in a]
    vb = [poly_vector(p) for p in b]
    cols = sorted({k for v in va + vb for k in v})
    ra = rref(va, cols)
    rb = rref(vb, cols)
    return ra[1] == rb[1] and ra[0] == rb[0]


def in_span(p: MixedPolynomial, family: Sequence[MixedPolynomial]) -> bool:
    vs = [poly_vector(q) for q in family]
    return rank(vs + [poly_vector(p)]) == rank(vs)
