"""Plane regions ``D(P, lambda) = {zeta : |P_j(zeta)| exp(-lambda_j Re zeta) < 1 for all j}``.

Floating-point throughout: rasterization at cell centers, 4-connected flood
fill, the distinguished unbounded component containing a right real ray, root
finding for admissible points, and sampled diagnostics for the transform
``g_l = f * exp(lambda_1 l zeta) / P_1^l`` on the boundary of ``D ∩ {Re zeta > A}``.
"""

from __future__ import annotations

import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, PoleError, RayNotFoundError


@dataclass(frozen=True)
class RegionSpec:
    """``P[j]`` holds complex coefficients in ascending powers of ``zeta``."""

    P: tuple[tuple[complex, ...], ...]
    lam: tuple[float, ...]

    def __post_init__(self):
        P = tuple(tuple(complex(c) for c in p) for p in self.P)
        lam = tuple(float(x) for x in self.lam)
        if len(P) != len(lam) or not P:
            raise ParameterError("need one positive lambda per polynomial")
        for j, p in enumerate(P):
            if not any(c != 0 for c in p):
                raise ParameterError(f"P_{j + 1} is identically zero")
        if any(not x > 0 for x in lam):
            raise ParameterError("all lambda_j must be positive")
        # trim trailing zero coefficients so degree() is honest
        P = tuple(p[: max(i for i, c in enumerate(p) if c != 0) + 1] for p in P)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return len(self.P)

    def degree(self, j: int) -> int:
        return len(self.P[j]) - 1

    def eval_poly(self, j: int, zeta):
        return np.polynomial.polynomial.polyval(zeta, np.asarray(self.P[j]))

    def profile(self, zeta) -> np.ndarray:
        """``|P_j(zeta)| exp(-lambda_j Re zeta)`` stacked along the first axis."""
        zeta = np.asarray(zeta, dtype=complex)
        rows = []
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(self.n):
                a = np.abs(self.eval_poly(j, zeta))
                # far left the exponential overflows; an exact zero of P_j still gives 0
                rows.append(np.where(a == 0, 0.0, a * np.exp(-self.lam[j] * zeta.real)))
        return np.stack(rows)

    def level(self, zeta):
        """``max_j |P_j| exp(-lambda_j Re zeta)``; membership is ``level < 1``."""
        return self.profile(zeta).max(axis=0)

    def reordered(self) -> tuple["RegionSpec", list[int]]:
        """Put the index maximizing ``deg(P_j)/lambda_j`` first (ties: lowest original index)."""
        ratios = [self.degree(j) / self.lam[j] for j in range(self.n)]
        best = max(range(self.n), key=lambda j: (ratios[j], -j))
        perm = [best] + [j for j in range(self.n) if j != best]
        return RegionSpec(tuple(self.P[j] for j in perm), tuple(self.lam[j] for j in perm)), perm

    def to_json(self) -> dict:
        return {
            "P": [[[c.real, c.imag] for c in p] for p in self.P],
            "lambda": list(self.lam),
        }

    @classmethod
    def from_json(cls, data) -> "RegionSpec":
        def coeff(c):
            if isinstance(c, (list, tuple)):
                return complex(float(c[0]), float(c[1]))
            return complex(c)

        return cls(tuple(tuple(coeff(c) for c in p) for p in data["P"]), tuple(data["lambda"]))


def membership(spec: RegionSpec, zeta) -> bool | np.ndarray:
    lv = spec.level(zeta)
    return bool(lv < 1) if np.ndim(lv) == 0 else lv < 1


# ---------------------------------------------------------------------------
# the right real ray
# ---------------------------------------------------------------------------

def _tail_start(spec: RegionSpec) -> float:
    """A ``t0`` beyond which every ``|P_j(t)| exp(-lambda_j t)`` is certified < 1 and decreasing.

    Uses the majorant ``B_j(t) = sum_k |c_k| t^k exp(-lambda_j t)``, each term of
    which decreases once ``t >= k / lambda_j``.
    """
    t = max(1.0, max(spec.degree(j) / spec.lam[j] for j in range(spec.n)))
    abs_coeffs = [np.abs(np.asarray(p)) for p in spec.P]

    def majorant_ok(x):
        return all(
            np.polynomial.polynomial.polyval(x, abs_coeffs[j]) * math.exp(-spec.lam[j] * x) < 1
            for j in range(spec.n)
        )

    while not majorant_ok(t):
        t *= 1.25
        if t > 1e6:
            raise RayNotFoundError("no ray found below Re zeta = 1e6")
    return t


def find_ray(spec: RegionSpec, step: float = 0.01, start: float = 0.0) -> float:
    """Smallest sampled ``r >= start`` with every sampled ``t > r`` on the real axis in ``D``.

    Points beyond the certified tail start need no sampling.
    """
    t0 = _tail_start(spec)
    if t0 <= start:
        return start
    xs = np.arange(start, t0 + step, step)
    inside = membership(spec, xs.astype(complex))
    outside = np.nonzero(~inside)[0]
    if len(outside) == 0:
        return start
    return float(xs[outside[-1]])


# ---------------------------------------------------------------------------
# rasterization and components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    x0: float
    x1: float
    y0: float
    y1: float
    resolution: float

    @property
    def nx(self) -> int:
        return max(1, int(round((self.x1 - self.x0) / self.resolution)))

    @property
    def ny(self) -> int:
        return max(1, int(round((self.y1 - self.y0) / self.resolution)))

    def xs(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.resolution

    def ys(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.resolution

    def centers(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs(), self.ys())
        return X + 1j * Y

    def column_of(self, x: float) -> int:
        return int(min(self.nx - 1, max(0, math.floor((x - self.x0) / self.resolution))))

    def row_nearest(self, y: float) -> int:
        return int(np.argmin(np.abs(self.ys() - y)))


THREADS_ENV = "HOLOFLOW_THREADS"


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def rasterize(spec: RegionSpec, grid: Grid, threads: int | None = None) -> np.ndarray:
    """Boolean membership at cell centers; rows index Im, columns index Re.

    Row bands are evaluated in parallel when ``threads`` (default: the
    ``HOLOFLOW_THREADS`` environment variable) exceeds 1; the result does not
    depend on the thread count.
    """
    centers = grid.centers()
    threads = _thread_count() if threads is None else max(1, threads)
    if threads == 1 or centers.shape[0] < 2 * threads:
        return membership(spec, centers)
    bands = np.array_split(np.arange(centers.shape[0]), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda rows: membership(spec, centers[rows]), bands))
    return np.concatenate(parts, axis=0)


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected flood fill; labels 1..count in raster-scan order of first cell, 0 outside."""
    ny, nx = mask.shape
    labels = np.zeros((ny, nx), dtype=np.int32)
    current = 0
    for r0 in range(ny):
        row = mask[r0]
        for c0 in np.nonzero(row & (labels[r0] == 0))[0]:
            if labels[r0, c0]:
                continue
            current += 1
            labels[r0, c0] = current
            queue = deque([(r0, c0)])
            while queue:
                r, c = queue.popleft()
                for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= rr < ny and 0 <= cc < nx and mask[rr, cc] and not labels[rr, cc]:
                        labels[rr, cc] = current
                        queue.append((rr, cc))
    return labels, current


@dataclass(frozen=True)
class ComponentMap:
    grid: Grid
    labels: np.ndarray
    count: int
    star_id: int | None
    r_ray: float
    ray_row: int
    ray_consistent: bool

    def component_mask(self, label: int) -> np.ndarray:
        return self.labels == label

    def label_at(self, zeta: complex) -> int:
        g = self.grid
        c = g.column_of(zeta.real)
        r = int(min(g.ny - 1, max(0, math.floor((zeta.imag - g.y0) / g.resolution))))
        return int(self.labels[r, c])

    def to_pgm(self) -> str:
        """Portable graymap (P2), top row = largest Im zeta, one label per cell."""
        maxval = max(1, self.count)
        lines = ["P2", f"{self.grid.nx} {self.grid.ny}", str(maxval)]
        for row in self.labels[::-1]:
            lines.append(" ".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        g = self.grid
        return {
            "bbox": [g.x0, g.x1, g.y0, g.y1],
            "resolution": g.resolution,
            "shape": [g.ny, g.nx],
            "components": self.count,
            "star_id": self.star_id,
            "r_ray": self.r_ray,
            "ray_consistent": self.ray_consistent,
        }


def find_star_component(
    spec: RegionSpec,
    bbox: Sequence[float],
    resolution: float,
    margin_cells: int = 2,
) -> ComponentMap:
    x0, x1, y0, y1 = (float(v) for v in bbox)
    if resolution <= 0 or x1 <= x0 or y1 <= y0:
        raise ParameterError("bbox must be nondegenerate and resolution positive")
    if not (y0 < 0 < y1 and x1 > 0):
        raise ParameterError("bbox must contain a segment of the positive real axis")
    grid = Grid(x0, x1, y0, y1, resolution)
    mask = rasterize(spec, grid)
    labels, count = label_components(mask)
    r_ray = find_ray(spec, step=resolution / 2, start=max(0.0, x0))
    probe_x = r_ray + margin_cells * resolution
    if probe_x >= x1 - resolution / 2:
        raise RayNotFoundError(
            f"no right ray inside the bounding box (ray starts near {r_ray:.4g}); enlarge the bbox"
        )
    row = grid.row_nearest(0.0)
    col = grid.column_of(probe_x)
    star = int(labels[row, col]) or None
    # the ray row sits half a cell off the axis, so check from the probe column on
    beyond = labels[row, col:]
    consistent = star is not None and bool(np.all(beyond == star))
    return ComponentMap(grid, labels, count, star, r_ray, row, consistent)


# ---------------------------------------------------------------------------
# admissible points
# ---------------------------------------------------------------------------

def polynomial_roots(coeffs: Sequence[complex], tol: float = 1e-14, max_iter: int = 500,
                     cluster: float = 1e-8) -> list[tuple[complex, int, float]]:
    """Roots by simultaneous (Weierstrass/Durand-Kerner) iteration plus Newton polishing.

    Returns ``(root, multiplicity, residual)`` with roots within ``cluster`` merged.
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        raise ParameterError("zero polynomial has no finite root set")
    c = c[: nz[-1] + 1]
    if nz[0] > 0:
        # exact zeros at the origin are deflated rather than iterated on
        rest = polynomial_roots(c[nz[0]:], tol, max_iter, cluster)
        return sorted([(0j, int(nz[0]), 0.0)] + rest,
                      key=lambda m: (round(m[0].real, 12), round(m[0].imag, 12)))
    deg = len(c) - 1
    if deg == 0:
        return []
    if deg == 1:
        r = complex(-c[0] / c[1])
        return [(r, 1, float(abs(c[0] + c[1] * r)))]
    monic = c / c[-1]
    radius = 1 + np.max(np.abs(monic[:-1]))
    z = radius * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg) * 0.5 + 0.4 + 0.9j
    for _ in range(max_iter):
        vals = np.polynomial.polynomial.polyval(z, monic)
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, 1.0)
        delta = vals / np.prod(diffs, axis=1)
        z = z - delta
        if np.max(np.abs(delta)) < tol * max(1.0, np.max(np.abs(z))):
            break
    dc = np.polynomial.polynomial.polyder(c)
    polished = []
    for r in z:
        for _ in range(50):
            d = np.polynomial.polynomial.polyval(r, dc)
            if d == 0:
                break
            step = np.polynomial.polynomial.polyval(r, c) / d
            r_new = r - step
            if not np.isfinite(r_new) or abs(np.polynomial.polynomial.polyval(r_new, c)) > abs(np.polynomial.polynomial.polyval(r, c)):
                break
            r = r_new
            if abs(step) < 1e-16 * max(1.0, abs(r)):
                break
        polished.append(complex(r))
    merged = _cluster_roots(polished, c, cluster)
    out = []
    for r, mult in sorted(merged, key=lambda m: (round(m[0].real, 12), round(m[0].imag, 12))):
        out.append((r, mult, float(abs(np.polynomial.polynomial.polyval(r, c)))))
    return out


def _cluster_roots(roots: list[complex], c: np.ndarray, cluster: float) -> list[tuple[complex, int]]:
    """Merge roots closer than ``cluster``; wider groups (a k-fold root splits by about
    eps^(1/k)) are merged only when the first k-1 derivatives vanish at their mean."""
    groups: list[list[complex]] = []
    for r in roots:
        for g in groups:
            if min(abs(x - r) for x in g) < cluster:
                g.append(r)
                break
        else:
            groups.append([r])
    scale = float(np.max(np.abs(c)))
    wide_tol = 1e-4
    changed = True
    while changed:
        changed = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                ma, mb = np.mean(groups[a]), np.mean(groups[b])
                if abs(ma - mb) > wide_tol * max(1.0, abs(ma)):
                    continue
                joined = groups[a] + groups[b]
                mean = _refine_multiple(c, complex(np.mean(joined)), len(joined))
                d = c.copy()
                ok = True
                for _ in range(len(joined)):
                    if abs(np.polynomial.polynomial.polyval(mean, d)) > 1e-10 * scale * max(1.0, abs(mean)) ** len(d):
                        ok = False
                        break
                    d = np.polynomial.polynomial.polyder(d)
                if ok:
                    groups[a] = joined
                    del groups[b]
                    changed = True
                    break
            if changed:
                break
    return [(_refine_multiple(c, complex(np.mean(g)), len(g)), len(g)) for g in groups]


def _refine_multiple(c: np.ndarray, z: complex, k: int) -> complex:
    """A k-fold root of p is a simple root of p^(k-1): polish there."""
    if k == 1:
        return z
    d = np.polynomial.polynomial.polyder(c, k - 1)
    dd = np.polynomial.polynomial.polyder(d)
    for _ in range(20):
        den = np.polynomial.polynomial.polyval(z, dd)
        if den == 0:
            break
        step = np.polynomial.polynomial.polyval(z, d) / den
        z -= step
        if abs(step) < 1e-16 * max(1.0, abs(z)):
            break
    return complex(z)


@dataclass(frozen=True)
class Candidate:
    zeta: complex
    kind: str  # "root" or "ray"
    source: int | None
    profile: tuple[float, ...]
    residual: float | None = None
    multiplicity: int = 1

    def to_json(self) -> dict:
        out = {
            "zeta": [self.zeta.real, self.zeta.imag],
            "kind": self.kind,
            "profile": list(self.profile),
        }
        if self.kind == "root":
            out.update(source=self.source, residual=self.residual, multiplicity=self.multiplicity)
        return out


def admissible_candidates(spec: RegionSpec, count: int) -> list[Candidate]:
    """Points along which admissible sequences run: roots of the ``P_j`` inside ``D``, then ray points.

    The ray points are ``r_ray + 1, r_ray + 2, ...`` (``count`` of them).
    """
    if count < 1:
        raise ParameterError("count must be >= 1")
    out = []
    for j in range(spec.n):
        for r, mult, res in polynomial_roots(spec.P[j]):
            if membership(spec, r):
                out.append(Candidate(r, "root", j, tuple(spec.profile(r).tolist()), res, mult))
    r_ray = find_ray(spec)
    for k in range(1, count + 1):
        t = complex(r_ray + k)
        out.append(Candidate(t, "ray", None, tuple(spec.profile(t).tolist())))
    return out


# ---------------------------------------------------------------------------
# the g_l transform and boundary diagnostics
# ---------------------------------------------------------------------------

def g_ell_transform(f_values, spec: RegionSpec, ell: int, points) -> np.ndarray:
    """``f * exp(lambda_1 l zeta) / P_1(zeta)^l`` using the first polynomial of ``spec``."""
    if ell < 0:
        raise ParameterError("ell must be nonnegative")
    points = np.asarray(points, dtype=complex)
    f_values = np.asarray(f_values, dtype=complex)
    if ell == 0:
        return f_values.copy()
    p1 = spec.eval_poly(0, points)
    if np.any(np.abs(p1) == 0):
        raise PoleError("evaluation at a zero of P_1")
    return f_values * np.exp(spec.lam[0] * ell * points) / p1 ** ell


def _bisect_boundary(spec: RegionSpec, a: complex, b: complex, iters: int = 60) -> complex:
    """Point on the segment [a, b] where the level crosses 1 (``a`` inside, ``b`` outside)."""
    for _ in range(iters):
        m = 0.5 * (a + b)
        if spec.level(m) < 1:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def sample_boundary(spec: RegionSpec, grid: Grid, A: float) -> np.ndarray:
    """Sampled boundary of ``D ∩ {Re zeta > A}`` inside the grid.

    Crossings of ``level = 1`` between neighbouring cells are refined by
    bisection; the line ``Re zeta = A`` contributes its points in the closure of ``D``.
    """
    mask = rasterize(spec, grid)
    C = grid.centers()
    pts = []
    ny, nx = mask.shape
    for r in range(ny):
        flips = np.nonzero(mask[r, :-1] != mask[r, 1:])[0]
        for c in flips:
            a, b = (C[r, c], C[r, c + 1]) if mask[r, c] else (C[r, c + 1], C[r, c])
            pts.append(_bisect_boundary(spec, a, b))
    for c in range(nx):
        flips = np.nonzero(mask[:-1, c] != mask[1:, c])[0]
        for r in flips:
            a, b = (C[r, c], C[r + 1, c]) if mask[r, c] else (C[r + 1, c], C[r, c])
            pts.append(_bisect_boundary(spec, a, b))
    pts = np.array([p for p in pts if p.real >= A], dtype=complex)
    line = A + 1j * grid.ys()
    line = line[spec.level(line) <= 1]
    if grid.x0 <= A <= grid.x1:
        pts = np.concatenate([pts, line])
    return pts


@dataclass(frozen=True)
class RegionDiagnostics:
    epsilon: float
    A_cutoff: float
    delta0_estimate: float
    order_permutation: list[int]
    M: float
    C: float
    per_ell: list[dict] = dc_field(default_factory=list)
    violations: list[str] = dc_field(default_factory=list)
    boundary_samples: int = 0

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "A_cutoff": self.A_cutoff,
            "delta0_estimate": self.delta0_estimate,
            "order_permutation": self.order_permutation,
            "M": self.M,
            "C": self.C,
            "per_ell": self.per_ell,
            "violations": self.violations,
            "boundary_samples": self.boundary_samples,
        }


def boundary_bound_report(
    spec: RegionSpec,
    f: Callable[[np.ndarray], np.ndarray],
    ell_max: int,
    resolution: float,
    bbox: Sequence[float] | None = None,
    rel_tol: float = 1e-9,
) -> RegionDiagnostics:
    """Estimate ``epsilon, A, delta_0, M, C`` from samples and compare ``max |g_l|`` on the
    sampled boundary of ``D ∩ {Re zeta > A}`` with ``M C^l``.

    ``A`` is 0 when no ``P_j`` has a root, else one unit right of the rightmost root.
    ``f`` must accept an array of complex points.
    """
    ordered, perm = spec.reordered()
    roots = [r for j in range(ordered.n) for r, _, _ in polynomial_roots(ordered.P[j])]
    A = 0.0 if not roots else max(0.0, max(r.real for r in roots) + 1.0)
    if bbox is None:
        r_ray = find_ray(ordered, step=resolution)
        x1 = max(A, r_ray) + 6.0
        bbox = (min(-2.0, A - 2.0), x1, -3.0, 3.0)
    grid = Grid(*(float(v) for v in bbox), resolution)
    C_pts = grid.centers()
    mask = rasterize(ordered, grid)
    line = A + 1j * grid.ys()
    right = np.concatenate([C_pts[C_pts.real >= A], line])
    epsilon = float(min(np.min(np.abs(ordered.eval_poly(j, right))) for j in range(ordered.n)))
    bd = sample_boundary(ordered, grid, A)
    if len(bd) == 0:
        raise ParameterError("no boundary samples: enlarge the bbox or refine the resolution")
    delta0 = float(np.min(ordered.profile(bd)[0]))
    region_pts = C_pts[mask]
    f_region = np.abs(np.asarray(f(region_pts), dtype=complex))
    f_bd = np.asarray(f(bd), dtype=complex)
    M = float(max(np.max(f_region) if len(f_region) else 0.0, np.max(np.abs(f_bd))))
    lam1 = ordered.lam[0]
    C = max(1.0 / delta0 if delta0 > 0 else float("inf"), math.exp(lam1 * A) / epsilon)
    violations = []
    # growth toward the right edge means the sup over the box is not a bound for f
    cols = mask.any(axis=0)
    if cols.any():
        last = np.nonzero(cols)[0][-1]
        mid = np.nonzero(cols)[0][len(np.nonzero(cols)[0]) // 2]
        edge_max = np.max(np.abs(f(C_pts[mask[:, last], last])))
        mid_max = np.max(np.abs(f(C_pts[mask[:, mid], mid])))
        if edge_max > mid_max * (1 + 1e-6) and edge_max >= M * (1 - 1e-12):
            violations.append(
                f"f grows toward the right edge of the box (|f| {mid_max:.6g} -> {edge_max:.6g}); not bounded"
            )
    per_ell = []
    for ell in range(ell_max + 1):
        g = np.abs(g_ell_transform(f_bd, ordered, ell, bd))
        bound = M * C ** ell
        gmax = float(np.max(g))
        tail = bd.real >= np.quantile(bd.real, 0.75)
        entry = {"ell": ell, "max_abs_g": gmax, "bound": bound,
                 "tail_max_abs_g": float(np.max(g[tail])) if tail.any() else None}
        if gmax > bound * (1 + rel_tol):
            violations.append(f"ell={ell}: max |g| = {gmax:.6g} exceeds M C^ell = {bound:.6g}")
        per_ell.append(entry)
    return RegionDiagnostics(epsilon, A, delta0, perm, M, C, per_ell, violations, int(len(bd)))
