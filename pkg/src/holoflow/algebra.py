"""Exact algebra: Gaussian rationals, multi-indices and sparse mixed polynomials.

A mixed polynomial in ``n`` complex variables is a finite sum

    sum_{alpha, beta} c_{alpha beta} z^alpha zbar^beta

with Gaussian-rational coefficients.  ``z_j`` and ``zbar_j`` are treated as
independent symbols, so Wirtinger derivatives are ordinary partial derivatives.
Indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Tuple

from .errors import DimensionError, IndexRangeError, SubstitutionError

MultiIndex = Tuple[int, ...]
TermKey = Tuple[MultiIndex, MultiIndex]


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` (or an int / ``"p"``) into a reduced :class:`Fraction`."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"expected rational string, got {type(text).__name__}")
    return Fraction(text.strip())


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------

_ZERO = Fraction(0)
_ONE = Fraction(1)


class GaussianRational:
    """Exact element ``re + i*im`` of Q(i).  Immutable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("cannot combine a GaussianRational real part with an imaginary part")
            re, im = re.re, re.im
        object.__setattr__(self, "re", re if type(re) is Fraction else Fraction(re))
        object.__setattr__(self, "im", im if type(im) is Fraction else Fraction(im))

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls._make(Fraction(value), _ZERO)
        if isinstance(value, str):
            return cls._make(parse_rational(value), _ZERO)
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return cls._make(parse_rational(value[0]), parse_rational(value[1]))
        raise TypeError(f"cannot convert {value!r} to an exact Gaussian rational")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            return GaussianRational._make(self.re + other, self.im)
        return GaussianRational._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            return GaussianRational._make(self.re - other, self.im)
        return GaussianRational._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            return GaussianRational._make(self.re * other, self.im * other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._make(a * c, _ZERO)
        return GaussianRational._make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, GaussianRational):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            other = GaussianRational.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussianRational._make(_ONE, _ZERO)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GaussianRational":
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GaussianRational._make(self.re / norm, -self.im / norm)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return not self.im

    # comparisons / hashing ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            if abs(self.im) == 1:
                return "i" if self.im > 0 else "-i"
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        return f"({self.re}{sign}{'' if mag == 1 else mag}i)"

    def to_json(self) -> list:
        return [format_rational(self.re), format_rational(self.im)]

    @classmethod
    def from_json(cls, data) -> "GaussianRational":
        return cls.coerce(data)


Q = GaussianRational  # short alias used across the package
ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


# ---------------------------------------------------------------------------
# Multi-indices
# ---------------------------------------------------------------------------

class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def lex_compare(a: Sequence[int], b: Sequence[int]) -> Ordering:
    """Lexicographic comparison: ``a < b`` iff the first differing entry is smaller in ``a``."""
    if len(a) != len(b):
        raise DimensionError(f"multi-index lengths differ: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x < y:
            return Ordering.LESS
        if x > y:
            return Ordering.GREATER
    return Ordering.EQUAL


def multi_indices(n: int, degree: int) -> Iterator[MultiIndex]:
    """All multi-indices of length ``n`` and total degree exactly ``degree``, in lex order."""
    if n == 0:
        if degree == 0:
            yield ()
        return
    for first in range(degree + 1):
        for rest in multi_indices(n - 1, degree - first):
            yield (first,) + rest


def multi_indices_upto(n: int, cap: int) -> Iterator[MultiIndex]:
    for d in range(cap + 1):
        yield from multi_indices(n, d)


def unit_index(n: int, j: int) -> MultiIndex:
    return tuple(1 if k == j else 0 for k in range(n))


def _add_idx(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Mixed polynomials
# ---------------------------------------------------------------------------

class Part(enum.Enum):
    HOLO = "holo"
    ANTI = "anti"


class MixedPolynomial:
    """Sparse polynomial in ``z_1..z_n`` and ``zbar_1..zbar_n`` over Q(i).

    Terms map ``(holo, anti)`` exponent tuples to nonzero coefficients.
    Instances are immutable; every operation returns a new polynomial.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping | Iterable | None = None):
        if n < 0:
            raise DimensionError("dimension must be nonnegative")
        clean: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for key, coeff in items:
            holo, anti = key
            holo, anti = tuple(int(e) for e in holo), tuple(int(e) for e in anti)
            if len(holo) != n or len(anti) != n:
                raise DimensionError(f"term {key} does not have length {n}")
            if any(e < 0 for e in holo + anti):
                raise ValueError(f"negative exponent in {key}")
            c = Q.coerce(coeff)
            k = (holo, anti)
            c = clean.get(k, ZERO) + c
            if c:
                clean[k] = c
            else:
                clean.pop(k, None)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", clean)

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "MixedPolynomial":
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "_terms", terms)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("MixedPolynomial is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "MixedPolynomial":
        return cls._raw(n, {})

    @classmethod
    def constant(cls, n: int, c=1) -> "MixedPolynomial":
        c = Q.coerce(c)
        z = (0,) * n
        return cls._raw(n, {(z, z): c} if c else {})

    @classmethod
    def monomial(cls, n: int, holo: Sequence[int], anti: Sequence[int] | None = None, coeff=1):
        anti = (0,) * n if anti is None else anti
        return cls(n, {(tuple(holo), tuple(anti)): coeff})

    @classmethod
    def variable(cls, n: int, j: int, part: Part = Part.HOLO) -> "MixedPolynomial":
        if not 0 <= j < n:
            raise IndexRangeError(f"variable index {j} out of range for n={n}")
        e = unit_index(n, j)
        z = (0,) * n
        key = (e, z) if part is Part.HOLO else (z, e)
        return cls._raw(n, {key: ONE})

    # container protocol -----------------------------------------------------
    def items(self) -> list:
        """Terms in canonical (lex on ``(holo, anti)``) order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def coefficient(self, holo: Sequence[int], anti: Sequence[int] | None = None) -> GaussianRational:
        anti = (0,) * self.n if anti is None else tuple(anti)
        return self._terms.get((tuple(holo), anti), ZERO)

    def keys(self):
        return self._terms.keys()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, MixedPolynomial):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == MixedPolynomial.constant(self.n, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def _check(self, other: "MixedPolynomial"):
        if other.n != self.n:
            raise DimensionError(f"polynomial dimensions differ: {self.n} vs {other.n}")

    # ring operations --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MixedPolynomial):
            if isinstance(other, (int, Fraction, GaussianRational)):
                other = MixedPolynomial.constant(self.n, other)
            else:
                return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                del out[k]
        return MixedPolynomial._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MixedPolynomial._raw(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = MixedPolynomial.constant(self.n, other)
        if not isinstance(other, MixedPolynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MixedPolynomial":
        c = Q.coerce(c)
        if not c:
            return MixedPolynomial.zero(self.n)
        return MixedPolynomial._raw(self.n, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        if not isinstance(other, MixedPolynomial):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for (h1, a1), c1 in self._terms.items():
            for (h2, a2), c2 in other._terms.items():
                k = (_add_idx(h1, h2), _add_idx(a1, a2))
                s = out.get(k)
                s = c1 * c2 if s is None else s + c1 * c2
                out[k] = s
        return MixedPolynomial._raw(self.n, {k: c for k, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial power must be a nonnegative integer")
        result = MixedPolynomial.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # identity elements for generic substitution
    def unit(self) -> "MixedPolynomial":
        return MixedPolynomial.constant(self.n, 1)

    def zero_like(self) -> "MixedPolynomial":
        return MixedPolynomial.zero(self.n)

    # structure ----------------------------------------------------------------
    def total_degree(self) -> int:
        """Largest ``|alpha| + |beta|`` over the terms; -1 for the zero polynomial."""
        return max((sum(h) + sum(a) for h, a in self._terms), default=-1)

    def is_holomorphic(self) -> bool:
        return all(not any(a) for _, a in self._terms)

    def variables_used(self, part: Part = Part.HOLO) -> set[int]:
        used = set()
        for h, a in self._terms:
            e = h if part is Part.HOLO else a
            used.update(j for j, x in enumerate(e) if x)
        return used

    def conj(self) -> "MixedPolynomial":
        """Complex conjugate as a function: swaps ``z`` and ``zbar`` and conjugates coefficients."""
        return MixedPolynomial._raw(self.n, {(a, h): c.conjugate() for (h, a), c in self._terms.items()})

    def truncate(self, cap: int) -> tuple["MixedPolynomial", bool]:
        """Drop terms of total degree > ``cap``; also report whether anything was dropped."""
        kept = {k: c for k, c in self._terms.items() if sum(k[0]) + sum(k[1]) <= cap}
        return MixedPolynomial._raw(self.n, kept), len(kept) != len(self._terms)

    def wirtinger_d(self, part: Part, j: int) -> "MixedPolynomial":
        """Formal partial derivative in ``z_j`` (HOLO) or ``zbar_j`` (ANTI)."""
        if not 0 <= j < self.n:
            raise IndexRangeError(f"variable index {j} out of range for n={self.n}")
        out = {}
        slot = 0 if part is Part.HOLO else 1
        for key, c in self._terms.items():
            e = key[slot][j]
            if not e:
                continue
            lowered = list(key[slot])
            lowered[j] -= 1
            nk = (tuple(lowered), key[1]) if slot == 0 else (key[0], tuple(lowered))
            out[nk] = c * e
        return MixedPolynomial._raw(self.n, out)

    def evaluate(self, z: Sequence[complex]) -> complex:
        if len(z) != self.n:
            raise DimensionError(f"point has {len(z)} coordinates, expected {self.n}")
        zc = [complex(v) for v in z]
        zb = [v.conjugate() for v in zc]
        total = 0j
        for (h, a), c in self._terms.items():
            term = complex(c)
            for j in range(self.n):
                if h[j]:
                    term *= zc[j] ** h[j]
                if a[j]:
                    term *= zb[j] ** a[j]
            total += term
        return total

    def to_callable(self) -> Callable[[Sequence[complex]], complex]:
        """Compile to a float evaluator (coefficients converted once)."""
        compiled = [(complex(c), h, a) for (h, a), c in self.items()]
        n = self.n

        def f(z):
            zb = [complex(v).conjugate() for v in z]
            total = 0j
            for c, h, a in compiled:
                term = c
                for j in range(n):
                    if h[j]:
                        term *= z[j] ** h[j]
                    if a[j]:
                        term *= zb[j] ** a[j]
                total += term
            return total

        return f

    # serialization ------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"holo": list(h), "anti": list(a), "re": format_rational(c.re), "im": format_rational(c.im)}
                for (h, a), c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MixedPolynomial":
        n = int(data["n"])
        return cls(n, cls._terms_from_json(n, data.get("terms", [])))

    @staticmethod
    def _terms_from_json(n: int, terms: Iterable[Mapping]) -> list:
        out = []
        for t in terms:
            holo = tuple(t["holo"])
            anti = tuple(t.get("anti", (0,) * n))
            c = Q(parse_rational(t.get("re", "0/1")), parse_rational(t.get("im", "0/1")))
            out.append(((holo, anti), c))
        return out

    def format(self, names: Sequence[str] | None = None, conj_names: Sequence[str] | None = None) -> str:
        """Human-readable form, e.g. ``2*z1^2*zb1 + i*z2``."""
        names = list(names) if names else [f"z{j + 1}" for j in range(self.n)]
        conj_names = list(conj_names) if conj_names else [f"conj({s})" for s in names]
        if not self._terms:
            return "0"
        pieces = []
        for (h, a), c in self.items():
            factors = []
            for j, e in enumerate(h):
                if e:
                    factors.append(names[j] if e == 1 else f"{names[j]}^{e}")
            for j, e in enumerate(a):
                if e:
                    factors.append(conj_names[j] if e == 1 else f"{conj_names[j]}^{e}")
            if not factors:
                pieces.append(str(c))
            elif c == 1:
                pieces.append("*".join(factors))
            elif c == -1:
                pieces.append("-" + "*".join(factors))
            else:
                pieces.append(f"{c}*" + "*".join(factors))
        return " + ".join(pieces).replace("+ -", "- ")

    def __repr__(self):
        return f"MixedPolynomial(n={self.n}, {self.format()})"


def substitute(p: MixedPolynomial, holo_images: Sequence, anti_images: Sequence | None = None):
    """Ring homomorphism sending ``z_j -> holo_images[j]`` and ``zbar_j -> anti_images[j]``.

    The images may live in any polynomial-like space that supports ``+``, ``*``,
    scaling by Gaussian rationals, and provides ``unit()`` / ``zero_like()``.
    ``anti_images`` may be omitted only when ``p`` has no antiholomorphic terms.
    """
    if len(holo_images) != p.n:
        raise SubstitutionError(f"need {p.n} holomorphic images, got {len(holo_images)}")
    if anti_images is None:
        if not p.is_holomorphic():
            raise SubstitutionError("missing images for conjugate variables")
        anti_images = [None] * p.n
    elif len(anti_images) != p.n:
        raise SubstitutionError(f"need {p.n} conjugate images, got {len(anti_images)}")
    sample = next((x for x in itertools.chain(holo_images, anti_images) if x is not None), None)
    if sample is None:
        raise SubstitutionError("no images supplied")
    for x in itertools.chain(holo_images, anti_images):
        if x is not None and type(x) is not type(sample):
            raise SubstitutionError("images live in different target spaces")
        if x is not None and getattr(x, "n", None) != getattr(sample, "n", None):
            raise SubstitutionError("inconsistent target dimension among images")
    one = sample.unit()
    cache: dict = {}

    def power(img, slot, j, e):
        key = (slot, j, e)
        if key not in cache:
            if img is None:
                raise SubstitutionError(f"missing image for conjugate variable {j}")
            cache[key] = one if e == 0 else power(img, slot, j, e - 1) * img
        return cache[key]

    result = sample.zero_like()
    for (h, a), c in p.items():
        term = one
        for j in range(p.n):
            if h[j]:
                term = term * power(holo_images[j], 0, j, h[j])
            if a[j]:
                term = term * power(anti_images[j], 1, j, a[j])
        result = result + term.scale(c)
    return result


@dataclass(frozen=True)
class TruncatedSeries:
    """Finite surrogate of a formal power series: every term has total degree <= ``degree_cap``.

    ``truncated`` records whether the operation that produced this value
    discarded terms above the cap.
    """

    poly: MixedPolynomial
    degree_cap: int
    truncated: bool = False

    def __post_init__(self):
        if self.degree_cap < 0:
            raise ValueError("degree_cap must be nonnegative")
        if self.poly.total_degree() > self.degree_cap:
            raise ValueError(
                f"polynomial of degree {self.poly.total_degree()} exceeds cap {self.degree_cap}"
            )

    @classmethod
    def from_poly(cls, poly: MixedPolynomial, cap: int) -> "TruncatedSeries":
        kept, dropped = poly.truncate(cap)
        return cls(kept, cap, dropped)

    @property
    def n(self) -> int:
        return self.poly.n

    def to_json(self) -> dict:
        return {"degree_cap": self.degree_cap, "truncated": self.truncated, "poly": self.poly.to_json()}


# ---------------------------------------------------------------------------
# Exponential polynomials
# ---------------------------------------------------------------------------

WeightKey = Tuple[GaussianRational, GaussianRational]


class ExponentialPolynomial:
    """Finite sum of ``exp(w*zeta + w'*conj(zeta)) * P`` with ``P`` a mixed polynomial.

    ``zeta_index`` names the variable of the inner polynomials that plays the
    role of ``zeta``; the exponential factors are kept symbolic.
    """

    __slots__ = ("n", "zeta_index", "_terms")

    def __init__(self, n: int, zeta_index: int, terms: Mapping[WeightKey, MixedPolynomial] | None = None):
        clean = {}
        for (w, wb), poly in (terms or {}).items():
            if poly.n != n:
                raise DimensionError(f"inner polynomial has dimension {poly.n}, expected {n}")
            key = (Q.coerce(w), Q.coerce(wb))
            acc = clean.get(key)
            acc = poly if acc is None else acc + poly
            if acc:
                clean[key] = acc
            else:
                clean.pop(key, None)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "zeta_index", zeta_index)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("ExponentialPolynomial is immutable")

    @classmethod
    def single(cls, poly: MixedPolynomial, zeta_index: int, weight=0, conj_weight=0):
        return cls(poly.n, zeta_index, {(Q.coerce(weight), Q.coerce(conj_weight)): poly})

    def items(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: (kv[0][0].re, kv[0][0].im, kv[0][1].re, kv[0][1].im))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, ExponentialPolynomial):
            return NotImplemented
        return self.n == other.n and self.zeta_index == other.zeta_index and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, self.zeta_index, frozenset(self._terms.items())))

    def _check(self, other):
        if other.n != self.n or other.zeta_index != self.zeta_index:
            raise DimensionError("exponential polynomials live in different spaces")

    def __add__(self, other):
        if not isinstance(other, ExponentialPolynomial):
            return NotImplemented
        self._check(other)
        merged = dict(self._terms)
        for k, p in other._terms.items():
            merged[k] = merged[k] + p if k in merged else p
        return ExponentialPolynomial(self.n, self.zeta_index, merged)

    def __neg__(self):
        return ExponentialPolynomial(self.n, self.zeta_index, {k: -p for k, p in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        if not isinstance(other, ExponentialPolynomial):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for (w1, b1), p1 in self._terms.items():
            for (w2, b2), p2 in other._terms.items():
                k = (w1 + w2, b1 + b2)
                prod = p1 * p2
                out[k] = out[k] + prod if k in out else prod
        return ExponentialPolynomial(self.n, self.zeta_index, out)

    def scale(self, c) -> "ExponentialPolynomial":
        c = Q.coerce(c)
        return ExponentialPolynomial(self.n, self.zeta_index, {k: p.scale(c) for k, p in self._terms.items()})

    def unit(self) -> "ExponentialPolynomial":
        return ExponentialPolynomial.single(MixedPolynomial.constant(self.n, 1), self.zeta_index)

    def zero_like(self) -> "ExponentialPolynomial":
        return ExponentialPolynomial(self.n, self.zeta_index, {})

    def conj(self) -> "ExponentialPolynomial":
        return ExponentialPolynomial(
            self.n,
            self.zeta_index,
            {(b.conjugate(), w.conjugate()): p.conj() for (w, b), p in self._terms.items()},
        )

    def d_zeta(self) -> "ExponentialPolynomial":
        """Holomorphic derivative in ``zeta``: ``d/dzeta [e^{w zeta} P] = e^{w zeta}(w P + dP/dzeta)``."""
        out = {}
        for (w, b), p in self._terms.items():
            out[(w, b)] = p.scale(w) + p.wirtinger_d(Part.HOLO, self.zeta_index)
        return ExponentialPolynomial(self.n, self.zeta_index, out)

    def depends_on_conj_zeta(self) -> bool:
        """True iff some term carries a nonzero conj(zeta)-weight or a conj(zeta) power."""
        for (_, b), p in self._terms.items():
            if b:
                return True
            if self.zeta_index in p.variables_used(Part.ANTI):
                return True
        return False

    def conj_zeta_terms(self) -> list:
        return [
            (k, p)
            for k, p in self.items()
            if k[1] or self.zeta_index in p.variables_used(Part.ANTI)
        ]

    def evaluate(self, values: Sequence[complex]) -> complex:
        import cmath

        zeta = complex(values[self.zeta_index])
        total = 0j
        for (w, b), p in self._terms.items():
            e = cmath.exp(complex(w) * zeta + complex(b) * zeta.conjugate())
            total += e * p.evaluate(values)
        return total

    def to_json(self) -> list:
        return [
            {"weight": w.to_json(), "conj_weight": b.to_json(), "poly": p.to_json()}
            for (w, b), p in self.items()
        ]

    def __repr__(self):
        parts = [f"exp({w}*zeta{'' if not b else f' + {b}*conj(zeta)'})*({p.format()})" for (w, b), p in self.items()]
        return "ExponentialPolynomial(" + (" + ".join(parts) or "0") + ")"
