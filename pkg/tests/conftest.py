from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from holoflow.algebra import GaussianRational, MixedPolynomial
from holoflow.fields import random_aligned_field

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

small_ints = st.integers(min_value=-6, max_value=6)
denominators = st.integers(min_value=1, max_value=5)


@st.composite
def gaussian_rationals(draw):
    return GaussianRational(
        Fraction(draw(small_ints), draw(denominators)),
        Fraction(draw(small_ints), draw(denominators)),
    )


@st.composite
def multi_index(draw, n, max_total=3):
    idx = [draw(st.integers(0, max_total)) for _ in range(n)]
    while sum(idx) > max_total:
        k = max(range(n), key=lambda i: idx[i])
        idx[k] -= 1
    return tuple(idx)


@st.composite
def mixed_polys(draw, n=2, max_terms=4, max_degree=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        h = draw(multi_index(n, max_degree))
        a = draw(multi_index(n, max(0, max_degree - sum(h))))
        terms[(h, a)] = draw(gaussian_rationals())
    return MixedPolynomial(n, terms)


@pytest.fixture(scope="session")
def aligned_fields():
    rng = random.Random(7)
    return [random_aligned_field(rng) for _ in range(12)]
