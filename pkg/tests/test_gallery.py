from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holoflow.algebra import MixedPolynomial, Part, Q
from holoflow.errors import ParameterError, SingularEvaluationError
from holoflow.fields import NormalFormField, euler_field, plane_jordan_field
from holoflow.flow import Direction
from holoflow.gallery import (
    HOLOMORPHIC_TOL,
    LEAFWISE_TOL,
    WITNESS_FLOOR,
    BranchCounter,
    CounterexampleSpec,
    Kind,
    SampledFunction,
    Verdict,
    build_counterexample,
    chain_rule_cascade_check,
    decide,
    default_zeta_samples,
    leafwise_holomorphy_check,
    parse_case,
    smoothness_probe,
    verify_case,
    verify_function,
    wirtinger_holo,
    wirtinger_residual,
)
from holoflow.kernel import solve_kernel

JORDAN = plane_jordan_field(1, 2, 1)


def fn(n, g, label="test"):
    return SampledFunction(n, lambda z: complex(g(z)), label)


# -- construction -------------------------------------------------------------

def test_finite_smooth_value():
    F = build_counterexample(CounterexampleSpec(Kind.FINITE_SMOOTH, k=1))
    assert F([0.5, 0.5]) == pytest.approx(0.125)


@pytest.mark.parametrize("kind", list(Kind))
def test_degenerate_set_is_zero(kind):
    f = build_counterexample(CounterexampleSpec(kind))
    assert f([0, 0.7 + 0.1j]) == 0
    if kind is not Kind.FINITE_SMOOTH:
        assert f([0.3 - 0.2j, 0]) == 0


def test_negative_ratio_formula():
    f = build_counterexample(CounterexampleSpec(Kind.NEGATIVE_RATIO, t=2.0))
    z, w = 0.6 + 0.2j, -0.5j
    assert f([z, w]) == pytest.approx(math.exp(-1 / (abs(w) ** 2 * abs(z))))


def test_nonreal_ratio_formula():
    s = CounterexampleSpec(Kind.NONREAL_RATIO, t=1.5)
    assert s.gamma == pytest.approx(0.5 - 1j)
    assert s.beta == pytest.approx(1.5 * (1 - 0.5j))
    f = build_counterexample(s)
    z, w = 0.7 + 0.1j, 0.4 - 0.3j
    base = s.gamma * math.log(abs(z)) + s.gamma.conjugate() / 1.5 * math.log(abs(w))
    assert f([z, w]) == pytest.approx(cmath.exp(base ** 2))


def test_evaluators_are_deterministic():
    for kind in Kind:
        f = build_counterexample(CounterexampleSpec(kind))
        assert f([0.31 + 0.2j, 0.6 - 0.1j]) == f([0.31 + 0.2j, 0.6 - 0.1j])


@pytest.mark.parametrize("kwargs", [
    dict(kind=Kind.FINITE_SMOOTH, k=0),
    dict(kind=Kind.FINITE_SMOOTH, k=1.5),
    dict(kind=Kind.NEGATIVE_RATIO, t=0),
    dict(kind=Kind.NEGATIVE_RATIO, t=1, alpha=1, beta=1),
    dict(kind=Kind.NONREAL_RATIO, alpha=1),
    dict(kind=Kind.NONREAL_RATIO, alpha=-1 + 1j),
    dict(kind=Kind.NONREAL_RATIO, b=1.0),
])
def test_parameter_errors(kwargs):
    with pytest.raises(ParameterError):
        CounterexampleSpec(**kwargs)


def test_parse_case():
    s = parse_case("negative-ratio", t=2.0, alpha=None)
    assert s.kind is Kind.NEGATIVE_RATIO and s.t == 2.0 and s.beta == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        parse_case("no-such-case")


def test_designated_fields():
    assert CounterexampleSpec(Kind.FINITE_SMOOTH).field() == euler_field(2)
    f = CounterexampleSpec(Kind.NEGATIVE_RATIO).field()
    assert f.lam == (Q(1), Q(-1))
    g = CounterexampleSpec(Kind.NONREAL_RATIO, t=2).field()
    assert g.lam == (Q(1, Fraction(1, 2)), Q(2, -1))


# -- Wirtinger derivatives ----------------------------------------------------

def test_wirtinger_of_holomorphic():
    r = wirtinger_residual(fn(1, lambda z: z[0] ** 2), [0.3 + 0.1j], 1e-4)
    assert abs(r[0]) <= 1e-6


def test_wirtinger_of_conjugate():
    for p in [0.3 + 0.1j, -2 + 1j, 5j]:
        assert wirtinger_residual(fn(1, lambda z: z[0].conjugate()), [p])[0] == pytest.approx(1, abs=1e-9)


def test_wirtinger_finite_smooth_example():
    F = build_counterexample(CounterexampleSpec(Kind.FINITE_SMOOTH, k=1))
    d = wirtinger_residual(F, [0.5, 0.5])
    # dF/dzbar2 = z1^3 / zbar1
    assert d[1] == pytest.approx(0.25, abs=1e-8)


def test_wirtinger_holo_matches_closed_form():
    f = fn(2, lambda z: z[0] ** 2 * z[1].conjugate())
    p = [0.4 - 0.2j, 0.1 + 0.3j]
    d = wirtinger_holo(f, p)
    assert d[0] == pytest.approx(2 * p[0] * p[1].conjugate(), abs=1e-8)
    assert abs(d[1]) < 1e-8


def test_wirtinger_dimension_check():
    with pytest.raises(ParameterError):
        wirtinger_residual(fn(2, lambda z: z[0]), [0.1])


def test_wirtinger_singular_evaluation():
    # the stencil point p - h lands on the pole
    with pytest.raises(SingularEvaluationError):
        wirtinger_residual(fn(1, lambda z: 1 / z[0]), [1e-4], 1e-4)


@given(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False))
def test_wirtinger_error_is_second_order(p):
    # f = z e^{zbar}: df/dzbar = z e^{zbar}; halving h should quarter the error
    f = fn(1, lambda z: z[0] * cmath.exp(z[0].conjugate()))
    exact = p * cmath.exp(p.conjugate())
    if abs(exact) < 0.05:
        return
    e1 = abs(wirtinger_residual(f, [p], 2e-2)[0] - exact)
    e2 = abs(wirtinger_residual(f, [p], 1e-2)[0] - exact)
    assert 3.5 < e1 / e2 < 4.5


# -- leafwise checks ----------------------------------------------------------

def test_negative_ratio_leafwise_example():
    s = CounterexampleSpec(Kind.NEGATIVE_RATIO, t=1)
    f = build_counterexample(s)
    assert leafwise_holomorphy_check(f, s.field(), (0.4, 0.3), default_zeta_samples()) <= 1e-6


def test_finite_smooth_leafwise_along_euler():
    F = build_counterexample(CounterexampleSpec(Kind.FINITE_SMOOTH, k=2))
    assert leafwise_holomorphy_check(F, euler_field(2), (0.3 + 0.1j, -0.4), default_zeta_samples()) <= 1e-6


def test_finite_smooth_is_power_of_zeta_on_radial_lines():
    k = 1
    F = build_counterexample(CounterexampleSpec(Kind.FINITE_SMOOTH, k=k))
    v = (0.3 + 0.2j, -0.1 + 0.5j)
    for s in [0.5, 0.2 + 0.7j, -1 + 0.3j]:
        ratio = F([s * v[0], s * v[1]]) / F(list(v))
        assert ratio == pytest.approx(s ** (k + 2), rel=1e-12)


def test_holomorphic_function_leafwise():
    f = fn(2, lambda z: z[0])
    assert leafwise_holomorphy_check(f, JORDAN, (0.4, 0.2), default_zeta_samples()) <= 1e-8


def test_antiholomorphic_function_is_not_leafwise():
    f = fn(2, lambda z: z[0].conjugate())
    assert leafwise_holomorphy_check(f, euler_field(2), (0.4, 0.2), default_zeta_samples()) > 0.1


def unit_speed(f: NormalFormField) -> NormalFormField:
    """X / max Re lambda: same leaves, holomorphically reparametrized, still in normal form."""
    c = Q(Fraction(1) / max(x.re for x in f.lam))
    return NormalFormField.make([x * c for x in f.lam], [g.scale(c) for g in f.g])


def test_kernel_elements_pass_both_checks(aligned_fields):
    # The four-point stencil errs by h^2 |f'''| / 6 on holomorphic f: exactly h^2 for z^3, which
    # sits on 1e-8 at h = 1e-4, so this check runs at h = 5e-5.  Leaves are traversed at unit
    # speed so the third zeta-derivative of the leaf map stays O(1).
    h = 5e-5
    rng = np.random.default_rng(1)
    for f in aligned_fields[:6]:
        leaves = unit_speed(f)
        for p in solve_kernel(f, 3).polynomials[:6]:
            F = SampledFunction.from_polynomial(p)
            eta = list(rng.uniform(-0.3, 0.3, f.n) + 1j * rng.uniform(-0.3, 0.3, f.n))
            assert leafwise_holomorphy_check(F, leaves, eta, default_zeta_samples(9, 0.3), h) <= 1e-8
            assert np.max(np.abs(wirtinger_residual(F, eta, h))) <= 1e-8


def test_unit_speed_field_has_same_kernel(aligned_fields):
    for f in aligned_fields[:4]:
        a, b = solve_kernel(f, 3), solve_kernel(unit_speed(f), 3)
        assert all(b.contains(p) for p in a.polynomials) and len(a) == len(b)


def test_stencil_error_on_cubic_is_h_squared():
    f = fn(1, lambda z: z[0] ** 3)
    for h in (1e-2, 1e-3):
        assert abs(wirtinger_residual(f, [0.3 - 0.2j], h)[0]) == pytest.approx(h * h, rel=1e-6)


def test_nonholomorphic_kernel_element_is_leafwise():
    # |z1 z2|^2 along z d_z - w d_w
    f = NormalFormField.make([Q(1), Q(-1)])
    F = SampledFunction.from_polynomial(MixedPolynomial.monomial(2, (1, 1), (1, 1)))
    assert leafwise_holomorphy_check(F, f, (0.4, 0.3), default_zeta_samples()) <= 1e-8
    assert np.max(np.abs(wirtinger_residual(F, [0.4, 0.3]))) > 0.01


# -- cascade ------------------------------------------------------------------

def test_cascade_conj_last_variable():
    F = SampledFunction.from_polynomial(MixedPolynomial.variable(2, 1, Part.ANTI))
    eta, zeta = (0.3, 0.2), 0.2
    rows = chain_rule_cascade_check(F, JORDAN, eta, zeta)
    assert [r.j for r in rows] == [1, 0]
    # backward flow: z2 = e^{-2 zeta} (eta2 - eta1^2 zeta), so G = conj(z2)
    assert rows[0].lhs == pytest.approx(cmath.exp(-2 * zeta).conjugate(), abs=1e-8)
    assert rows[1].lhs == pytest.approx((-2 * eta[0] * zeta * cmath.exp(-2 * zeta)).conjugate(), abs=1e-8)
    assert all(r.residual <= 1e-5 for r in rows)


def test_cascade_holomorphic_function():
    F = SampledFunction.from_polynomial(MixedPolynomial.variable(2, 0) * MixedPolynomial.variable(2, 1))
    for r in chain_rule_cascade_check(F, JORDAN, (0.3 + 0.1j, 0.2), 0.1 - 0.3j):
        assert abs(r.lhs) < 1e-8 and abs(r.rhs) < 1e-8


def test_cascade_conj_first_variable():
    F = SampledFunction.from_polynomial(MixedPolynomial.variable(2, 0, Part.ANTI))
    eta, zeta = (0.3 - 0.1j, 0.2 + 0.2j), 0.25 + 0.1j
    rows = {r.j: r for r in chain_rule_cascade_check(F, JORDAN, eta, zeta)}
    assert rows[0].lhs == pytest.approx(cmath.exp(-zeta).conjugate(), abs=1e-8)
    assert abs(rows[1].lhs) < 1e-9
    assert all(r.residual <= 1e-8 for r in rows.values())


def test_cascade_correction_term_matters():
    # F = zbar1 * zbar2: the eta_1 row picks up d z2 / d eta_1 = -2 eta1 zeta e^{-2 zeta}
    F = SampledFunction.from_polynomial(MixedPolynomial.monomial(2, (0, 0), (1, 1)))
    eta, zeta = (0.4, 0.3 - 0.2j), 0.3 + 0.2j
    rows = {r.j: r for r in chain_rule_cascade_check(F, JORDAN, eta, zeta)}
    z1 = eta[0] * cmath.exp(-zeta)
    z2 = cmath.exp(-2 * zeta) * (eta[1] - eta[0] ** 2 * zeta)
    without = (z2 * cmath.exp(-zeta)).conjugate()
    assert rows[0].residual <= 1e-8
    assert abs(rows[0].lhs - without) > 0.02
    assert rows[0].lhs == pytest.approx(
        without + (z1 * -2 * eta[0] * zeta * cmath.exp(-2 * zeta)).conjugate(), abs=1e-8)


def test_cascade_forward_direction():
    F = SampledFunction.from_polynomial(MixedPolynomial.variable(2, 1, Part.ANTI))
    rows = chain_rule_cascade_check(F, JORDAN, (0.3, 0.2), 0.2, direction=Direction.FORWARD)
    assert rows[0].lhs == pytest.approx(cmath.exp(0.4).conjugate(), abs=1e-8)


# -- verdicts -----------------------------------------------------------------

def test_decide_thresholds():
    assert decide(1e-9, 0.5) is Verdict.LEAFWISE_HOLOMORPHIC_NOT_GLOBAL
    assert decide(1e-9, 1e-9) is Verdict.HOLOMORPHIC
    assert decide(1e-9, 0.01) is Verdict.INCONSISTENT
    assert decide(1e-3, 0.5) is Verdict.INCONSISTENT


@pytest.mark.parametrize("spec", [
    CounterexampleSpec(Kind.FINITE_SMOOTH, k=1),
    CounterexampleSpec(Kind.FINITE_SMOOTH, k=3),
    CounterexampleSpec(Kind.NEGATIVE_RATIO, t=1),
    CounterexampleSpec(Kind.NEGATIVE_RATIO, t=2.5, alpha=2),
    CounterexampleSpec(Kind.NONREAL_RATIO),
    CounterexampleSpec(Kind.NONREAL_RATIO, alpha=1 + 1j, t=2),
], ids=lambda s: s.kind.value)
def test_counterexamples_are_leafwise_but_not_global(spec):
    rep = verify_case(spec)
    assert rep.verdict is Verdict.LEAFWISE_HOLOMORPHIC_NOT_GLOBAL
    assert rep.leafwise_residual_max <= LEAFWISE_TOL
    assert rep.dbar_witness.magnitude >= WITNESS_FLOOR
    assert decide(rep.leafwise_residual_max, rep.dbar_witness.magnitude) is rep.verdict


def test_holomorphic_function_verdict():
    rep = verify_function(fn(2, lambda z: z[0] * z[1] ** 2), JORDAN, [(0.5, 0.5)])
    assert rep.verdict is Verdict.HOLOMORPHIC
    assert rep.dbar_witness.magnitude <= HOLOMORPHIC_TOL


def test_non_leafwise_function_verdict():
    rep = verify_function(fn(2, lambda z: z[0].conjugate()), euler_field(2), [(0.5, 0.5)])
    assert rep.verdict is Verdict.INCONSISTENT


def test_report_json():
    rep = verify_case(CounterexampleSpec(Kind.FINITE_SMOOTH)).to_json()
    assert rep["verdict"] == "LeafwiseHolomorphicNotGlobal"
    assert rep["spec"]["kind"] == "finite-smooth"
    assert rep["thresholds"]["leafwise_tol"] == LEAFWISE_TOL
    assert "smoothness_probe" in rep


def test_branch_cut_samples_are_skipped_and_counted():
    # with t = 1 and |z| = |w| < 1 the base is a negative real number
    s = CounterexampleSpec(Kind.NONREAL_RATIO, b=2.5)
    counter = BranchCounter()
    f = build_counterexample(s, counter)
    with pytest.raises(SingularEvaluationError):
        f([0.5, 0.5])
    assert counter.skipped == 1
    rep = verify_case(s)
    # the stencil around the witness (0.5, 0.5) straddles the cut
    assert rep.skipped_samples >= 1 and rep.extras["branch_cut_evaluations"] >= 1
    assert rep.verdict is Verdict.LEAFWISE_HOLOMORPHIC_NOT_GLOBAL


def test_integer_b_has_no_branch_issue():
    f = build_counterexample(CounterexampleSpec(Kind.NONREAL_RATIO, b=3))
    assert np.isfinite(f([0.5, 0.5]))


def test_smoothness_probe_growth():
    probe = smoothness_probe(CounterexampleSpec(Kind.FINITE_SMOOTH, k=1))
    rows = probe["rows"]
    k1 = [r["order_k1_diagonal"] for r in rows]
    # order k+1 stays bounded, order k+2 grows roughly like 1/r
    assert max(k1) / min(k1) < 2
    assert probe["order_k2_growth"] > 0.5 * probe["radius_ratio"]
    assert smoothness_probe(CounterexampleSpec(Kind.NEGATIVE_RATIO)) == {}
