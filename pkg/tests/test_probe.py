"""Manufactured solutions, the sign classifier and the lemma checks."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfosc.criteria import analyze
from halfosc.errors import HypothesisNotVerified, ManufactureError, NegativeInducedQ, NonDecreasingY
from halfosc.model import AdvancedArgument, CoefficientFunction, EquationSpec, OddRational, signed_power
from halfosc.probe import (SIGN_TABLE, Finding, PowerLawY, SignClass, SoundnessReport, check_lemma_monotonicities,
                           classify, manufacture, random_manufactured, sign_pattern, soundness_check)


def base(m, n, alpha=1, beta=1, gamma=1, sigma=None):
    return EquationSpec(CoefficientFunction.power_law(1.0, m), CoefficientFunction.power_law(1.0, n),
                        CoefficientFunction.power_law(1.0, 0.0), sigma or AdvancedArgument.proportional(2.0),
                        OddRational.parse(alpha), OddRational.parse(beta), OddRational.parse(gamma))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_residual_vanishes(seed):
    sol = random_manufactured(np.random.default_rng(seed))
    t = np.geomspace(1, 1e4, 40)
    scale = np.abs(sol.L3(t))
    assert np.all(np.abs(sol.residual(t)) <= 1e-12 * scale)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.5, 50))
def test_quasi_derivatives_by_finite_differences(seed, t):
    sol = random_manufactured(np.random.default_rng(seed))
    s = sol.spec
    h = 1e-6 * t

    def d(f):
        return (f(t + h) - f(t - h)) / (2 * h)

    assert sol.L1(t) == pytest.approx(s.r1(t) * signed_power(d(sol.y), s.alpha), rel=1e-4)
    assert sol.L2(t) == pytest.approx(s.r2(t) * signed_power(d(sol.L1), s.beta), rel=1e-4)
    assert sol.L3(t) == pytest.approx(d(sol.L2), rel=1e-4)


def test_constant_first_quasi_derivative_rejected():
    # r1 = t^2, y = 1/t: L1 y = -1, so L2 y vanishes
    with pytest.raises(NonDecreasingY):
        manufacture(base(2, 2), PowerLawY(1.0))


def test_increasing_solution_needs_negative_q():
    with pytest.raises(NegativeInducedQ):
        manufacture(base(3, 3), PowerLawY(-1.0))
    assert issubclass(NegativeInducedQ, ManufactureError)


def test_inverse_t_with_cubic_coefficients_is_s1():
    sol = manufacture(base(3, 3), PowerLawY(1.0))
    assert sign_pattern(sol, 5.0) == (1, -1, -1, -1)
    assert classify(sol) is SignClass.S1
    # L3 y = -3 t^2 and y(2t) = 1/(2t), so q = 6 t^3
    assert float(sol.spec.q(2.0)) == pytest.approx(48.0)


def test_s2_example():
    # r1 = t^2, r2 = t^1.5, y = t^-2: L1 = -2/t, L2 = 2 t^-0.5, L3 = -t^-1.5
    sol = manufacture(base(2, 1.5), PowerLawY(2.0))
    assert sign_pattern(sol, 10.0) == (1, -1, 1, -1)
    assert classify(sol) is SignClass.S2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_classifier_is_total_and_faithful(seed):
    sol = random_manufactured(np.random.default_rng(seed))
    cls = classify(sol)
    assert isinstance(cls, SignClass)
    pattern = sign_pattern(sol, 1e3)
    if cls is not SignClass.MIXED:
        assert SIGN_TABLE[pattern] is cls


def test_lemma_checks_need_s1_or_s2():
    sol = manufacture(base(3, 3), PowerLawY(1.0))
    report = check_lemma_monotonicities(sol)
    assert report.sign_class is SignClass.S1
    assert report.ok and report.verified


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lemma_checks_pass_on_random_solutions(seed):
    sol = random_manufactured(np.random.default_rng(seed))
    try:
        report = check_lemma_monotonicities(sol)
    except HypothesisNotVerified:
        return
    assert report.ok, report.checks


def test_soundness_semantics():
    sol = manufacture(base(3, 3), PowerLawY(1.0))

    class Fake:
        oscillatory = {"verdict": "Satisfied", "granted_by": "T2_5"}
        property_a = {"verdict": "Satisfied", "granted_by": "T2_5"}

    out = soundness_check(sol, Fake())
    assert not out.ok and len(out.contradictions) == 1
    assert any(f.kind == "CONSISTENT" for f in out.findings)

    Fake.oscillatory = {"verdict": "Inconclusive", "granted_by": None}
    assert soundness_check(sol, Fake()).ok
    assert SoundnessReport((Finding("CONTRADICTION", "x"),)).contradictions


def test_property_a_on_manufactured_solution_is_consistent():
    sol = manufacture(base(3, 3), PowerLawY(1.0))
    report = analyze(sol.spec, ["T2_1", "T2_3"])
    assert report.property_a["verdict"] == "Satisfied"
    assert soundness_check(sol, report).ok


def test_window_oscillation_test_contradicted_by_inverse_t():
    # y = 1/t solves (t^3 (t^3 y')')' + 6 t^3 y(2t) = 0, yet the window over
    # [t, 2t] tends to (3/4) ln 2 > 1/e, so T2_5 claims oscillation
    sol = manufacture(base(3, 3), PowerLawY(1.0))
    assert float(sol.spec.q(1.0)) == pytest.approx(6.0)
    report = analyze(sol.spec, ["T2_5"])
    t25 = report.result("T2_5")
    window = next(leaf for leaf in t25.leaves() if leaf.key == "E2_28")
    assert window.evidence.lhs == pytest.approx(0.75 * np.log(2), rel=1e-12)
    out = soundness_check(sol, report)
    assert len(out.contradictions) == 1 and "T2_5" in out.contradictions[0].detail


def test_shift_argument_builds_expression_q():
    sol = manufacture(base(3, 3, sigma=AdvancedArgument.shift(1.5)), PowerLawY(1.0))
    t = np.geomspace(1, 100, 10)
    assert np.all(np.abs(sol.residual(t)) <= 1e-12 * np.abs(sol.L3(t)))
