"""Verdict algebra, the extremal lemma, lambda/mu bounds and theorem plumbing."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfosc.canonical import check_noncanonical
from halfosc.criteria import (EvaluationOptions, REMARK_IMPLICATIONS, CriterionResult, Verdict, analyze,
                              combine_all, combine_any, conclude, criterion_function, evaluate_criterion,
                              lambda_mu_bounds, lambda_mu_feasible, lemma_2_4_max, lemma_2_4_objective)
from halfosc.errors import NonPositiveB
from halfosc.ids import CriterionId, all_theorem_ids
from halfosc.integrate import DEFAULT_POLICY, geometric_grid
from halfosc.model import validate_spec

from conftest import EX31, one_third

V = list(Verdict)


# -- verdict algebra -----------------------------------------------------------------

@pytest.mark.parametrize("vs", list(itertools.product(V, repeat=3)))
def test_combine_all_and_any(vs):
    all_v, any_v = combine_all(vs), combine_any(vs)
    if Verdict.NOT_SATISFIED in vs:
        assert all_v is Verdict.NOT_SATISFIED
    elif Verdict.INCONCLUSIVE in vs:
        assert all_v is Verdict.INCONCLUSIVE
    else:
        assert all_v is Verdict.SATISFIED
    if Verdict.SATISFIED in vs:
        assert any_v is Verdict.SATISFIED
    elif all(v is Verdict.NOT_SATISFIED for v in vs):
        assert any_v is Verdict.NOT_SATISFIED
    else:
        assert any_v is Verdict.INCONCLUSIVE


def test_combine_empty():
    assert combine_all([]) is Verdict.SATISFIED
    assert combine_any([]) is Verdict.INCONCLUSIVE


# -- extremal lemma ------------------------------------------------------------------

@pytest.mark.parametrize("A,B,C,alpha,u_star,peak", [
    (1, 1, 0, 1, 0.5, 0.25),
    (2, 1, 1, 1, 2.0, 3.0),
    (0, 2, 1.5, "1/3", 1.5, 0.0),
])
def test_lemma_known_cases(A, B, C, alpha, u_star, peak):
    u, g = lemma_2_4_max(A, B, C, alpha)
    assert u == pytest.approx(u_star, abs=1e-12)
    assert g == pytest.approx(peak, abs=1e-12)


def brute_force_max(A, B, C, alpha, centre):
    u = centre - 10 + 1e-4 * np.arange(200_001)
    return float(np.max(lemma_2_4_objective(u, A, B, C, alpha)))


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3), st.floats(-3, 3), st.sampled_from(["1/3", "1", "5/3", "3"]))
def test_lemma_matches_grid_search(A, B, C, alpha):
    u, g = lemma_2_4_max(A, B, C, alpha)
    assert abs(brute_force_max(A, B, C, alpha, u) - g) <= 1e-8
    assert lemma_2_4_objective(u, A, B, C, alpha) == pytest.approx(g, rel=1e-12, abs=1e-12)


def test_lemma_rejects_nonpositive_b():
    with pytest.raises(NonPositiveB):
        lemma_2_4_max(1, 0, 0, 1)


# -- lambda / mu bounds ---------------------------------------------------------------

def test_lambda_bound_matches_brute_force_scan(ex32):
    profile = check_noncanonical(ex32)
    t1, horizon = 1.0, 1e4
    lb, mb = lambda_mu_bounds(ex32, profile, t1, horizon)
    ts = geometric_grid(t1, horizon, DEFAULT_POLICY.grid_ratio)[1:]
    # m = 2, n = 1, delta = 2, q0 = 1: the bound is (t - t1)^3 / (2 t^3)
    assert lb == pytest.approx(np.min((ts - t1) ** 3 / (2 * ts ** 3)), rel=1e-6)
    assert mb > 0


def test_lambda_mu_feasibility(ex32):
    profile = check_noncanonical(ex32)
    lb, mb = lambda_mu_bounds(ex32, profile, 1.0, 1e4)
    assert lambda_mu_feasible(ex32, profile, (0.0, 0.0), 1.0, 1e4)
    assert lambda_mu_feasible(ex32, profile, (0.5 * lb, 0.0), 1.0, 1e4)
    assert not lambda_mu_feasible(ex32, profile, (2 * lb, 0.0), 1.0, 1e4)
    assert not lambda_mu_feasible(ex32, profile, (0.6, 0.6), 1.0, 1e4)


# -- remark implications ---------------------------------------------------------------

@pytest.mark.parametrize("premise,consequence", REMARK_IMPLICATIONS)
@pytest.mark.parametrize("before", [Verdict.INCONCLUSIVE, Verdict.NOT_SATISFIED])
def test_remark_grants_consequence(ex32, premise, consequence, before):
    results = [CriterionResult(CriterionId(premise), Verdict.SATISFIED),
               CriterionResult(CriterionId(consequence), before)]
    report = conclude(ex32, results)
    assert report.result(consequence).verdict is Verdict.SATISFIED
    assert any(premise in a for a in report.applied_remarks)


def test_remark_needs_satisfied_premise(ex32):
    results = [CriterionResult(CriterionId("E2_33"), Verdict.INCONCLUSIVE),
               CriterionResult(CriterionId("E2_29"), Verdict.INCONCLUSIVE)]
    report = conclude(ex32, results)
    assert report.result("E2_29").verdict is Verdict.INCONCLUSIVE
    assert report.applied_remarks == []


def test_remark_upgrades_theorem_tree(ex32):
    # T2_7 = E2_19 and E2_29; a Satisfied E2_33 elsewhere lifts its E2_29 leaf
    e219 = CriterionResult(CriterionId("E2_19"), Verdict.SATISFIED)
    e229 = CriterionResult(CriterionId("E2_29"), Verdict.INCONCLUSIVE)
    t27 = CriterionResult(CriterionId("T2_7"), Verdict.INCONCLUSIVE, parts=(("all", (e219,)), ("all", (e229,))))
    report = conclude(ex32, [t27, CriterionResult(CriterionId("E2_33"), Verdict.SATISFIED)])
    assert report.result("T2_7").verdict is Verdict.SATISFIED
    assert report.oscillatory["granted_by"] == "T2_7"
    assert report.property_a["verdict"] == "Satisfied"


@pytest.mark.parametrize("m,n,delta,q0", [(2, 1, 2, 3), (1.5, 0.6, 3, 2), (3, 2, 2, 6)])
def test_remark_on_worked_example_family(m, n, delta, q0):
    spec = one_third(m, n, delta, q0).to_spec()
    for path in ("euler", "numeric"):
        report = analyze(spec, ["E2_33", "E2_29", "E2_1", "E2_3"], EvaluationOptions(path=path))
        if report.result("E2_33").verdict is Verdict.SATISFIED:
            assert report.result("E2_29").verdict is Verdict.SATISFIED
        if report.result("E2_1").verdict is Verdict.SATISFIED:
            assert report.result("E2_3").verdict is Verdict.SATISFIED
    assert report.result("E2_33").verdict is Verdict.SATISFIED


# -- theorems --------------------------------------------------------------------------

@pytest.mark.parametrize("path", ["euler", "numeric"])
def test_t21_on_worked_examples(ex31, ex32, path):
    for spec in (ex31, ex32):
        res = evaluate_criterion(spec, check_noncanonical(spec), "T2_1", EvaluationOptions(path=path))
        assert res.verdict is Verdict.SATISFIED


def test_gamma_hypothesis_gives_not_applicable(ex31):
    report = analyze(ex31, ["T2_1", "T2_5"])
    res = report.result("T2_5")
    assert res.verdict is Verdict.INCONCLUSIVE and "not applicable" in res.notes
    assert report.property_a == {"verdict": "Satisfied", "granted_by": "T2_1"}


@pytest.mark.parametrize("corollary,rho", [("C2_2", "pi1^alpha"), ("C2_3", "pi1"), ("C2_4", "one")])
@pytest.mark.parametrize("params", [(2, 1, 2, 2), (1.5, 0.6, 3, 0.5), (3, 2, 1.5, 4)])
def test_corollaries_agree_with_general_rho(corollary, rho, params):
    spec = one_third(*params).to_spec()
    profile = check_noncanonical(spec)
    opts = EvaluationOptions(path="euler")
    a = evaluate_criterion(spec, profile, corollary, opts)
    b = evaluate_criterion(spec, profile, f"T2_10(rho={rho})", opts)
    assert a.verdict is b.verdict


@pytest.mark.parametrize("component,rho", [("E2_42", "pi1^alpha"), ("E2_43", "pi1"), ("E2_44", "one")])
def test_fixed_rho_components_match_general(ex32, component, rho):
    profile = check_noncanonical(ex32)
    _, a = criterion_function(ex32, component, profile)[:2]
    _, b = criterion_function(ex32, f"E2_35(rho={rho})", profile)[:2]
    np.testing.assert_allclose(a, b, rtol=1e-12)


def random_numeric_spec(rng):
    """Power-law sums, so the closed-form path does not apply."""
    m, n = rng.uniform(1.8, 3.5), rng.uniform(0.6, 2.5)
    delta, q0 = rng.uniform(1.05, 3), rng.uniform(0.1, 4)
    return validate_spec({
        "r1": {"kind": "sum", "terms": [[1.0, m], [rng.uniform(0, 2), m - 0.5]]},
        "r2": {"kind": "powerlaw", "coef": 1.0, "exp": n},
        "q": {"kind": "sum", "terms": [[q0, m / 3 + n - 5 / 3], [rng.uniform(0, 1), m / 3 + n - 2]]},
        "sigma": {"kind": "proportional", "delta": delta},
        "alpha": "1", "beta": "1/3", "gamma": "1/3", "t0": 1.0,
    })


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_numeric_path_never_refutes(seed, euler_shape):
    rng = np.random.default_rng(seed)
    if euler_shape:
        spec = one_third(rng.uniform(1.1, 4), rng.uniform(0.4, 3), rng.uniform(1.05, 4), rng.uniform(0.1, 4)).to_spec()
    else:
        spec = random_numeric_spec(rng)
    report = analyze(spec, all_theorem_ids(), EvaluationOptions(path="numeric"))
    for r in report.results:
        for leaf in r.leaves():
            assert leaf.verdict is not Verdict.NOT_SATISFIED, leaf.key
            assert leaf.path in ("numeric", "none")


def test_analysis_is_deterministic():
    spec = validate_spec(EX31)
    a = analyze(spec, all_theorem_ids()).to_dict()
    b = analyze(spec, all_theorem_ids()).to_dict()
    assert a == b
