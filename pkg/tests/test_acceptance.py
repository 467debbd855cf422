"""Acceptance suite: one test per acceptance criterion, each printing PASS or FAIL.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are
repeated in the terminal summary.  Two criteria cannot be met as stated and
are marked ``xfail(strict=True)``: they print FAIL with the measured numbers
and turn into a failure if they ever start passing.
"""

import json
import math
import time
from collections import Counter

import numpy as np
import pytest

from halfosc import reference_reductions as ref
from halfosc.canonical import check_noncanonical
from halfosc.cli import AnalysisConfig, main, run
from halfosc.criteria import (EvaluationOptions, CriterionResult, Verdict, _chain, analyze, conclude,
                              evaluate_criterion, kernel_J, kernel_Q, kernel_R2Q, kernel_window, lemma_2_4_max,
                              lemma_2_4_objective)
from halfosc.errors import HypothesisNotVerified
from halfosc.euler import euler_kernel_closed_form, euler_reduce, reduction_crosscheck
from halfosc.ids import CriterionId, all_theorem_ids
from halfosc.model import validate_spec
from halfosc.probe import (SignClass, check_lemma_monotonicities, classify, random_manufactured,
                           soundness_check)

from conftest import EX31, one_third, random_euler

#: criterion number -> summary line; printed again by the terminal summary hook
LINES = {}


def record(n, ok, detail):
    line = f"acceptance {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    LINES[n] = line
    print(line)
    return ok


def sample_one_third(rng):
    """Worked-example family parameters: m > 1, n > 1/3, delta > 1."""
    return one_third(rng.uniform(1.05, 5.0), rng.uniform(0.35, 3.0), rng.uniform(1.01, 4.0), rng.uniform(0.1, 3.0))


# -- 1 ---------------------------------------------------------------------------------

def j_slope(spec):
    lo, hi = kernel_J(spec, 1.0, 10.0), kernel_J(spec, 1.0, 100.0)
    return math.log(hi / lo) / math.log(10.0)


def test_acceptance_1_property_a_and_runtime():
    started = time.perf_counter()
    out = run(AnalysisConfig.from_dict({"equation": EX31}))
    elapsed = time.perf_counter() - started
    prop = out.report["property_A"]
    ok = out.exit_code == 0 and prop == {"verdict": "Satisfied", "granted_by": "T2_1"} and elapsed < 10
    slope = j_slope(validate_spec(EX31))
    record("1", ok and abs(slope - 15) <= 0.1,
           f"property A {prop['verdict']} via {prop['granted_by']}, runtime {elapsed:.2f} s; "
           f"J log-log slope on [10, 100] is {slope:.4f} (stated 15 +- 0.1, exponent count gives 16)")
    assert ok


@pytest.mark.xfail(strict=True, reason="J grows like t^16 for this equation; 15 is the exponent of J'")
def test_acceptance_1_slope():
    spec = validate_spec(EX31)
    slope = j_slope(spec)
    # independent exponent count: Q ~ t^7, R2Q ~ t^(4*7+1), J' ~ t^(25*3/5), J ~ t^16
    assert abs(slope - 16) < 0.1
    assert abs(slope - 15) <= 0.1


# -- 2 ---------------------------------------------------------------------------------

def test_acceptance_2_worked_reductions():
    rng = np.random.default_rng(2)
    worst = {"E2_23": 0.0, "E2_28": 0.0, "E2_33": 0.0, "arbiter": 0.0}
    notes = []
    for _ in range(20):
        es = sample_one_third(rng)
        for name, formula, norm in (("E2_23", ref.limsup_condition, ref.limsup_normalizer),
                                    ("E2_28", ref.window_condition, ref.window_normalizer)):
            ours = euler_reduce(es, name)
            lhs, rhs = formula(es.m, es.n, es.delta, es.q0)
            s = norm(es.m, es.n)
            worst[name] = max(worst[name], abs(ours.lhs * s - lhs) / abs(lhs), abs(ours.rhs * s - rhs) / abs(rhs))
        notes += reduction_crosscheck(es, rtol=1e-6)
        lhs, rhs = ref.local_window_condition(es.m, es.n, es.delta, es.q0)
        ours = euler_reduce(es, "E2_33")
        s = ref.local_window_normalizer(es.m, es.n)
        worst["E2_33"] = max(worst["E2_33"], abs(ours.lhs * s - lhs) / abs(lhs))
        spec = es.to_spec()
        closed = euler_kernel_closed_form(es, "E2_33").evaluate(10.0)
        worst["arbiter"] = max(worst["arbiter"], abs(closed / kernel_window(spec, 10.0, "E2_33") - 1))
    ok = (worst["E2_23"] <= 1e-9 and worst["E2_28"] <= 1e-9 and worst["E2_33"] <= 1e-6
          and worst["arbiter"] <= 1e-4 and not notes)
    record("2", ok, "max relative gaps: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f"; discrepancy notes: {len(notes)}")
    assert ok, notes


# -- 3 ---------------------------------------------------------------------------------

def test_acceptance_3_t27_not_satisfied():
    rng = np.random.default_rng(3)
    verdicts = Counter()
    for _ in range(10):
        spec = sample_one_third(rng).to_spec()
        res = evaluate_criterion(spec, check_noncanonical(spec), "T2_7", EvaluationOptions(path="euler"))
        verdicts[(res.verdict.value, res.path)] += 1
    ok = set(verdicts) == {("NotSatisfied", "euler")}
    record("3", ok, f"T2_7 on 10 worked-example specs: {dict(verdicts)}")
    assert ok


# -- 4 ---------------------------------------------------------------------------------

def test_acceptance_4_kernel_oracles():
    rng = np.random.default_rng(4)
    started = time.perf_counter()
    worst, where = 0.0, ""
    kernels = (("Q", kernel_Q), ("R2Q", kernel_R2Q), ("J", kernel_J))
    for _ in range(50):
        es = one_third(rng.uniform(1.05, 5), rng.uniform(0.35, 5), rng.uniform(1.01, 3), rng.uniform(0.05, 10))
        spec = es.to_spec()
        for t in (10.0, 100.0):
            pairs = [(name, fn(spec, 1.0, t), euler_kernel_closed_form(es, name).evaluate(t)) for name, fn in kernels]
            pairs += [(v, kernel_window(spec, t, v), euler_kernel_closed_form(es, v).evaluate(t))
                      for v in ("E2_28", "E2_29", "E2_33")]
            for name, num, closed in pairs:
                gap = abs(num - closed) / abs(closed)
                if gap > worst:
                    worst, where = gap, f"{name} at t={t:g}"
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-6 and elapsed < 60
    record("4", ok, f"50 specs x 6 kernels x 2 points: worst relative gap {worst:.1e} ({where}), {elapsed:.1f} s")
    assert ok


# -- 5 ---------------------------------------------------------------------------------

def test_acceptance_5_lemma_brute_force():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        A, B, C = rng.uniform(-3, 3), rng.uniform(0.2, 3), rng.uniform(-3, 3)
        alpha = rng.choice(["1/3", "1", "5/3", "3"])
        u_star, peak = lemma_2_4_max(A, B, C, alpha)
        grid = u_star - 10 + 1e-4 * np.arange(200_001)
        worst = max(worst, abs(float(np.max(lemma_2_4_objective(grid, A, B, C, alpha))) - peak))
    ok = worst <= 1e-8
    record("5", ok, f"100 cases, worst |grid max - closed-form max| = {worst:.1e}")
    assert ok


# -- 6 ---------------------------------------------------------------------------------

def test_acceptance_6_homogeneity():
    specs = [validate_spec(EX31), one_third().to_spec(), random_euler(np.random.default_rng(6)).to_spec()]
    worst = 0.0
    for spec in specs:
        ia, ib = 1 / float(spec.alpha), 1 / float(spec.beta)
        for c in (2.0, 8.0):
            scaled = spec.with_q(spec.q.scaled(c))
            t = 20.0
            checks = [(kernel_Q(scaled, 1.0, t), c * kernel_Q(spec, 1.0, t)),
                      (kernel_R2Q(scaled, 1.0, t), c ** ib * kernel_R2Q(spec, 1.0, t)),
                      (kernel_J(scaled, 1.0, t), c ** (ia * ib) * kernel_J(spec, 1.0, t))]
            checks += [(kernel_window(scaled, t, v), c ** (ia * ib) * kernel_window(spec, t, v))
                       for v in ("E2_28", "E2_29", "E2_33")]
            worst = max(worst, max(abs(a / b - 1) for a, b in checks))
    ok = worst <= 1e-6
    record("6", ok, f"3 specs x c in {{2, 8}} x 6 kernels: worst relative gap {worst:.1e}")
    assert ok


# -- 7 ---------------------------------------------------------------------------------

WINDOWS = ("E2_28", "E2_29", "E2_33")


@pytest.fixture(scope="module")
def manufactured_corpus():
    """200 equations with a known positive decaying solution, analysed once."""
    rng = np.random.default_rng(7)
    corpus = []
    for _ in range(200):
        sol = random_manufactured(rng)
        report = analyze(sol.spec, all_theorem_ids())
        corpus.append((sol, report, soundness_check(sol, report)))
    return corpus


def granting_windows(report):
    """Window leaves Satisfied inside the theorem that granted oscillation."""
    res = report.result(report.oscillatory["granted_by"])
    return {leaf.key for leaf in res.leaves() if leaf.key in WINDOWS and leaf.verdict is Verdict.SATISFIED}


def test_acceptance_7_lemma_checks(manufactured_corpus):
    counts, failed = Counter(), []
    for sol, _, _ in manufactured_corpus:
        try:
            lr = check_lemma_monotonicities(sol)
        except HypothesisNotVerified:
            counts["not S1/S2"] += 1
            continue
        for c in lr.verified:
            counts["passed" if c.passed else "failed"] += 1
            if not c.passed:
                failed.append((sol.spec.to_dict(), c))
    LINES["7-lemmas"] = f"lemma checks: {counts['passed']} passed, {counts['failed']} failed"
    assert not failed, failed[:3]
    assert counts["passed"] > 50


@pytest.mark.xfail(strict=True, reason="the window-type oscillation tests admit positive solutions; "
                                       "see test_acceptance_7_contradictions_are_window_tests")
def test_acceptance_7_no_contradictions(manufactured_corpus):
    bad = [(sol, rep) for sol, rep, sr in manufactured_corpus if not sr.ok]
    by_class = Counter(classify(sol).value for sol, _ in bad)
    by_theorem = Counter(rep.oscillatory["granted_by"] for _, rep in bad)
    lemma_line = LINES.get("7-lemmas", "")
    record("7", not bad, f"{len(bad)} CONTRADICTION findings in {len(manufactured_corpus)} specs "
           f"(by class {dict(by_class)}, granted by {dict(by_theorem)}); {lemma_line}")
    assert not bad


def test_acceptance_7_contradictions_are_window_tests(manufactured_corpus):
    """Every contradiction goes through a window test, and on S1 the solution
    satisfies the first-order inequality the window test is built on."""
    bad = [(sol, rep) for sol, rep, sr in manufactured_corpus if not sr.ok]
    assert bad, "no contradictions: the xfail above should now pass"
    ts = np.geomspace(10.0, 1e8, 15)
    for sol, rep in bad:
        cls = classify(sol)
        assert cls in (SignClass.S1, SignClass.S2)
        windows = granting_windows(rep)
        assert windows, rep.oscillatory
        if cls is SignClass.S1:
            assert "E2_28" in windows
            spec = sol.spec
            P = _chain(spec, spec.t0, ts)["J'"]
            dy = -sol.y_form.k * sol.y_form.amplitude * ts ** (-sol.y_form.k - 1)
            assert np.all(dy + P * sol.y(spec.sigma(ts)) <= 0)
            # P = J' and its integral over [t, sigma(t)] is the E2_28 window
            assert kernel_window(spec, ts[-1], "E2_28") > math.exp(-1)


# -- 8 ---------------------------------------------------------------------------------

def test_acceptance_8_remark_implications():
    spec = one_third().to_spec()
    unit_ok = True
    for premise, consequence in (("E2_33", "E2_29"), ("E2_1", "E2_3")):
        for before in (Verdict.INCONCLUSIVE, Verdict.NOT_SATISFIED):
            rep = conclude(spec, [CriterionResult(CriterionId(premise), Verdict.SATISFIED),
                                  CriterionResult(CriterionId(consequence), before)])
            unit_ok &= rep.result(consequence).verdict is Verdict.SATISFIED
    rng = np.random.default_rng(8)
    checked = 0
    integ_ok = True
    while checked < 10:
        es = sample_one_third(rng)
        lhs, rhs = ref.local_window_condition(es.m, es.n, es.delta, es.q0)
        if not lhs > rhs:
            continue
        checked += 1
        for path in ("euler", "numeric"):
            rep = analyze(es.to_spec(), ["E2_33", "E2_29", "E2_1", "E2_3"], EvaluationOptions(path=path))
            if rep.result("E2_33").verdict is Verdict.SATISFIED:
                integ_ok &= rep.result("E2_29").verdict is Verdict.SATISFIED
            if rep.result("E2_1").verdict is Verdict.SATISFIED:
                integ_ok &= rep.result("E2_3").verdict is Verdict.SATISFIED
            if path == "euler":
                integ_ok &= rep.result("E2_33").verdict is Verdict.SATISFIED
    ok = bool(unit_ok and integ_ok)
    record("8", ok, f"implication unit checks {'ok' if unit_ok else 'broken'}; "
           f"{checked} worked-example specs satisfying the explicit local-window inequality "
           f"{'all grant E2_29 and E2_3' if integ_ok else 'miss a grant'}")
    assert ok


# -- 9 ---------------------------------------------------------------------------------

def test_acceptance_9_determinism_and_asymmetry(tmp_path):
    identical = True
    for i, eq in enumerate((EX31, one_third(2, 1, 2, 2).to_spec().to_dict())):
        cfg = tmp_path / f"c{i}.json"
        cfg.write_text(json.dumps({"equation": eq}))
        outs = []
        for j in range(2):
            out = tmp_path / f"r{i}{j}.json"
            assert main(["analyze", str(cfg), "--report", str(out)]) == 0
            data = json.loads(out.read_text())
            data.pop("timestamp")
            outs.append(json.dumps(data, indent=2, sort_keys=True).encode())
        identical &= outs[0] == outs[1]
    rng = np.random.default_rng(9)
    refutations, leaves = [], 0
    for i in range(30):
        spec = random_manufactured(rng).spec if i % 2 else sample_one_third(rng).to_spec()
        rep = analyze(spec, all_theorem_ids(), EvaluationOptions(path="numeric"))
        for r in rep.results:
            for leaf in r.leaves():
                leaves += 1
                if leaf.verdict is Verdict.NOT_SATISFIED:
                    refutations.append(leaf.key)
    ok = identical and not refutations
    record("9", ok, f"repeated reports {'byte-identical' if identical else 'differ'} apart from the timestamp; "
           f"numeric path: {len(refutations)} NotSatisfied among {leaves} leaves on 30 fuzzed specs")
    assert ok
