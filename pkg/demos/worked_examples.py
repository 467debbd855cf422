"""Analyse the two worked power-law equations and the one-third family.

Run with ``python3 demos/worked_examples.py``.
"""

from halfosc.canonical import check_noncanonical
from halfosc.criteria import EvaluationOptions, analyze, evaluate_criterion, kernel_J
from halfosc.euler import EulerSpec, euler_reduce
from halfosc.ids import all_theorem_ids
from halfosc.model import validate_spec

EX31 = {
    "r1": {"kind": "powerlaw", "coef": 1.0, "exp": 4.0},
    "r2": {"kind": "powerlaw", "coef": 1.0, "exp": 3.0},
    "q": {"kind": "powerlaw", "coef": 1.0, "exp": 6.0},
    "sigma": {"kind": "proportional", "delta": 2.0},
    "alpha": "5/3", "beta": "1/7", "gamma": "9/5", "t0": 1.0,
}


def main():
    spec = validate_spec(EX31)
    report = analyze(spec, all_theorem_ids())
    print("r1 = t^4, r2 = t^3, q = t^6, sigma = 2t, alpha = 5/3, beta = 1/7, gamma = 9/5")
    print("  property A:", report.property_a)
    for t in (10.0, 100.0):
        print(f"  J(1, {t:g}) = {kernel_J(spec, 1.0, t):.6e}")

    print("\none-third family r1 = t^m, r2 = t^n, beta = gamma = 1/3")
    for m, n, delta, q0 in [(2, 1, 2, 1), (2, 1, 2, 3), (3, 2, 2, 6)]:
        es = EulerSpec.one_third_family(m, n, delta, q0)
        spec = es.to_spec()
        profile = check_noncanonical(spec)
        line = []
        for name in ("E2_23", "E2_28", "E2_33"):
            red = euler_reduce(es, name)
            line.append(f"{name} {red.lhs:.4f} vs {red.rhs:.4f}")
        t27 = evaluate_criterion(spec, profile, "T2_7", EvaluationOptions(path="euler"))
        line.append(f"T2_7 {t27.verdict.value}")
        print(f"  m={m} n={n} delta={delta} q0={q0}: " + "; ".join(line))


if __name__ == "__main__":
    main()
