"""A positive solution that the window-type oscillation test misses.

y = 1/t solves (t^3 (t^3 y')')' + 6 t^3 y(2t) = 0.  The window integral over
[t, 2t] tends to (3/4) ln 2 ~ 0.52 > 1/e, so T2_5 reports Satisfied even
though y is a nonoscillatory solution with y' < 0.  The 1/e threshold belongs
to delayed first-order inequalities; with an advanced argument it does not
force oscillation.

Run with ``python3 demos/window_counterexample.py``.
"""

import math

import numpy as np

from halfosc.criteria import analyze, kernel_window
from halfosc.model import AdvancedArgument, CoefficientFunction, EquationSpec, OddRational
from halfosc.probe import PowerLawY, classify, manufacture, soundness_check


def main():
    base = EquationSpec(CoefficientFunction.power_law(1.0, 3), CoefficientFunction.power_law(1.0, 3),
                        CoefficientFunction.power_law(1.0, 0.0), AdvancedArgument.proportional(2.0),
                        OddRational.parse(1), OddRational.parse(1), OddRational.parse(1))
    sol = manufacture(base, PowerLawY(1.0))
    ts = np.geomspace(1.0, 1e4, 5)
    print("induced q(t)/t^3:", np.round(sol.spec.q(ts) / ts ** 3, 12))
    print("max |residual|  :", float(np.max(np.abs(sol.residual(ts)))))
    print("sign class      :", classify(sol).value)
    for t in (10.0, 1e3, 1e6):
        print(f"window at t={t:g}: {kernel_window(sol.spec, t, 'E2_28'):.6f}  (1/e = {math.exp(-1):.6f})")
    report = analyze(sol.spec, ["T2_5"])
    print("T2_5 verdict    :", report.result("T2_5").verdict.value)
    for finding in soundness_check(sol, report).contradictions:
        print("finding         :", finding.kind, "-", finding.detail)


if __name__ == "__main__":
    main()
