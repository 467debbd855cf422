"""Numerical checks of oscillation and property A criteria for third-order
half-linear differential equations with an advanced argument and a
noncanonical operator.

Typical use::

    from halfosc import validate_spec, analyze, all_theorem_ids
    spec = validate_spec({...})
    report = analyze(spec, all_theorem_ids())
    report.property_a, report.oscillatory
"""

from .canonical import CanonicalProfile, check_noncanonical
from .criteria import (AnalysisReport, CriterionResult, EvaluationOptions, Verdict, analyze, conclude,
                       evaluate_criterion, kernel_J, kernel_Q, kernel_R2Q, kernel_window, lemma_2_4_max)
from .euler import EulerSpec, euler_kernel_closed_form, euler_reduce
from .ids import CriterionId, RhoFunction, all_theorem_ids
from .integrate import integrate, integrate_to_infinity, judge_tail
from .model import AdvancedArgument, CoefficientFunction, EquationSpec, OddRational, validate_spec
from .probe import PowerLawY, check_lemma_monotonicities, classify, manufacture, soundness_check

__version__ = "0.1.0"

__all__ = [
    "AdvancedArgument", "AnalysisReport", "CanonicalProfile", "CoefficientFunction", "CriterionId",
    "CriterionResult", "EquationSpec", "EulerSpec", "EvaluationOptions", "OddRational", "PowerLawY",
    "RhoFunction", "Verdict", "all_theorem_ids", "analyze", "check_lemma_monotonicities", "check_noncanonical",
    "classify", "conclude", "euler_kernel_closed_form", "euler_reduce", "evaluate_criterion", "integrate",
    "integrate_to_infinity", "judge_tail", "kernel_J", "kernel_Q", "kernel_R2Q", "kernel_window",
    "lemma_2_4_max", "manufacture", "soundness_check", "validate_spec",
]
