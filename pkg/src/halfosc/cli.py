"""Command line driver: read a JSON config, analyse, write a JSON report.

Usage::

    halfosc analyze config.json --criteria all --report out.json --csv out.csv

Exit codes: 0 success, 2 bad config, 3 a hypothesis of the equation fails
(the report is still written), 4 numeric failure or a cross-check
disagreement between the closed-form and numeric paths.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .canonical import check_noncanonical
from .criteria import (EvaluationOptions, Verdict, _clean, analyze, criterion_function, make_context)
from .errors import (ArgumentNotAdvanced, CanonicalOperator, ConfigError, HalfOscError, NegativeQ,
                     NonFiniteCriterionFunction, NonFiniteIntegrand, NonOddExponent, NonPositiveCoefficient,
                     NonPositiveT0, NotEulerType, SpecError, UndecidedTail, VanishingQ)
from .ids import PI1, PI1_POW_ALPHA, ONE, THEOREMS, CriterionId, RhoFunction
from .integrate import DEFAULT_POLICY
from .model import validate_spec

SCHEMA_VERSION = 1
HORIZON_ENV = "HALFOSC_HORIZON"

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERIC = 0, 2, 3, 4

# spec errors that mean "the equation is outside the theory", not "the file is malformed"
_HYPOTHESIS_ERRORS = (NonOddExponent, NonPositiveCoefficient, NegativeQ, VanishingQ, ArgumentNotAdvanced,
                      NonPositiveT0, CanonicalOperator, UndecidedTail)


@dataclass
class AnalysisConfig:
    """Parsed run configuration.  ``horizon`` of ``None`` means ``t0 * 1e8``."""

    equation: dict
    criteria: object = "all"
    horizon: float | None = None
    grid_ratio: float = DEFAULT_POLICY.grid_ratio
    tolerance: float = 1e-10
    margin: float = 0.01
    rho_choices: list = field(default_factory=lambda: [str(PI1_POW_ALPHA), str(PI1), str(ONE)])
    lambda_mu: list | None = None
    cross_check: bool = False
    report: str | None = None
    csv: str | None = None

    @classmethod
    def from_dict(cls, raw) -> "AnalysisConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "equation" not in raw:
            raise ConfigError("config needs an 'equation' object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - names - {"margins", "tol"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kw = {k: v for k, v in raw.items() if k in names}
        if "margins" in raw:
            kw.setdefault("margin", raw["margins"])
        if "tol" in raw:
            kw.setdefault("tolerance", raw["tol"])
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self):
        t0 = float(self.equation.get("t0", 1.0)) if isinstance(self.equation, dict) else 1.0
        if self.horizon is not None and not (math.isfinite(self.horizon) and self.horizon > 10 * t0):
            raise ConfigError(f"horizon {self.horizon} must exceed 10 * t0 = {10 * t0}")
        if not 1 < self.grid_ratio <= 2:
            raise ConfigError("grid_ratio must lie in (1, 2]")
        if not 0 < self.tolerance < 1e-2:
            raise ConfigError("tolerance must lie in (0, 1e-2)")
        if self.margin < 0:
            raise ConfigError("margin must be >= 0")
        if self.lambda_mu is not None and len(self.lambda_mu) != 2:
            raise ConfigError("lambda_mu must be a pair [lambda, mu]")
        self.criterion_ids()

    def rhos(self):
        return [RhoFunction.parse(r) for r in self.rho_choices]

    def criterion_ids(self) -> list[CriterionId]:
        """Expand ``"all"`` into every theorem, with one entry per rho choice."""
        crit = self.criteria
        if isinstance(crit, str):
            crit = [crit] if crit.strip().lower() == "all" else _split_ids(crit)
        ids = []
        for c in crit:
            if isinstance(c, str) and c.strip().lower() == "all":
                for name in THEOREMS:
                    if name in ("T2_10", "T2_12"):
                        ids.extend(CriterionId(name, rho=r) for r in self.rhos())
                    else:
                        ids.append(CriterionId(name))
            else:
                ids.append(CriterionId.parse(c))
        seen, out = set(), []
        for cid in ids:
            if str(cid) not in seen:
                seen.add(str(cid))
                out.append(cid)
        return out

    def options(self, t0: float, path: str = "auto") -> EvaluationOptions:
        policy = dataclasses.replace(DEFAULT_POLICY, grid_ratio=self.grid_ratio)
        lm = tuple(float(v) for v in self.lambda_mu) if self.lambda_mu is not None else None
        return EvaluationOptions(path=path, horizon=self.horizon, tol=self.tolerance, margin=self.margin,
                                 policy=policy, lambda_mu=lm)

    def echo(self):
        return _clean({
            "criteria": [str(c) for c in self.criterion_ids()],
            "horizon": self.horizon,
            "grid_ratio": self.grid_ratio,
            "tolerance": self.tolerance,
            "margin": self.margin,
            "rho_choices": [str(r) for r in self.rhos()],
            "lambda_mu": self.lambda_mu,
            "cross_check": self.cross_check,
        })


def _split_ids(text: str) -> list[str]:
    """Split ``"T2_1,T2_10(rho=pi1),E2_53(lambda=0.1,mu=0.2)"`` at top-level commas."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            if cur.strip():
                out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


@dataclass
class RunOutcome:
    report: dict
    exit_code: int
    message: str = ""


def _disagreements(primary, secondary) -> list[str]:
    """Satisfied against NotSatisfied between two paths, leaf by leaf."""
    clash = {Verdict.SATISFIED, Verdict.NOT_SATISFIED}
    other = {}
    for r in secondary.results:
        for leaf in r.leaves():
            other.setdefault(leaf.key, leaf.verdict)
    notes = []
    for r in primary.results:
        for leaf in r.leaves():
            v = other.get(leaf.key)
            if v is not None and {v, leaf.verdict} == clash:
                notes.append(f"{r.key}/{leaf.key}: closed form {leaf.verdict.value}, numeric {v.value}")
    return sorted(set(notes))


def run(config: AnalysisConfig) -> RunOutcome:
    """Validate, certify, evaluate, conclude.  Never raises for spec problems."""
    started = time.perf_counter()
    base = {"schema_version": SCHEMA_VERSION, "config": config.echo()}
    try:
        spec = validate_spec(config.equation)
        profile = check_noncanonical(spec)
        profile.require_certified()
    except _HYPOTHESIS_ERRORS as exc:
        base["error"] = {"kind": type(exc).__name__, "message": str(exc), "stage": "hypotheses"}
        return RunOutcome(base, EXIT_HYPOTHESIS, str(exc))
    except (SpecError, ConfigError) as exc:
        base["error"] = {"kind": type(exc).__name__, "message": str(exc), "stage": "config"}
        return RunOutcome(base, EXIT_CONFIG, str(exc))

    ids = config.criterion_ids()
    code, message = EXIT_OK, ""
    try:
        report = analyze(spec, ids, config.options(spec.t0), profile)
        notes = []
        if config.cross_check:
            notes.extend(_cross_check(spec, profile, ids, config, report))
            if any(n.startswith("disagreement") for n in notes):
                code, message = EXIT_NUMERIC, "closed-form and numeric verdicts disagree"
    except (NonFiniteIntegrand, NonFiniteCriterionFunction, ArithmeticError) as exc:
        base["error"] = {"kind": type(exc).__name__, "message": str(exc), "stage": "evaluation"}
        return RunOutcome(base, EXIT_NUMERIC, str(exc))

    report.discrepancy_notes = notes
    report.runtime = {"criteria_evaluated": len(ids), "results": len(report.results)}
    out = dict(base)
    out.update(report.to_dict())
    out["timestamp"] = {
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    out["_report"] = report
    return RunOutcome(out, code, message)


def _cross_check(spec, profile, ids, config, report) -> list[str]:
    from .euler import EulerSpec, reduction_crosscheck

    try:
        es = EulerSpec.from_spec(spec)
    except NotEulerType:
        return ["cross-check skipped: the equation is not of Euler type"]
    numeric = analyze(spec, ids, config.options(spec.t0, path="numeric"), profile)
    notes = [f"disagreement: {n}" for n in _disagreements(report, numeric)]
    notes.extend(f"reduction: {n}" for n in reduction_crosscheck(es))
    return notes


def write_report(path, report: dict):
    data = {k: v for k, v in report.items() if not k.startswith("_")}
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, spec, profile, report, options):
    """Rows ``criterion, t, value`` for every leaf with a criterion function."""
    ctx = make_context(spec, profile, options)
    seen = set()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", "t", "value"])
        for r in report.results:
            for leaf in r.leaves():
                if leaf.key in seen or not isinstance(leaf.id, CriterionId) or leaf.id.is_theorem:
                    continue
                seen.add(leaf.key)
                try:
                    out = criterion_function(ctx, leaf.id)
                except (HalfOscError, ArithmeticError, ValueError):
                    continue
                ts, vals = out[0], out[1]
                for t, v in zip(np.asarray(ts), np.asarray(vals)):
                    w.writerow([leaf.key, f"{t:.12g}", f"{v:.12g}"])


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def build_parser():
    p = argparse.ArgumentParser(prog="halfosc", description="Oscillation and property A checks for "
                                "third-order half-linear advanced equations.")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyse the equation described by a JSON config")
    a.add_argument("config", help="path to the JSON config")
    a.add_argument("--criteria", help="'all' or a comma separated list of criterion ids")
    a.add_argument("--horizon", type=float, help=f"absolute horizon (default t0*1e8, or ${HORIZON_ENV})")
    a.add_argument("--tol", type=float, help="relative tolerance")
    a.add_argument("--cross-check", action="store_true", help="run closed-form and numeric paths and compare")
    a.add_argument("--report", help="write the JSON report here (default: stdout)")
    a.add_argument("--csv", help="write criterion functions against t here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "equation" not in raw and "r1" in raw:
            raw = {"equation": raw}
        overrides = {"criteria": args.criteria, "tolerance": args.tol, "report": args.report, "csv": args.csv}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        if args.horizon is not None:
            raw["horizon"] = args.horizon
        elif "horizon" not in raw and os.environ.get(HORIZON_ENV):
            raw["horizon"] = float(os.environ[HORIZON_ENV])
        if args.cross_check:
            raw["cross_check"] = True
        config = AnalysisConfig.from_dict(raw)
    except (OSError, json.JSONDecodeError, ConfigError, SpecError, TypeError, ValueError) as exc:
        print(f"halfosc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outcome = run(config)
    report = outcome.report
    if config.report:
        write_report(config.report, report)
    else:
        json.dump({k: v for k, v in report.items() if not k.startswith("_")}, sys.stdout, indent=2,
                  sort_keys=True)
        sys.stdout.write("\n")
    if config.csv and "_report" in report:
        spec = validate_spec(config.equation)
        write_csv(config.csv, spec, check_noncanonical(spec), report["_report"], config.options(spec.t0))
    if outcome.exit_code:
        print(f"halfosc: {outcome.message}", file=sys.stderr)
    else:
        pa, osc = report["property_A"], report["oscillatory"]
        print(f"property A: {pa['verdict']} ({pa['granted_by']}); "
              f"oscillatory: {osc['verdict']} ({osc['granted_by']})", file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
