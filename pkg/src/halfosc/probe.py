"""Manufactured exact solutions and the sign-class oracle.

Choosing ``y(t) = A t^(-k)`` and power-law ``r1 = c1 t^m``, ``r2 = c2 t^n``
makes every quasi-derivative a power law,

    L1 y = r1 (y')^alpha,  L2 y = r2 ((L1 y)')^beta,  L3 y = (L2 y)',

so the equation holds exactly with ``q = -L3 y / y^gamma(sigma)``.  Such
equations have a positive solution by construction, which gives a hard
soundness test: no criterion may ever declare them oscillatory, and a
property-A claim must be matched by ``y -> 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalProfile, check_noncanonical
from .criteria import EvaluationOptions, Verdict, evaluate_criterion, lambda_mu_feasible
from .errors import HypothesisNotVerified, ManufactureError, NegativeInducedQ, NonDecreasingY, SpecError
from .model import (AdvancedArgument, CoefficientFunction, EquationSpec, ExpressionArgument, OddRational,
                    Proportional, Shift, signed_power, validate_spec)


class SignClass(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    MIXED = "Mixed"


#: signs of (y, L1 y, L2 y, L3 y) for each class
SIGN_TABLE = {
    (1, -1, -1, -1): SignClass.S1,
    (1, -1, 1, -1): SignClass.S2,
    (1, 1, 1, -1): SignClass.S3,
    (1, 1, -1, -1): SignClass.S4,
}


@dataclass(frozen=True)
class PowerLawY:
    """``y(t) = amplitude * t^(-k)``; ``k < 0`` gives an increasing y."""

    k: float
    amplitude: float = 1.0


def _sigma_text(sigma: AdvancedArgument) -> str:
    form = sigma.form
    if isinstance(form, Proportional):
        return f"({form.delta!r}*t)"
    if isinstance(form, Shift):
        return f"(t+{form.c!r})"
    if isinstance(form, ExpressionArgument):
        return f"({form.expr.body})"
    raise ManufactureError(f"unsupported argument {form!r}")


@dataclass(frozen=True)
class ManufacturedSolution:
    """An exact positive solution together with its equation."""

    spec: EquationSpec
    y_form: PowerLawY
    c1: float
    m: float
    c2: float
    n: float
    l1_coef: float
    e1: float
    l2_coef: float
    e2: float

    def y(self, t):
        return self.y_form.amplitude * np.asarray(t, dtype=float) ** -self.y_form.k

    def L1(self, t):
        return self.l1_coef * np.asarray(t, dtype=float) ** self.e1

    def L2(self, t):
        return self.l2_coef * np.asarray(t, dtype=float) ** self.e2

    def L3(self, t):
        return self.l2_coef * self.e2 * np.asarray(t, dtype=float) ** (self.e2 - 1)

    @property
    def induced_q(self) -> CoefficientFunction:
        return self.spec.q

    def residual(self, t):
        """``L3 y + q y^gamma(sigma)``; zero up to rounding."""
        s = self.spec
        return self.L3(t) + np.asarray(s.q(t)) * signed_power(self.y(s.sigma(t)), s.gamma)

    @property
    def decays(self) -> bool:
        return self.y_form.k > 0


def _as_setup(spec_or_setup):
    s = spec_or_setup
    r1, r2 = s.r1.monomial, s.r2.monomial
    if r1 is None or r2 is None:
        raise ManufactureError("manufactured solutions need single power-law r1 and r2")
    return s, r1, r2


def manufacture(spec_without_q, y_form, *, validate: bool = True) -> ManufacturedSolution:
    """Build the equation solved exactly by ``y_form``.

    ``spec_without_q`` is any :class:`EquationSpec` (its q is replaced).
    Raises :class:`NonDecreasingY` when a quasi-derivative vanishes
    identically (the sign classes need strict signs) and
    :class:`NegativeInducedQ` when the induced q would be negative.
    """
    if not isinstance(y_form, PowerLawY):
        y_form = PowerLawY(float(y_form))
    s, (c1, m), (c2, n) = _as_setup(spec_without_q)
    k, A = float(y_form.k), float(y_form.amplitude)
    if not A > 0:
        raise ManufactureError("y must be positive")
    a, b, g = s.alpha, s.beta, s.gamma
    l1 = c1 * signed_power(-k * A, a)
    e1 = m + float(a) * (-k - 1)
    if l1 == 0 or e1 == 0:
        raise NonDecreasingY("L1 y is constant, so L2 y vanishes identically")
    l2 = c2 * signed_power(l1 * e1, b)
    e2 = n + float(b) * (e1 - 1)
    if e2 == 0:
        raise NonDecreasingY("L2 y is constant, so L3 y and q vanish identically")
    l3 = l2 * e2
    if l3 > 0:
        raise NegativeInducedQ(f"L3 y > 0 would need q < 0 (y = t^{-k:g})")
    kg = k * float(g)
    coef = -l3 / signed_power(A, g)
    form = s.sigma.form
    if isinstance(form, Proportional):
        q = CoefficientFunction.power_law(coef * form.delta ** kg, e2 - 1 + kg, s.t0)
    else:
        q = CoefficientFunction.expression(f"{coef!r}*t^({e2 - 1!r})*{_sigma_text(s.sigma)}^({kg!r})", s.t0)
    spec = s.with_q(q)
    if validate:
        try:
            spec = validate_spec(spec)
        except SpecError as exc:
            raise ManufactureError(f"induced equation is invalid: {exc}") from exc
    return ManufacturedSolution(spec, y_form, c1, m, c2, n, float(l1), e1, float(l2), e2)


def sign_pattern(sol: ManufacturedSolution, t) -> tuple:
    return tuple(int(np.sign(f(t))) for f in (sol.y, sol.L1, sol.L2, sol.L3))


def classify(sol: ManufacturedSolution, t_window=(None, None), points: int = 64) -> SignClass:
    """Sign class of ``(y, L1 y, L2 y, L3 y)`` on a grid of the window."""
    a, b = t_window
    a = sol.spec.t0 if a is None else float(a)
    b = 1e6 * a if b is None else float(b)
    grid = np.geomspace(a, b, points)
    patterns = {sign_pattern(sol, t) for t in grid}
    if len(patterns) != 1:
        return SignClass.MIXED
    return SIGN_TABLE.get(patterns.pop(), SignClass.MIXED)


# -- lemma checks -------------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityCheck:
    name: str
    direction: str
    passed: bool | None
    detail: str

    def to_dict(self):
        return {"name": self.name, "direction": self.direction, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class LemmaReport:
    sign_class: SignClass
    checks: tuple

    @property
    def ok(self):
        return all(c.passed is not False for c in self.checks)

    @property
    def verified(self):
        """Checks whose hypotheses were verified (``passed`` not ``None``)."""
        return tuple(c for c in self.checks if c.passed is not None)


def _monotone(values, direction, slack=1e-10):
    d = np.diff(values)
    scale = slack * np.maximum(np.abs(values[1:]), np.abs(values[:-1]))
    if direction == "down":
        return bool(np.all(d <= scale))
    return bool(np.all(d >= -scale))


def _hypothesis(spec, profile, cid, path="auto"):
    try:
        res = evaluate_criterion(spec, profile, cid, EvaluationOptions(path=path))
    except Exception as exc:  # noqa: BLE001 - any failure means "not verified"
        return False, f"{cid}: {exc}"
    return res.verdict is Verdict.SATISFIED, f"{cid} {res.verdict.value}"


def check_lemma_monotonicities(sol: ManufacturedSolution, profile: CanonicalProfile | None = None,
                               t_window=(None, None), *, lam: float = 0.0, mu: float = 0.0,
                               points: int = 256) -> LemmaReport:
    """Sample the ratios the monotonicity lemmas speak about.

    S1: ``y/pi1`` nondecreasing; with gamma = alpha * beta, the triple
    integral diverging and feasible ``(lam, mu)`` also
    ``y/pi1^(1 - lam/alpha)`` nondecreasing and ``y/pi1^(mu/alpha)``
    nonincreasing.  S2 with the pi-weighted divergence: ``y/pi``
    nonincreasing, and once ``b >= 100 a`` also decaying: negative log-log
    slope over the last decade.
    A check whose hypothesis is not verified has ``passed = None``.

    Raises :class:`HypothesisNotVerified` unless the solution is in S1 or S2.
    """
    spec = sol.spec
    profile = profile or check_noncanonical(spec)
    profile.require_certified()
    a, b = t_window
    a = spec.t0 if a is None else float(a)
    b = 1e6 * a if b is None else float(b)
    cls = classify(sol, (a, b))
    if cls not in (SignClass.S1, SignClass.S2):
        raise HypothesisNotVerified(f"solution is in {cls.value}, the lemmas need S1 or S2")
    grid = np.geomspace(a, b, points)
    y = sol.y(grid)
    alpha = float(spec.alpha)
    checks = []
    if cls is SignClass.S1:
        p1 = np.asarray(profile.pi1(grid))
        ratio = y / p1
        checks.append(MonotonicityCheck("y/pi1", "up", _monotone(ratio, "up"), "any S1 solution"))
        gab = spec.gamma.fraction == spec.alpha.fraction * spec.beta.fraction
        ok1, why1 = _hypothesis(spec, profile, "E2_1") if gab else (False, "gamma != alpha * beta")
        feas = gab and lambda_mu_feasible(spec, profile, (lam, mu), spec.t0, 1e8 * spec.t0)
        if gab and ok1 and feas:
            r48 = y / p1 ** (1 - lam / alpha)
            r49 = y / p1 ** (mu / alpha)
            checks.append(MonotonicityCheck(f"y/pi1^(1-{lam:g}/alpha)", "up", _monotone(r48, "up"),
                                            f"lambda={lam:g}, mu={mu:g}; {why1}"))
            checks.append(MonotonicityCheck(f"y/pi1^({mu:g}/alpha)", "down", _monotone(r49, "down"),
                                            f"lambda={lam:g}, mu={mu:g}; {why1}"))
        else:
            why = why1 if not ok1 else f"lambda={lam:g}, mu={mu:g} not feasible"
            checks.append(MonotonicityCheck("y/pi1^(1-lambda/alpha), y/pi1^(mu/alpha)", "up/down", None,
                                            f"hypotheses not verified: {why}"))
    else:
        ok, why = _hypothesis(spec, profile, "E2_11")
        if ok:
            pv = np.asarray(profile.pi(grid))
            ratio = y / pv
            down = _monotone(ratio, "down")
            decay = True
            if b >= 100 * a:
                # a limit of 0 shows as a negative log-log slope over the last decade
                last = grid >= b / 10
                slope = np.polyfit(np.log(grid[last]), np.log(ratio[last]), 1)[0]
                decay = bool(slope < -1e-6 and ratio[-1] < ratio[0])
            checks.append(MonotonicityCheck("y/pi", "down", down and decay,
                                            f"{why}; ratio {ratio[0]:.4g} -> {ratio[-1]:.4g}"))
            k_bound = float(np.max(y / pv))
            checks.append(MonotonicityCheck("y <= k pi", "bounded", bool(np.all(y <= k_bound * pv * (1 + 1e-12))),
                                            f"k = {k_bound:.4g}"))
        else:
            checks.append(MonotonicityCheck("y/pi", "down", None, f"hypothesis not verified: {why}"))
    return LemmaReport(cls, tuple(checks))


# -- soundness -------------------------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    kind: str  # "CONTRADICTION" or "CONSISTENT"
    detail: str


@dataclass(frozen=True)
class SoundnessReport:
    findings: tuple = field(default_factory=tuple)

    @property
    def contradictions(self):
        return tuple(f for f in self.findings if f.kind == "CONTRADICTION")

    @property
    def ok(self):
        return not self.contradictions


def soundness_check(sol: ManufacturedSolution, report) -> SoundnessReport:
    """Compare an analysis report with the known positive solution."""
    findings = []
    osc = report.oscillatory.get("verdict")
    prop = report.property_a.get("verdict")
    if osc == Verdict.SATISFIED.value:
        findings.append(Finding("CONTRADICTION", f"oscillation granted by {report.oscillatory.get('granted_by')} "
                                                 f"but y = t^{-sol.y_form.k:g} is a positive solution"))
    if prop == Verdict.SATISFIED.value:
        if sol.decays:
            findings.append(Finding("CONSISTENT", "property A claimed and y -> 0"))
        else:
            findings.append(Finding("CONTRADICTION", f"property A granted by {report.property_a.get('granted_by')} "
                                                     f"but y = t^{-sol.y_form.k:g} does not tend to 0"))
    if not findings:
        findings.append(Finding("CONSISTENT", "no claim to test"))
    return SoundnessReport(tuple(findings))


# -- random setups ------------------------------------------------------------------------------

_EXPONENTS = tuple(OddRational(p, q) for p, q in ((1, 1), (1, 3), (3, 1), (5, 3), (3, 5), (1, 5), (7, 5), (5, 7)))


def random_manufactured(rng: np.random.Generator, *, shift_fraction: float = 0.25,
                        gamma_alpha_beta_fraction: float = 0.7) -> ManufacturedSolution:
    """A random noncanonical equation with a manufactured decaying solution.

    Retries until the construction succeeds.  Roughly ``shift_fraction`` of
    the results use ``sigma(t) = t + c`` (non-Euler), the rest ``delta t``.
    """
    while True:
        alpha = _EXPONENTS[rng.integers(len(_EXPONENTS))]
        beta = _EXPONENTS[rng.integers(len(_EXPONENTS))]
        if rng.random() < gamma_alpha_beta_fraction:
            gamma = OddRational.parse(alpha.fraction * beta.fraction)
        else:
            gamma = _EXPONENTS[rng.integers(len(_EXPONENTS))]
        m = float(alpha) * rng.uniform(1.1, 4.0)
        n = float(beta) * rng.uniform(1.1, 4.0)
        if rng.random() < shift_fraction:
            sigma = AdvancedArgument.shift(float(rng.uniform(0.5, 3.0)))
        else:
            sigma = AdvancedArgument.proportional(float(rng.uniform(1.0, 3.0)))
        k = float(rng.uniform(0.05, 4.0))
        base = EquationSpec(CoefficientFunction.power_law(1.0, m), CoefficientFunction.power_law(1.0, n),
                            CoefficientFunction.power_law(1.0, 0.0), sigma, alpha, beta, gamma)
        try:
            return manufacture(base, PowerLawY(k))
        except ManufactureError:
            continue
