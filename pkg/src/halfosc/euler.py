"""Exact evaluation for power-law coefficients with proportional argument.

For ``r1 = c1 t^m``, ``r2 = c2 t^n``, ``q = q0 t^p`` and ``sigma(t) = delta t``
every kernel is a finite power/log series (or, for fractional powers of
multi-term sums, a series with a tracked remainder), so each limsup/liminf
condition reduces to comparing an exact limit with its threshold.  The
windows anchored at ``sigma(t)`` are homogeneous: ``W(t) = W(1) t^D``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from scipy import integrate as sp_integrate

from .errors import (BoundaryExponent, CanonicalOperator, ClosedFormUnavailable, HypothesisViolated,
                     NotEulerType, SpecError)
from .ids import CriterionId, RhoKind
from .model import (AdvancedArgument, CoefficientFunction, EquationSpec, OddRational, Proportional,
                    signed_power, validate_spec)
from .series import Series, integral_diverges

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class EulerSpec:
    """Exponents and amplitudes of an Euler-type equation."""

    m: float
    n: float
    p: float
    q0: float
    delta: float
    alpha: OddRational
    beta: OddRational
    gamma: OddRational
    t0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, OddRational.parse(getattr(self, name)))
        for name in ("m", "n", "p", "q0", "delta", "t0", "c1", "c2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.q0 > 0:
            raise SpecError("q0 must be positive")
        if not self.delta >= 1:
            raise SpecError("delta must be >= 1")
        if not (self.t0 > 0 and self.c1 > 0 and self.c2 > 0):
            raise SpecError("t0, c1, c2 must be positive")

    @classmethod
    def one_third_family(cls, m, n, delta, q0, t0=1.0):
        """``r1 = t^m, r2 = t^n, alpha = 1, beta = gamma = 1/3, q = q0 t^(m/3 + n - 5/3)``."""
        return cls(m=m, n=n, p=m / 3 + n - 5 / 3, q0=q0, delta=delta,
                   alpha=OddRational(1), beta=OddRational(1, 3), gamma=OddRational(1, 3), t0=t0)

    @classmethod
    def from_spec(cls, spec: EquationSpec) -> "EulerSpec":
        r1, r2, q = spec.r1.monomial, spec.r2.monomial, spec.q.monomial
        if r1 is None or r2 is None or q is None or not isinstance(spec.sigma.form, Proportional):
            raise NotEulerType("coefficients must be single power laws and sigma(t) = delta t")
        return cls(m=r1[1], n=r2[1], p=q[1], q0=q[0], delta=spec.sigma.delta,
                   alpha=spec.alpha, beta=spec.beta, gamma=spec.gamma, t0=spec.t0, c1=r1[0], c2=r2[0])

    def to_spec(self) -> EquationSpec:
        t0 = self.t0
        return validate_spec(EquationSpec(
            r1=CoefficientFunction.power_law(self.c1, self.m, t0),
            r2=CoefficientFunction.power_law(self.c2, self.n, t0),
            q=CoefficientFunction.power_law(self.q0, self.p, t0),
            sigma=AdvancedArgument.proportional(self.delta),
            alpha=self.alpha, beta=self.beta, gamma=self.gamma, t0=t0))

    # -- exponent bookkeeping ------------------------------------------------------
    @property
    def a(self):
        return float(self.alpha)

    @property
    def M(self):
        return self.m / float(self.alpha)

    @property
    def N(self):
        return self.n / float(self.beta)

    @property
    def noncanonical(self):
        return self.M > 1 and self.N > 1

    def require_noncanonical(self):
        if not self.noncanonical:
            raise CanonicalOperator(f"m/alpha = {self.M:g} and n/beta = {self.N:g} must both exceed 1")

    @property
    def k1(self):
        """Amplitude of r1^(-1/alpha)."""
        return self.c1 ** (-1 / float(self.alpha))

    @property
    def k2(self):
        """Amplitude of r2^(-1/beta)."""
        return self.c2 ** (-1 / float(self.beta))

    @property
    def pi1(self):
        """``(A, e)`` with ``pi1(t) = A t^e``."""
        return self.k1 / (self.M - 1), 1 - self.M

    @property
    def pi2(self):
        return self.k2 / (self.N - 1), 1 - self.N

    @property
    def pi(self):
        a2, e2 = self.pi2
        f = -self.M + e2 / float(self.alpha)
        return self.k1 * a2 ** (1 / float(self.alpha)) / (-f - 1), f + 1

    @property
    def window_degree(self):
        """D with ``W(t) = W(1) t^D`` for the sigma-anchored windows."""
        b, a = float(self.beta), float(self.alpha)
        return ((self.p + 1) / b - self.N + 1) / a - self.M + 1


# -- closed-form kernels -------------------------------------------------------------

@dataclass(frozen=True)
class ClosedForm:
    """A kernel as a power/log series in t."""

    series: Series
    trace: str

    def evaluate(self, t):
        return self.series.evaluate(t)

    def condition(self, t):
        return self.series.condition(t)

    @property
    def growth_exponent(self):
        return self.series.leading()[1]

    @property
    def exact(self):
        return self.series.exact


def _weighted_q(es: EulerSpec, weight):
    if weight is None:
        return Series.monomial(es.q0, es.p)
    if weight == "pi":
        A, e = es.pi
    elif weight == "pi1":
        A, e = es.pi1
    else:
        raise ValueError(f"unknown weight {weight!r}")
    g = float(es.gamma)
    return Series.monomial(es.q0 * A ** g * es.delta ** (g * e), es.p + g * e)


@functools.lru_cache(maxsize=256)
def _chain(es: EulerSpec, a: float, weight):
    Q = _weighted_q(es, weight).integrate_from(a)
    g = Series.monomial(es.k2, -es.N) * Q ** es.beta.inverse.fraction
    R = g.integrate_from(a)
    h = Series.monomial(es.k1, -es.M) * R ** es.alpha.inverse.fraction
    J = h.integrate_from(a)
    return {"Q": Q, "R2Q_integrand": g, "R2Q": R, "J_integrand": h, "J": J}


def _window_constant_series(es: EulerSpec, end: float) -> float:
    d = es.delta
    inner = Series.monomial(es.q0, es.p).integral_to(d)
    mid = (Series.monomial(es.k2, -es.N) * inner ** es.beta.inverse.fraction).integral_to(d)
    outer = Series.monomial(es.k1, -es.M) * mid ** es.alpha.inverse.fraction
    return outer.definite(1.0, end)


def _window_constant_quad(es: EulerSpec, end: float) -> float:
    d, p = es.delta, es.p
    ib, ia = es.beta.inverse.fraction, es.alpha.inverse.fraction

    def inner(y):
        if abs(p + 1) < 1e-12:
            return es.q0 * math.log(d / y)
        return es.q0 * (d ** (p + 1) - y ** (p + 1)) / (p + 1)

    def mid_integrand(y):
        return es.k2 * y ** -es.N * signed_power(inner(y), ib)

    def mid(x):
        if x <= d:
            return sp_integrate.quad(mid_integrand, x, d, epsabs=0, epsrel=1e-12, limit=200)[0]
        return -sp_integrate.quad(mid_integrand, d, x, epsabs=0, epsrel=1e-12, limit=200)[0]

    def outer(x):
        return es.k1 * x ** -es.M * signed_power(mid(x), ia)

    total = sp_integrate.quad(outer, 1.0, min(end, d), epsabs=0, epsrel=1e-11, limit=200)[0]
    if end > d:
        total += sp_integrate.quad(outer, d, end, epsabs=0, epsrel=1e-11, limit=200)[0]
    return total


@functools.lru_cache(maxsize=256)
def window_constant(es: EulerSpec, variant: str):
    """``(W(1), method)`` for the sigma-anchored windows E2_33 / E2_29."""
    if es.delta == 1:
        return 0.0, "empty window"
    end = es.delta if variant == "E2_33" else es.delta ** 2
    try:
        return _window_constant_series(es, end), "series"
    except ClosedFormUnavailable:
        return _window_constant_quad(es, end), "nested quadrature"


def euler_kernel_closed_form(es: EulerSpec, kernel: str, bounds: float | None = None,
                             weight: str | None = None) -> ClosedForm:
    """Closed form of a kernel: ``Q``, ``R2Q``, ``J`` from ``bounds`` (default t0),
    or one of the windows ``E2_28``, ``E2_29``, ``E2_33`` as a function of t.

    ``weight`` selects the innermost factor ``pi^gamma(sigma(s))`` (``"pi"``)
    or ``pi1^gamma(sigma(s))`` (``"pi1"``).
    """
    es.require_noncanonical()
    if kernel in ("Q", "R2Q", "J"):
        a = es.t0 if bounds is None else float(bounds)
        s = _chain(es, a, weight)[kernel]
        return ClosedForm(s, f"{kernel}(a={a:g}) = {s.describe()}")
    if kernel == "E2_28":
        s = _chain(es, es.t0, None)["J_integrand"].window(es.delta)
        return ClosedForm(s, f"window over [t, {es.delta:g} t] of J' = {s.describe()}")
    if kernel in ("E2_29", "E2_33"):
        W, how = window_constant(es, kernel)
        D = es.window_degree
        return ClosedForm(Series.monomial(W, D), f"W(t) = {W:.12g} t^{D:.10g} (W(1) by {how})")
    raise ValueError(f"unknown kernel {kernel!r}")


# -- reduced inequalities ---------------------------------------------------------

@dataclass(frozen=True)
class ReducedInequality:
    """``lhs > rhs``: the exact limit of a criterion function against its threshold."""

    lhs: float
    rhs: float
    satisfied: bool
    symbolic_trace: str

    def to_dict(self):
        return {"type": "reduced_inequality", "lhs": _num(self.lhs), "rhs": _num(self.rhs),
                "satisfied": self.satisfied, "trace": self.symbolic_trace}


@dataclass(frozen=True)
class ExactVerdict:
    """Two-sided verdict of a divergence test or a combined criterion."""

    satisfied: bool
    symbolic_trace: str

    def to_dict(self):
        return {"type": "exact_verdict", "satisfied": self.satisfied, "trace": self.symbolic_trace}


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _inequality(value, threshold, trace):
    return ReducedInequality(value, threshold, bool(value > threshold), trace)


def _limit(series: Series, what: str):
    try:
        return series.limit()
    except ClosedFormUnavailable as exc:
        raise BoundaryExponent(f"{what}: {exc}") from None


def _divergence(integrand: Series, what: str):
    try:
        div = integral_diverges(integrand)
    except ClosedFormUnavailable as exc:
        raise BoundaryExponent(f"{what}: {exc}") from None
    c, e, k = integrand.leading()
    lead = f"{c:.6g} t^{e:.8g}" + (f" ln^{k} t" if k else "")
    return ExactVerdict(div, f"{what}: integrand ~ {lead}; integral {'diverges' if div else 'converges'}")


def _rho_monomial(es: EulerSpec, rho):
    kind = rho.kind if rho is not None else RhoKind.ONE
    A1, e1 = es.pi1
    if kind is RhoKind.ONE:
        return 1.0, 0.0
    if kind is RhoKind.PI1:
        return A1, e1
    if kind is RhoKind.PI1_POW_ALPHA:
        return A1 ** es.a, es.a * e1
    raise ClosedFormUnavailable("custom rho has no closed form")


def riccati_series(es: EulerSpec, rho, T: float, lam: float = 0.0) -> Series:
    """Criterion function of the Riccati-type tests as a series in t."""
    a = es.a
    A1, e1 = es.pi1
    c_rho, r = _rho_monomial(es, rho)
    Q = _chain(es, T, None)["Q"]
    ratio = es.delta ** (e1 * (a - lam))
    gain = Series.monomial(c_rho * es.k2 * ratio, r - es.N) * Q ** es.beta.inverse.fraction
    if r != 0:
        amp = es.c1 * abs(c_rho * r) ** (a + 1) / ((a + 1) ** (a + 1) * c_rho ** a)
        loss = Series.monomial(amp, es.m + (r - 1) * (a + 1) - r * a)
    else:
        loss = Series()
    integral = (gain - loss).integrate_from(T)
    return Series.monomial(A1 ** a / c_rho, a * e1 - r) * integral


def refined_limsup_series(es: EulerSpec, lam: float, mu: float, t1: float) -> Series:
    """Criterion function of the lambda/mu-refined limsup test as a series in t."""
    a = es.a
    A1, e1 = es.pi1
    Q = _chain(es, t1, None)["Q"]
    inner = Series.monomial(A1 ** mu * es.delta ** (mu * e1) * es.k2, mu * e1 - es.N) * Q ** es.beta.inverse.fraction
    front = Series.monomial(A1 ** lam * (A1 * es.delta ** e1) ** (a - lam - mu), (a - mu) * e1)
    return front * inner.integrate_from(t1)


RICCATI_RHO = {"E2_42": RhoKind.PI1_POW_ALPHA, "E2_43": RhoKind.PI1, "E2_44": RhoKind.ONE,
               "E2_59": RhoKind.PI1_POW_ALPHA}


def euler_reduce(es: EulerSpec, cid) -> ReducedInequality | ExactVerdict:
    """Exact two-sided verdict for a component condition or a whole criterion.

    Raises :class:`BoundaryExponent` when the limit is not determined by the
    closed form (the caller then falls back to numerics), and
    :class:`HypothesisViolated` for criteria that need gamma = alpha * beta.
    """
    from .ids import RhoFunction

    cid = CriterionId.parse(cid)
    es.require_noncanonical()
    name = cid.name
    if cid.is_theorem:
        from .criteria import EvaluationOptions, Verdict, evaluate_criterion
        from .canonical import check_noncanonical
        spec = es.to_spec()
        res = evaluate_criterion(spec, check_noncanonical(spec), cid, EvaluationOptions(path="euler"))
        if res.verdict is Verdict.INCONCLUSIVE:
            raise BoundaryExponent(f"{cid}: not decided in closed form ({res.notes})")
        return ExactVerdict(res.verdict is Verdict.SATISFIED, res.notes)

    g_over_b = float(es.gamma.fraction / es.beta.fraction)
    if name == "E2_1":
        return _divergence(_chain(es, es.t0, None)["J_integrand"], "triple integral")
    if name == "E2_19":
        return _divergence(_chain(es, es.t0, "pi")["J_integrand"], "pi-weighted triple integral")
    if name == "E2_3":
        return _divergence(Series.monomial(es.q0, es.p), "int q")
    if name == "E2_11":
        return _divergence(_weighted_q(es, "pi"), "int q pi^gamma(sigma)")
    if name in ("E2_23", "E2_27"):
        t1 = es.t0 if name == "E2_27" or cid.t1 is None else cid.t1
        A1, e1 = es.pi1
        f = Series.monomial((A1 * es.delta ** e1) ** g_over_b, e1 * g_over_b) * _chain(es, t1, None)["R2Q"]
        return _inequality(_limit(f, name), 1.0, f"{name}(t1={t1:g}): {f.describe()}")
    if name == "E2_28":
        cf = euler_kernel_closed_form(es, "E2_28")
        return _inequality(_limit(cf.series, name), INV_E, cf.trace)
    if name in ("E2_29", "E2_33"):
        cf = euler_kernel_closed_form(es, name)
        return _inequality(_limit(cf.series, name), INV_E, cf.trace)
    if name in ("E2_35", "E2_42", "E2_43", "E2_44", "E2_58", "E2_59"):
        rho = cid.rho if name in ("E2_35", "E2_58") else RhoFunction(RICCATI_RHO[name])
        lam = (cid.lam or 0.0) if name in ("E2_58", "E2_59") else 0.0
        T = es.t0 if cid.t1 is None else cid.t1
        try:
            f = riccati_series(es, rho, T, lam)
        except ClosedFormUnavailable as exc:
            raise BoundaryExponent(f"{name}: {exc}") from None
        return _inequality(_limit(f, name), 1.0, f"{cid}: {f.describe()}")
    if name == "E2_53":
        lam, mu = cid.lam or 0.0, cid.mu or 0.0
        t1 = es.t0 if cid.t1 is None else cid.t1
        f = refined_limsup_series(es, lam, mu, t1)
        return _inequality(_limit(f, name), (1 - lam / es.a) ** es.a, f"{cid}: {f.describe()}")
    raise ValueError(f"no closed form for {cid}")


def requires_gamma_alpha_beta(name: str) -> bool:
    return name not in ("T2_1", "T2_2") and name.startswith(("T", "C"))


def check_structural(es: EulerSpec, cid: CriterionId):
    if requires_gamma_alpha_beta(cid.name) and es.gamma.fraction != es.alpha.fraction * es.beta.fraction:
        raise HypothesisViolated(f"{cid.name} needs gamma = alpha * beta")


# -- comparison with the explicit one-third-family formulas ------------------------

def reduction_crosscheck(es: EulerSpec, rtol: float = 1e-6) -> list[str]:
    """Compare the general reductions with the explicit one-third-family formulas.

    Returns discrepancy notes (empty when everything agrees).  Only applies
    to specs of :meth:`EulerSpec.one_third_family` shape.
    """
    from . import reference_reductions as ref

    shape = EulerSpec.one_third_family(es.m, es.n, es.delta, es.q0, es.t0)
    if (es.alpha, es.beta, es.gamma) != (shape.alpha, shape.beta, shape.gamma) or \
            abs(es.p - shape.p) > 1e-12 or es.c1 != 1 or es.c2 != 1 or es.t0 != 1:
        return []
    notes = []
    checks = (
        ("E2_23", ref.limsup_condition, ref.limsup_normalizer),
        ("E2_28", ref.window_condition, ref.window_normalizer),
        ("E2_33", ref.local_window_condition, ref.local_window_normalizer),
    )
    for name, formula, norm in checks:
        ours = euler_reduce(es, name)
        try:
            lhs, rhs = formula(es.m, es.n, es.delta, es.q0)
        except ZeroDivisionError:
            # removable singularity: symmetric limit in m
            h = 1e-4
            lo, hi = formula(es.m - h, es.n, es.delta, es.q0), formula(es.m + h, es.n, es.delta, es.q0)
            lhs, rhs = (lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2
            notes.append(f"{name}: explicit formula is singular at m={es.m:g}, n={es.n:g}; "
                         "compared through its symmetric limit in m")
        scale = norm(es.m, es.n)
        for side, a, b in (("lhs", ours.lhs * scale, lhs), ("rhs", ours.rhs * scale, rhs)):
            if abs(a - b) > rtol * max(abs(a), abs(b)):
                notes.append(f"{name}: {side} differs: closed form {a:.12g} vs explicit {b:.12g}")
    return notes
