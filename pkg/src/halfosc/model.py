"""Problem data for the third-order half-linear advanced equation

    (r2(t) ((r1(t) (y'(t))^alpha)')^beta)' + q(t) y^gamma(sigma(t)) = 0,   t >= t0 > 0,

and the checks of its standing hypotheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .errors import (
    ArgumentNotAdvanced,
    ExpressionError,
    NegativeQ,
    NonOddExponent,
    NonPositiveCoefficient,
    NonPositiveT0,
    SpecError,
    VanishingQ,
)
from .expr import Expression

MAX_EXPONENT_PART = 10**6

#: Default settings for sampled (non-exact) hypothesis checks.
CHECK_HORIZON = 1e6
CHECK_GRID_RATIO = 1.1


def _as_fraction(value) -> Fraction:
    if isinstance(value, OddRational):
        return value.fraction
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise NonOddExponent(f"exponent must be a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr round-trips, so "0.6" style literals stay exact
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise NonOddExponent(f"cannot parse exponent {value!r}") from None
    raise NonOddExponent(f"cannot interpret {value!r} as a rational exponent")


@dataclass(frozen=True, order=False)
class OddRational:
    """Quotient of two odd positive integers, kept in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        num, den = int(self.numerator), int(self.denominator)
        if num < 1 or den < 1:
            raise NonOddExponent(f"{num}/{den} is not a quotient of positive integers")
        g = math.gcd(num, den)
        num, den = num // g, den // g
        if num % 2 == 0 or den % 2 == 0:
            raise NonOddExponent(f"{num}/{den} is not a quotient of odd integers")
        if num >= MAX_EXPONENT_PART or den >= MAX_EXPONENT_PART:
            raise NonOddExponent(f"{num}/{den} exceeds the representable range")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def parse(cls, value) -> "OddRational":
        if isinstance(value, OddRational):
            return value
        frac = _as_fraction(value)
        if frac <= 0:
            raise NonOddExponent(f"exponent {frac} must be positive")
        return cls(frac.numerator, frac.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def inverse(self) -> "OddRational":
        return OddRational(self.denominator, self.numerator)

    def __float__(self):
        return self.numerator / self.denominator

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


def signed_power(x, r):
    """Real power x**r for r a rational with odd denominator.

    Negative bases are allowed: the result is ``|x|**r`` times ``sign(x)``
    when the reduced numerator of ``r`` is odd, and ``|x|**r`` when it is even.
    Float exponents are treated as odd/odd (sign preserving).
    """
    if isinstance(r, OddRational):
        r = r.fraction
    if isinstance(r, Fraction):
        odd_num = r.numerator % 2 == 1
        if r.denominator % 2 == 0:
            raise ValueError(f"exponent {r} has an even denominator")
        exponent = float(r)
    else:
        odd_num = True
        exponent = float(r)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mag = np.abs(x) ** exponent
    if odd_num:
        out = np.sign(x) * mag
    else:
        out = mag
    return out if out.ndim else float(out)


# -- coefficient forms ---------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    coef: float
    exponent: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            return self.coef * t ** self.exponent

    def to_dict(self):
        return {"kind": "powerlaw", "coef": self.coef, "exp": self.exponent}


@dataclass(frozen=True)
class SumOfPowerLaws:
    terms: tuple[tuple[float, float], ...]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        with np.errstate(over="ignore", divide="ignore"):
            for c, e in self.terms:
                out = out + c * t ** e
        return out

    def to_dict(self):
        return {"kind": "sum", "terms": [[c, e] for c, e in self.terms]}


@dataclass(frozen=True)
class ExpressionForm:
    expr: Expression

    def __call__(self, t):
        return np.asarray(self.expr(np.asarray(t, dtype=float)), dtype=float)

    def to_dict(self):
        return {"kind": "expr", "body": self.expr.body}


@dataclass(frozen=True)
class CoefficientFunction:
    """A coefficient r1, r2 or q, evaluable on [domain_start, inf)."""

    form: PowerLaw | SumOfPowerLaws | ExpressionForm
    domain_start: float = 1.0

    @classmethod
    def power_law(cls, coef, exponent, domain_start=1.0):
        return cls(PowerLaw(float(coef), float(exponent)), float(domain_start))

    @classmethod
    def sum_of_power_laws(cls, terms, domain_start=1.0):
        terms = tuple((float(c), float(e)) for c, e in terms)
        if not terms:
            raise SpecError("a sum of power laws needs at least one term")
        return cls(SumOfPowerLaws(terms), float(domain_start))

    @classmethod
    def expression(cls, body, domain_start=1.0):
        return cls(ExpressionForm(Expression(body)), float(domain_start))

    def __call__(self, t):
        out = self.form(t)
        return out if np.ndim(out) else float(out)

    @property
    def power_terms(self):
        """``((coef, exponent), ...)`` for power-law forms, else ``None``."""
        if isinstance(self.form, PowerLaw):
            return ((self.form.coef, self.form.exponent),)
        if isinstance(self.form, SumOfPowerLaws):
            return self.form.terms
        return None

    @property
    def monomial(self):
        """``(coef, exponent)`` when the function is a single power law."""
        terms = self.power_terms
        if terms is not None and len(terms) == 1:
            return terms[0]
        return None

    def scaled(self, c: float) -> "CoefficientFunction":
        c = float(c)
        if isinstance(self.form, PowerLaw):
            return replace(self, form=PowerLaw(c * self.form.coef, self.form.exponent))
        if isinstance(self.form, SumOfPowerLaws):
            return replace(self, form=SumOfPowerLaws(tuple((c * a, e) for a, e in self.form.terms)))
        return CoefficientFunction.expression(f"({c!r})*({self.form.expr.body})", self.domain_start)

    def to_dict(self):
        return self.form.to_dict()


# -- deviating argument ----------------------------------------------------------

@dataclass(frozen=True)
class Proportional:
    delta: float

    def __call__(self, t):
        return self.delta * np.asarray(t, dtype=float)

    def derivative(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.delta)

    def to_dict(self):
        return {"kind": "proportional", "delta": self.delta}


@dataclass(frozen=True)
class Shift:
    c: float

    def __call__(self, t):
        return np.asarray(t, dtype=float) + self.c

    def derivative(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def to_dict(self):
        return {"kind": "shift", "c": self.c}


@dataclass(frozen=True)
class ExpressionArgument:
    expr: Expression
    deriv: Expression | None = None

    def __call__(self, t):
        return np.asarray(self.expr(np.asarray(t, dtype=float)), dtype=float)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.deriv is not None:
            return np.asarray(self.deriv(t), dtype=float)
        h = 1e-6 * np.maximum(np.abs(t), 1.0)
        return (self(t + h) - self(t - h)) / (2 * h)

    def to_dict(self):
        out = {"kind": "expr", "body": self.expr.body}
        if self.deriv is not None:
            out["derivative"] = self.deriv.body
        return out


@dataclass(frozen=True)
class AdvancedArgument:
    form: Proportional | Shift | ExpressionArgument

    @classmethod
    def proportional(cls, delta):
        return cls(Proportional(float(delta)))

    @classmethod
    def shift(cls, c):
        return cls(Shift(float(c)))

    @classmethod
    def expression(cls, body, derivative=None):
        deriv = Expression(derivative) if derivative is not None else None
        return cls(ExpressionArgument(Expression(body), deriv))

    def __call__(self, t):
        out = self.form(t)
        return out if np.ndim(out) else float(out)

    def derivative(self, t):
        out = self.form.derivative(t)
        return out if np.ndim(out) else float(out)

    @property
    def delta(self):
        """The ratio delta when sigma(t) = delta * t, else ``None``."""
        return self.form.delta if isinstance(self.form, Proportional) else None

    def to_dict(self):
        return self.form.to_dict()


# -- the equation ---------------------------------------------------------------

@dataclass(frozen=True)
class EquationSpec:
    r1: CoefficientFunction
    r2: CoefficientFunction
    q: CoefficientFunction
    sigma: AdvancedArgument
    alpha: OddRational
    beta: OddRational
    gamma: OddRational
    t0: float = 1.0
    #: ``(hypothesis, "exact" | "sampled")`` pairs recorded by validation
    checks: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def with_q(self, q: CoefficientFunction) -> "EquationSpec":
        return replace(self, q=q, checks=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "r1": self.r1.to_dict(),
            "r2": self.r2.to_dict(),
            "q": self.q.to_dict(),
            "sigma": self.sigma.to_dict(),
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "gamma": str(self.gamma),
            "t0": self.t0,
        }


def gamma_equals_alpha_beta(spec: EquationSpec) -> bool:
    """Exact test of gamma == alpha * beta."""
    return spec.gamma.fraction == spec.alpha.fraction * spec.beta.fraction


# -- parsing raw data ----------------------------------------------------------

def _parse_coefficient(raw, t0, name) -> CoefficientFunction:
    if isinstance(raw, CoefficientFunction):
        return raw
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return CoefficientFunction.power_law(raw, 0.0, t0)
    if isinstance(raw, str):
        return CoefficientFunction.expression(raw, t0)
    if not isinstance(raw, Mapping):
        raise SpecError(f"{name}: cannot interpret {raw!r}")
    kind = str(raw.get("kind", "")).lower()
    try:
        if kind in ("powerlaw", "power_law", "power"):
            return CoefficientFunction.power_law(raw["coef"], raw["exp"], t0)
        if kind in ("sum", "sumofpowerlaws", "sum_of_power_laws"):
            return CoefficientFunction.sum_of_power_laws(raw["terms"], t0)
        if kind in ("expr", "expression"):
            return CoefficientFunction.expression(raw["body"], t0)
    except KeyError as exc:
        raise SpecError(f"{name}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{name}: {exc}") from None
    raise SpecError(f"{name}: unknown coefficient kind {kind!r}")


def _parse_sigma(raw) -> AdvancedArgument:
    if isinstance(raw, AdvancedArgument):
        return raw
    if isinstance(raw, str):
        return AdvancedArgument.expression(raw)
    if not isinstance(raw, Mapping):
        raise SpecError(f"sigma: cannot interpret {raw!r}")
    kind = str(raw.get("kind", "")).lower()
    try:
        if kind in ("proportional", "scale"):
            return AdvancedArgument.proportional(raw["delta"])
        if kind == "shift":
            return AdvancedArgument.shift(raw["c"])
        if kind in ("expr", "expression"):
            return AdvancedArgument.expression(raw["body"], raw.get("derivative"))
    except KeyError as exc:
        raise SpecError(f"sigma: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"sigma: {exc}") from None
    raise SpecError(f"sigma: unknown kind {kind!r}")


def check_grid(t0: float, horizon: float = CHECK_HORIZON, ratio: float = CHECK_GRID_RATIO):
    """Geometric sample grid t0 * ratio**k up to t0 * horizon."""
    n = int(math.floor(math.log(horizon) / math.log(ratio) + 1e-9))
    return t0 * ratio ** np.arange(n + 1)


def _check_positive(fn: CoefficientFunction, name, grid):
    terms = fn.power_terms
    if terms is not None and all(c > 0 for c, _ in terms):
        return "exact"
    if isinstance(fn.form, PowerLaw):
        raise NonPositiveCoefficient(f"{name} has coefficient {fn.form.coef} <= 0")
    vals = np.asarray(fn(grid), dtype=float)
    bad = ~(np.isfinite(vals) & (vals > 0))
    if bad.any():
        t_bad = grid[np.argmax(bad)]
        raise NonPositiveCoefficient(f"{name}({t_bad:.6g}) = {vals[np.argmax(bad)]!r} is not > 0")
    return "sampled"


def _check_q(fn: CoefficientFunction, grid):
    terms = fn.power_terms
    if terms is not None and all(c >= 0 for c, _ in terms):
        if all(c == 0 for c, _ in terms):
            raise VanishingQ("q is identically zero")
        return "exact"
    vals = np.asarray(fn(grid), dtype=float)
    bad = ~(np.isfinite(vals) & (vals >= 0))
    if bad.any():
        t_bad = grid[np.argmax(bad)]
        raise NegativeQ(f"q({t_bad:.6g}) = {vals[np.argmax(bad)]!r} is negative or not finite")
    last_decade = grid >= grid[-1] / 10
    if not np.any(vals[last_decade] > 0):
        raise VanishingQ("q vanishes on the last decade of the check grid")
    return "sampled"


def _check_sigma(sigma: AdvancedArgument, grid):
    form = sigma.form
    if isinstance(form, Proportional):
        if not form.delta >= 1:
            raise ArgumentNotAdvanced(f"sigma(t) = {form.delta} t is delayed, not advanced")
        return "exact"
    if isinstance(form, Shift):
        if not form.c >= 0:
            raise ArgumentNotAdvanced(f"sigma(t) = t + ({form.c}) is delayed, not advanced")
        return "exact"
    vals = np.asarray(sigma(grid), dtype=float)
    slack = 1e-12 * np.maximum(grid, 1.0)
    bad = ~(np.isfinite(vals) & (vals >= grid - slack))
    if bad.any():
        raise ArgumentNotAdvanced(f"sigma({grid[np.argmax(bad)]:.6g}) < t")
    dvals = np.asarray(sigma.derivative(grid), dtype=float)
    if not np.all(np.isfinite(dvals) & (dvals >= -1e-8)):
        idx = np.argmax(~(dvals >= -1e-8))
        raise ArgumentNotAdvanced(f"sigma'({grid[idx]:.6g}) < 0")
    return "sampled"


def validate_spec(raw, *, check_horizon: float = CHECK_HORIZON,
                  check_ratio: float = CHECK_GRID_RATIO) -> EquationSpec:
    """Parse raw equation data and check hypotheses (H1)-(H4).

    ``raw`` is either an :class:`EquationSpec` or a mapping with keys
    ``r1, r2, q, sigma, alpha, beta, gamma, t0``.  Coefficients are
    ``{"kind": "powerlaw", "coef": c, "exp": e}``, ``{"kind": "sum",
    "terms": [[c, e], ...]}`` or ``{"kind": "expr", "body": "t^4"}``;
    exponents may be strings such as ``"5/3"``.

    Power-law data is checked exactly.  Expression data is checked on the
    grid ``t0 * 1.1**k`` up to ``t0 * check_horizon``; a pass there is
    recorded as ``"sampled"`` in ``spec.checks``.
    """
    if isinstance(raw, EquationSpec):
        parts = {
            "r1": raw.r1, "r2": raw.r2, "q": raw.q, "sigma": raw.sigma,
            "alpha": raw.alpha, "beta": raw.beta, "gamma": raw.gamma, "t0": raw.t0,
        }
    elif isinstance(raw, Mapping):
        parts = dict(raw)
    else:
        raise SpecError(f"cannot validate {type(raw).__name__}")

    missing = [k for k in ("r1", "r2", "q", "sigma", "alpha", "beta", "gamma") if k not in parts]
    if missing:
        raise SpecError(f"missing fields: {', '.join(missing)}")

    try:
        t0 = float(parts.get("t0", 1.0))
    except (TypeError, ValueError):
        raise SpecError(f"t0: cannot interpret {parts.get('t0')!r}") from None
    if not (math.isfinite(t0) and t0 > 0):
        raise NonPositiveT0(f"t0 = {t0} must be positive")

    alpha = OddRational.parse(parts["alpha"])
    beta = OddRational.parse(parts["beta"])
    gamma = OddRational.parse(parts["gamma"])

    try:
        r1 = _parse_coefficient(parts["r1"], t0, "r1")
        r2 = _parse_coefficient(parts["r2"], t0, "r2")
        q = _parse_coefficient(parts["q"], t0, "q")
        sigma = _parse_sigma(parts["sigma"])
    except ExpressionError:
        raise

    grid = check_grid(t0, check_horizon, check_ratio)
    checks = (
        ("H1:exponents", "exact"),
        ("H2:r1>0", _check_positive(r1, "r1", grid)),
        ("H2:r2>0", _check_positive(r2, "r2", grid)),
        ("H3:q>=0", _check_q(q, grid)),
        ("H4:sigma", _check_sigma(sigma, grid)),
    )
    return EquationSpec(r1=r1, r2=r2, q=q, sigma=sigma, alpha=alpha, beta=beta,
                        gamma=gamma, t0=t0, checks=checks)
