"""Kernels, component conditions and theorem-level verdicts.

Kernels are the nested integrals shared by the criteria:

    Q(a, t)   = int_a^t w q
    R2Q(a, t) = int_a^t r2^(-1/beta)(u) Q(a, u)^(1/beta) du
    J(a, t)   = int_a^t r1^(-1/alpha)(v) R2Q(a, v)^(1/alpha) dv

with an optional innermost weight ``w`` (``pi^gamma(sigma(s))`` or
``pi1^gamma(sigma(s))``), plus three windows anchored at ``t`` and
``sigma(t)``.  All of them are evaluated on a :class:`PanelGrid` so a whole
sample grid of ``t`` values costs one pass.

Each component condition is a divergence test or a limsup/liminf compared
with a threshold.  The numeric path only ever answers Satisfied or
Inconclusive; NotSatisfied comes exclusively from the closed forms of
:mod:`halfosc.euler`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalProfile, check_noncanonical
from .errors import (BoundaryExponent, HypothesisViolated, NonFiniteCriterionFunction, NonFiniteIntegrand,
                     NonPositiveB, NotEulerType)
from .expr import Expression
from .ids import (OSCILLATION_THEOREMS, PI1, PI1_POW_ALPHA, ONE, PROPERTY_A_THEOREMS, Conclusion,
                  CriterionId, RhoFunction, RhoKind)
from .integrate import (DEFAULT_POLICY, HorizonPolicy, LimitKind, PanelGrid, TailKind, TailResult,
                        Trend, geometric_grid, judge_tail, limit_from_samples)
from .model import EquationSpec, OddRational, gamma_equals_alpha_beta, signed_power

INV_E = math.exp(-1.0)


# -- verdicts -----------------------------------------------------------------------

class Verdict(enum.Enum):
    SATISFIED = "Satisfied"
    NOT_SATISFIED = "NotSatisfied"
    INCONCLUSIVE = "Inconclusive"


def combine_all(verdicts) -> Verdict:
    """Conjunction: one failure decides, then any doubt."""
    verdicts = list(verdicts)
    if any(v is Verdict.NOT_SATISFIED for v in verdicts):
        return Verdict.NOT_SATISFIED
    if any(v is Verdict.INCONCLUSIVE for v in verdicts):
        return Verdict.INCONCLUSIVE
    return Verdict.SATISFIED


def combine_any(verdicts) -> Verdict:
    """Disjunction over a finite candidate set."""
    verdicts = list(verdicts)
    if any(v is Verdict.SATISFIED for v in verdicts):
        return Verdict.SATISFIED
    if verdicts and all(v is Verdict.NOT_SATISFIED for v in verdicts):
        return Verdict.NOT_SATISFIED
    return Verdict.INCONCLUSIVE


_COMBINE = {"all": combine_all, "any": combine_any}


@dataclass(frozen=True)
class EvaluationOptions:
    """How criteria are evaluated.

    ``path`` is ``"auto"`` (closed form for Euler-type specs, numeric
    otherwise), ``"numeric"`` or ``"euler"``.  ``horizon`` is absolute; the
    default is ``t0 * policy.max_horizon_factor``.
    """

    path: str = "auto"
    horizon: float | None = None
    tol: float = 1e-10
    margin: float = 0.01
    policy: HorizonPolicy = DEFAULT_POLICY
    t1_factors: tuple = (1.0, 10.0, 100.0)
    lambda_mu: tuple | None = None

    def __post_init__(self):
        if self.path not in ("auto", "numeric", "euler"):
            raise ValueError(f"unknown path {self.path!r}")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")

    def horizon_for(self, spec: EquationSpec) -> float:
        h = self.horizon if self.horizon is not None else spec.t0 * self.policy.max_horizon_factor
        if h < 10 * spec.t0:
            raise ValueError("horizon must exceed 10 * t0")
        return float(h)


@dataclass(frozen=True)
class CriterionResult:
    """Verdict for one criterion id.

    Theorem results carry ``parts``: ``(quantifier, results)`` pairs whose
    combination gives the verdict.  Leaf results carry ``evidence``.
    """

    id: CriterionId | str
    verdict: Verdict
    conclusion_kind: Conclusion = Conclusion.NONE
    evidence: object = None
    hypotheses_checked: tuple = ()
    notes: str = ""
    path: str = "numeric"
    parts: tuple = ()
    samples: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def key(self):
        return str(self.id)

    def leaves(self):
        """All leaf results below this one (itself if it is a leaf)."""
        if not self.parts:
            yield self
            return
        for _, results in self.parts:
            for r in results:
                yield from r.leaves()

    def to_dict(self):
        d = {
            "id": self.key,
            "verdict": self.verdict.value,
            "conclusion_kind": self.conclusion_kind.value,
            "path": self.path,
            "notes": self.notes,
            "hypotheses_checked": list(self.hypotheses_checked),
        }
        if self.evidence is not None:
            d["evidence"] = _clean(self.evidence.to_dict())
        if self.parts:
            d["parts"] = [{"quantifier": q, "results": [r.to_dict() for r in rs]} for q, rs in self.parts]
        return d


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# -- numeric kernels ------------------------------------------------------------------

def _weight_fn(spec, profile, weight):
    if weight is None:
        return None
    if callable(weight):
        return weight
    if profile is None:
        profile = check_noncanonical(spec)
    profile.require_certified()
    fn = {"pi": profile.pi, "pi1": profile.pi1}[weight]
    g = spec.gamma

    def w(s):
        return signed_power(fn(spec.sigma(s)), g)
    return w


def _chain(spec: EquationSpec, a: float, ts, weight=None):
    """Q, R2Q, J and the integrands of R2Q and J from ``a``, at the points ``ts``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < a):
        raise ValueError("kernels need a <= t")
    pts = ts[ts > a]
    out = {k: np.zeros(ts.shape) for k in ("Q", "R2Q", "J", "R2Q'", "J'")}
    if pts.size == 0:
        return out
    pg = PanelGrid(np.concatenate([[a], pts]), grade_at=[a], max_ratio=1.25)
    x = pg.x
    qv = np.asarray(spec.q(x), dtype=float)
    if weight is not None:
        qv = qv * np.asarray(weight(x), dtype=float)
    if not np.all(np.isfinite(qv)):
        raise NonFiniteIntegrand("q (times weight) is not finite on the kernel grid")
    ib, ia = spec.beta.inverse.fraction, spec.alpha.inverse.fraction
    with np.errstate(over="ignore", invalid="ignore"):
        Q = np.maximum(pg.cumulative(qv), 0.0)
        g = signed_power(Q / np.asarray(spec.r2(x)), ib)
        R = pg.cumulative(g)
        h = signed_power(R / np.asarray(spec.r1(x)), ia)
        J = pg.cumulative(h)
    idx = np.searchsorted(pg.breakpoints, pts)
    mask = ts > a
    for key, arr in (("Q", Q), ("R2Q", R), ("J", J), ("R2Q'", g), ("J'", h)):
        out[key][mask] = pg.edge_values(arr)[pg._bp_index][idx]
    return out


def _scalar_or_array(t, arr):
    return float(arr[0]) if np.ndim(t) == 0 else arr


def kernel_Q(spec: EquationSpec, a: float, t, weight=None, profile=None):
    """``int_a^t w(s) q(s) ds``; ``t`` may be an array."""
    return _scalar_or_array(t, _chain(spec, a, t, _weight_fn(spec, profile, weight))["Q"])


def kernel_R2Q(spec: EquationSpec, a: float, t, weight=None, profile=None):
    """``int_a^t r2^(-1/beta)(u) (int_a^u w q)^(1/beta) du``.

    ``weight`` is ``None``, ``"pi"``, ``"pi1"`` (weights evaluated at
    ``sigma(s)`` and raised to gamma) or any callable ``w(s) >= 0``.
    """
    return _scalar_or_array(t, _chain(spec, a, t, _weight_fn(spec, profile, weight))["R2Q"])


def kernel_J(spec: EquationSpec, a: float, t, weight=None, profile=None):
    """The triple integral ``int_a^t r1^(-1/alpha) R2Q(a, .)^(1/alpha)``."""
    return _scalar_or_array(t, _chain(spec, a, t, _weight_fn(spec, profile, weight))["J"])


def _sigma_windows(spec: EquationSpec, t: float):
    """(E2_33, E2_29) windows at one ``t``: inner integrals run up to ``sigma(t)``."""
    st = float(spec.sigma(t))
    if st <= t:
        return 0.0, 0.0
    sst = float(spec.sigma(st))
    ib, ia = spec.beta.inverse.fraction, spec.alpha.inverse.fraction
    with np.errstate(over="ignore", invalid="ignore"):
        L = PanelGrid([t, st], grade_at=[st], max_ratio=1.25, levels=20)
        x = L.x
        Qr = L.reverse_cumulative(np.asarray(spec.q(x)))
        Rr = L.reverse_cumulative(signed_power(Qr / np.asarray(spec.r2(x)), ib))
        w33 = L.total(signed_power(Rr / np.asarray(spec.r1(x)), ia))
        Rg = PanelGrid([st, sst], grade_at=[st], max_ratio=1.25, levels=20)
        x = Rg.x
        Qn = -Rg.cumulative(np.asarray(spec.q(x)))
        inner = -Rg.cumulative(signed_power(Qn / np.asarray(spec.r2(x)), ib))
        w29 = w33 + Rg.total(signed_power(inner / np.asarray(spec.r1(x)), ia))
    return w33, w29


def _anchored_window(spec: EquationSpec, ts):
    """E2_28: ``J(t0, sigma(t)) - J(t0, t)``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    st = np.asarray(spec.sigma(ts), dtype=float)
    pts = np.unique(np.concatenate([ts, st]))
    J = _chain(spec, spec.t0, pts)["J"]
    lookup = dict(zip(pts.tolist(), J.tolist()))
    return np.array([lookup[b] - lookup[a] for a, b in zip(ts.tolist(), st.tolist())])


def kernel_window(spec: EquationSpec, t, variant: str):
    """Window integral ``E2_28``, ``E2_29`` or ``E2_33`` at ``t`` (scalar or array).

    An empty window (``sigma(t) = t``) gives 0.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if variant == "E2_28":
        out = _anchored_window(spec, ts)
    elif variant in ("E2_29", "E2_33"):
        pick = 0 if variant == "E2_33" else 1
        out = np.array([_sigma_windows(spec, float(s))[pick] for s in ts])
    else:
        raise ValueError(f"unknown window {variant!r}")
    return _scalar_or_array(t, out)


# -- the extremal lemma -----------------------------------------------------------------

def lemma_2_4_objective(u, A, B, C, alpha):
    """``g(u) = A u - B (u - C)^((alpha+1)/alpha)`` (the power is even, so of |u - C|)."""
    alpha = OddRational.parse(alpha)
    e = (alpha.fraction + 1) / alpha.fraction
    return A * np.asarray(u, dtype=float) - B * signed_power(np.asarray(u, dtype=float) - C, e)


def lemma_2_4_max(A: float, B: float, C: float, alpha) -> tuple[float, float]:
    """Maximiser and maximum of :func:`lemma_2_4_objective` for ``B > 0``."""
    if not B > 0:
        raise NonPositiveB(f"B must be positive, got {B!r}")
    alpha = OddRational.parse(alpha)
    a = alpha.fraction
    af = float(a)
    u_star = C + signed_power(af * A / ((af + 1) * B), a)
    peak = A * C + af ** af / (af + 1) ** (af + 1) * signed_power(A, a + 1) / B ** af
    return float(u_star), float(peak)


# -- rho and the Riccati-type criterion function ----------------------------------------

def _rho_values(spec, profile, rho: RhoFunction, x):
    a = float(spec.alpha)
    if rho.kind is RhoKind.ONE:
        return np.ones_like(x), np.zeros_like(x)
    p1 = np.asarray(profile.pi1(x))
    d1 = -np.asarray(profile.pi1.integrand(x))
    if rho.kind is RhoKind.PI1:
        return p1, d1
    if rho.kind is RhoKind.PI1_POW_ALPHA:
        return p1 ** a, a * p1 ** (a - 1) * d1
    return np.asarray(Expression(rho.body)(x), dtype=float), np.asarray(Expression(rho.derivative)(x), dtype=float)


def _riccati_samples(spec, profile, rho, T, ts, lam=0.0):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    a = float(spec.alpha)
    pg = PanelGrid(np.concatenate([[T], ts[ts > T]]), grade_at=[T], max_ratio=1.25)
    x = pg.x
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        Q = np.maximum(pg.cumulative(np.asarray(spec.q(x))), 0.0)
        g = signed_power(Q / np.asarray(spec.r2(x)), spec.beta.inverse.fraction)
        ratio = (np.asarray(profile.pi1(spec.sigma(x))) / np.asarray(profile.pi1(x))) ** (a - lam)
        r, dr = _rho_values(spec, profile, rho, x)
        if np.any(r <= 0):
            raise NonFiniteCriterionFunction("rho must be positive")
        loss = np.asarray(spec.r1(x)) * np.abs(dr) ** (a + 1) / ((a + 1) ** (a + 1) * r ** a)
        I = pg.cumulative(r * g * ratio - loss)
        at = pg.edge_values(I)[pg._bp_index][np.searchsorted(pg.breakpoints, ts)]
        r_t, _ = _rho_values(spec, profile, rho, ts)
        return np.asarray(profile.pi1(ts)) ** a / r_t * at


def riccati_criterion_function(spec: EquationSpec, profile: CanonicalProfile, rho, T: float, t,
                               lam: float | None = None):
    """Bracketed function of the Riccati-type limsup test at ``t`` (scalar or array).

    With ``lam`` the ratio ``pi1(sigma(u)) / pi1(u)`` is raised to
    ``alpha - lam`` instead of ``alpha``.
    """
    if not gamma_equals_alpha_beta(spec):
        raise HypothesisViolated("the Riccati-type test needs gamma = alpha * beta")
    profile.require_certified()
    rho = RhoFunction.parse(rho)
    return _scalar_or_array(t, _riccati_samples(spec, profile, rho, float(T), t, lam or 0.0))


def _refined_samples(spec, profile, lam, mu, t1, ts):
    a = float(spec.alpha)
    p1s = lambda s: np.asarray(profile.pi1(spec.sigma(s)))  # noqa: E731
    pg = PanelGrid(np.concatenate([[t1], ts[ts > t1]]), grade_at=[t1], max_ratio=1.25)
    x = pg.x
    with np.errstate(over="ignore", invalid="ignore"):
        Q = np.maximum(pg.cumulative(np.asarray(spec.q(x))), 0.0)
        g = signed_power(Q / np.asarray(spec.r2(x)), spec.beta.inverse.fraction)
        I = pg.cumulative(p1s(x) ** mu * g)
        at = pg.edge_values(I)[pg._bp_index][np.searchsorted(pg.breakpoints, ts)]
        return np.asarray(profile.pi1(ts)) ** lam * p1s(ts) ** (a - lam - mu) * at


def refined_criterion_function(spec, profile, lam, mu, t1, t):
    """Function under the limsup of the lambda/mu-refined test."""
    profile.require_certified()
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    return _scalar_or_array(t, _refined_samples(spec, profile, lam, mu, float(t1), ts))


# -- lambda / mu feasibility -------------------------------------------------------------

def lambda_bound(spec, profile, t1, ts):
    """Right side of the lambda bound at each ``t``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ch = _chain(spec, t1, ts)
    a = float(spec.alpha)
    p1 = np.asarray(profile.pi1(ts))
    return ch["R2Q'"] * np.asarray(profile.pi1(spec.sigma(ts))) ** a * p1 * signed_power(
        np.asarray(spec.r1(ts)), spec.alpha.inverse.fraction)


def mu_bound(spec, profile, t1, ts):
    """Right side of the mu bound at each ``t``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ch = _chain(spec, t1, ts)
    return float(spec.alpha) * signed_power(ch["R2Q"], spec.alpha.inverse.fraction) * \
        np.asarray(profile.pi1(spec.sigma(ts)))


def _bound_grid(t1, horizon, policy):
    return geometric_grid(t1, horizon, policy.grid_ratio)[1:]


def lambda_mu_bounds(spec, profile, t1, horizon, policy=DEFAULT_POLICY):
    """Infima of the lambda and mu bounds over the checked grid (``t1`` itself excluded)."""
    profile.require_certified()
    ts = _bound_grid(t1, horizon, policy)
    with np.errstate(over="ignore", invalid="ignore"):
        lb, mb = lambda_bound(spec, profile, t1, ts), mu_bound(spec, profile, t1, ts)
    lb = lb[np.isfinite(lb)]
    mb = mb[np.isfinite(mb)]
    return (float(lb.min()) if lb.size else 0.0), (float(mb.min()) if mb.size else 0.0)


def lambda_mu_feasible(spec, profile, candidate, t1, horizon, policy=DEFAULT_POLICY) -> bool:
    """Strict ``lambda + mu < alpha`` and both bounds respected on the grid."""
    lam, mu = candidate
    if lam < 0 or mu < 0 or not lam + mu < float(spec.alpha):
        return False
    if lam == 0 and mu == 0:
        return True
    lb, mb = lambda_mu_bounds(spec, profile, t1, horizon, policy)
    return lam <= lb and mu <= mb


# -- component evaluation ------------------------------------------------------------------

_THRESHOLDS = {"E2_28": INV_E, "E2_29": INV_E, "E2_33": INV_E}
_LIMINF = ("E2_28", "E2_29", "E2_33")
_DIVERGENCE = ("E2_1", "E2_3", "E2_11", "E2_19")
_RICCATI_RHO = {"E2_42": PI1_POW_ALPHA, "E2_43": PI1, "E2_44": ONE, "E2_59": PI1_POW_ALPHA}


def threshold(spec, cid: CriterionId) -> float:
    if cid.name in _THRESHOLDS:
        return _THRESHOLDS[cid.name]
    if cid.name == "E2_53":
        return (1 - (cid.lam or 0.0) / float(spec.alpha)) ** float(spec.alpha)
    return 1.0


class _Context:
    """Shared state for one analysis: spec, profile, options and caches."""

    def __init__(self, spec, profile, options):
        self.spec = spec
        self.profile = profile
        self.options = options
        self.H = options.horizon_for(spec)
        self.euler = None
        if options.path != "numeric":
            from .euler import EulerSpec
            try:
                self.euler = EulerSpec.from_spec(spec)
            except NotEulerType:
                if options.path == "euler":
                    raise
        self._cache = {}

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def t1_values(self):
        base = max(self.spec.t0, 1.0)
        return tuple(base * f for f in self.options.t1_factors)

    def grid(self, start):
        return geometric_grid(start, self.H, self.options.policy.grid_ratio)[1:]


def criterion_function(ctx_or_spec, cid, profile=None, options=None):
    """``(grid, values)`` of the function under a limsup/liminf, or of the
    partial integrals of a divergence test, on the numeric sample grid."""
    ctx = ctx_or_spec if isinstance(ctx_or_spec, _Context) else _Context(
        ctx_or_spec, profile, options or EvaluationOptions(path="numeric"))
    cid = CriterionId.parse(cid)
    spec, prof = ctx.spec, ctx.profile
    name = cid.name
    if name in _DIVERGENCE:
        hs = spec.t0 * 2.0 ** np.arange(1, int(math.log2(ctx.H / spec.t0)) + 1)
        if name in ("E2_3", "E2_11"):
            w = _weight_fn(spec, prof, "pi") if name == "E2_11" else None
            ch = _chain(spec, spec.t0, hs, w)
            f = np.asarray(spec.q(hs)) * (np.asarray(w(hs)) if w else 1.0)
            return hs, ch["Q"], f
        w = _weight_fn(spec, prof, "pi") if name == "E2_19" else None
        ch = _chain(spec, spec.t0, hs, w)
        return hs, ch["J"], ch["J'"]
    if name in ("E2_23", "E2_27"):
        t1 = spec.t0 if name == "E2_27" or cid.t1 is None else cid.t1
        ts = ctx.grid(t1)
        gb = float(spec.gamma.fraction / spec.beta.fraction)
        vals = np.asarray(prof.pi1(spec.sigma(ts))) ** gb * _chain(spec, t1, ts)["R2Q"]
        return ts, vals
    if name in _LIMINF:
        ts = ctx.grid(spec.t0)
        if name == "E2_28":
            return ts, _anchored_window(spec, ts)
        w = ctx.cached("sigma_windows", lambda: np.array([_sigma_windows(spec, float(t)) for t in ts]))
        return ts, w[:, 0 if name == "E2_33" else 1]
    if name in ("E2_35", "E2_42", "E2_43", "E2_44", "E2_58", "E2_59"):
        rho = cid.rho if name in ("E2_35", "E2_58") else _RICCATI_RHO[name]
        if rho is None:
            rho = ONE
        lam = (cid.lam or 0.0) if name in ("E2_58", "E2_59") else 0.0
        T = spec.t0 if cid.t1 is None else cid.t1
        ts = ctx.grid(T)
        return ts, _riccati_samples(spec, prof, rho, T, ts, lam)
    if name == "E2_53":
        t1 = spec.t0 if cid.t1 is None else cid.t1
        ts = ctx.grid(t1)
        return ts, _refined_samples(spec, prof, cid.lam or 0.0, cid.mu or 0.0, t1, ts)
    raise ValueError(f"{cid} has no criterion function")


def _numeric_component(ctx: _Context, cid: CriterionId) -> CriterionResult:
    spec, opts = ctx.spec, ctx.options
    name = cid.name
    try:
        out = criterion_function(ctx, cid)
    except (NonFiniteIntegrand, NonFiniteCriterionFunction, OverflowError, ZeroDivisionError) as exc:
        return CriterionResult(cid, Verdict.INCONCLUSIVE, notes=f"numeric failure: {exc}")
    if name in _DIVERGENCE:
        hs, partials, f = out
        finite = np.isfinite(partials) & np.isfinite(f)
        if not finite.all():
            k = int(np.argmin(finite))
            hs, partials, f = hs[:k], partials[:k], f[:k]
        res = judge_tail(hs, partials, f, tol=opts.tol, policy=opts.policy) if hs.size >= 2 else \
            TailResult(TailKind.INCONCLUSIVE)
        if res.diverged:
            return CriterionResult(cid, Verdict.SATISFIED, evidence=res, samples=(hs, partials),
                                   notes=f"partial integrals diverge (growth exponent {res.growth_exponent:.4g})")
        note = "integral appears to converge" if res.converged else "divergence not established"
        return CriterionResult(cid, Verdict.INCONCLUSIVE, evidence=res, samples=(hs, partials),
                               notes=f"{note} up to t = {hs[-1]:.4g}" if hs.size else note)
    ts, vals = out
    kind = LimitKind.LIMINF if name in _LIMINF else LimitKind.LIMSUP
    finite = np.isfinite(vals)
    if not finite.all():
        if kind is LimitKind.LIMSUP and np.any(vals[~finite] == np.inf) and not np.any(np.isnan(vals)):
            k = int(np.argmin(finite))
        else:
            return CriterionResult(cid, Verdict.INCONCLUSIVE, samples=(ts, vals),
                                   notes="criterion function is not finite on the grid")
        ts, vals = ts[:k], vals[:k]
        if ts.size < 2:
            return CriterionResult(cid, Verdict.INCONCLUSIVE, notes="criterion function overflows")
    est = limit_from_samples(kind, ts, vals, opts.policy)
    theta = threshold(spec, cid)
    # a limsup estimate on a falling tail is only trusted at its last value
    value = est.estimate
    if kind is LimitKind.LIMSUP and est.trend is Trend.FALLING:
        value = float(vals[-1])
    need = theta * (1 + opts.margin)
    sym = ">" if kind is LimitKind.LIMSUP else ">="
    if value > need:
        return CriterionResult(cid, Verdict.SATISFIED, evidence=est, samples=(ts, vals),
                               notes=f"{kind.value} estimate {value:.6g} {sym} {theta:.6g} with margin")
    return CriterionResult(cid, Verdict.INCONCLUSIVE, evidence=est, samples=(ts, vals),
                           notes=f"{kind.value} estimate {value:.6g} does not clear {need:.6g}")


def _euler_component(ctx: _Context, cid: CriterionId) -> CriterionResult:
    from .euler import euler_reduce

    try:
        red = euler_reduce(ctx.euler, cid)
    except BoundaryExponent as exc:
        if ctx.options.path == "euler":
            res = _numeric_component(ctx, cid)
            return CriterionResult(cid, res.verdict, evidence=res.evidence, samples=res.samples,
                                   notes=f"closed form unavailable ({exc}); numeric fallback: {res.notes}")
        raise
    verdict = Verdict.SATISFIED if red.satisfied else Verdict.NOT_SATISFIED
    return CriterionResult(cid, verdict, evidence=red, path="euler", notes=red.symbolic_trace)


def evaluate_component(ctx: _Context, cid: CriterionId) -> CriterionResult:
    key = ("component", str(cid))
    if key in ctx._cache:
        return ctx._cache[key]
    res = None
    if ctx.euler is not None and (ctx.options.path == "euler" or ctx.options.path == "auto"):
        try:
            res = _euler_component(ctx, cid)
        except BoundaryExponent:
            res = None
    if res is None:
        res = _numeric_component(ctx, cid)
    ctx._cache[key] = res
    return res


def _feasibility(ctx: _Context, lam, mu, t1s) -> CriterionResult:
    key = f"feasible(lambda={lam:.12g},mu={mu:.12g})"
    a = float(ctx.spec.alpha)
    numeric = ctx.euler is None or ctx.options.path == "numeric"
    if not lam + mu < a:
        return CriterionResult(key, Verdict.INCONCLUSIVE if numeric else Verdict.NOT_SATISFIED,
                               notes="lambda + mu must be < alpha", path="numeric" if numeric else "euler")
    ok = all(lambda_mu_feasible(ctx.spec, ctx.profile, (lam, mu), t1, ctx.H, ctx.options.policy) for t1 in t1s)
    if ok:
        return CriterionResult(key, Verdict.SATISFIED, notes="bounds hold on the checked grid",
                               path="numeric" if numeric else "euler")
    return CriterionResult(key, Verdict.INCONCLUSIVE if numeric else Verdict.NOT_SATISFIED,
                           notes="a bound is violated on the checked grid", path="numeric" if numeric else "euler")


# -- theorems ----------------------------------------------------------------------------------

_COROLLARY_RHO = {"C2_2": PI1_POW_ALPHA, "C2_3": PI1, "C2_4": ONE}
_RICCATI_COMPONENT = {"C2_2": "E2_42", "C2_3": "E2_43", "C2_4": "E2_44"}


def _plan(ctx: _Context, cid: CriterionId):
    """Quantified component lists of a theorem without lambda/mu search."""
    C = CriterionId
    name = cid.name
    t1s = ctx.t1_values()
    if name == "T2_1":
        return [("all", [C("E2_1")])]
    if name == "T2_2":
        return [("all", [C("E2_19")])]
    if name == "T2_3":
        return [("all", [C("E2_23", t1=t) for t in t1s])]
    if name == "T2_4":
        return [("all", [C("E2_1")]), ("all", [C("E2_27")])]
    if name == "T2_5":
        return [("all", [C("E2_28")]), ("all", [C("E2_29")])]
    if name == "T2_7":
        return [("all", [C("E2_19")]), ("all", [C("E2_29")])]
    if name == "T2_8":
        return [("all", [C("E2_23", t1=t) for t in t1s]), ("all", [C("E2_33")])]
    if name == "T2_9":
        return [("all", [C("E2_1")]), ("all", [C("E2_27")]), ("all", [C("E2_33")])]
    if name == "T2_10":
        rho = cid.rho or PI1_POW_ALPHA
        return [("all", [C("E2_3")]), ("all", [C("E2_33")]), ("all", [C("E2_35", rho=rho, t1=t) for t in t1s])]
    if name in _COROLLARY_RHO:
        comp = _RICCATI_COMPONENT[name]
        return [("all", [C("E2_3")]), ("all", [C("E2_33")]), ("all", [C(comp, t1=t) for t in t1s])]
    raise ValueError(name)


def _lambda_candidates(ctx, with_mu: bool):
    opts = ctx.options
    a = float(ctx.spec.alpha)
    if opts.lambda_mu:
        return [tuple(map(float, c)) if with_mu else (float(c[0]), 0.0) for c in opts.lambda_mu]
    bounds = [lambda_mu_bounds(ctx.spec, ctx.profile, t1, ctx.H, opts.policy) for t1 in ctx.t1_values()]
    lb = min(b[0] for b in bounds)
    mb = min(b[1] for b in bounds)
    lams = sorted({0.0, 0.5 * lb, 0.95 * lb})
    mus = sorted({0.0, 0.5 * mb, 0.95 * mb}) if with_mu else [0.0]
    return [(lam, mu) for lam in lams for mu in mus if lam + mu < a]


def _lambda_theorem(ctx: _Context, cid: CriterionId):
    """Parts of T2_11, T2_12 and C2_5, possibly over a candidate set."""
    C = CriterionId
    name = cid.name
    t1s = ctx.t1_values()
    if name == "T2_11":
        given = cid.lam is not None or cid.mu is not None
        cands = [(cid.lam or 0.0, cid.mu or 0.0)] if given else _lambda_candidates(ctx, True)
    else:
        given = cid.lam is not None
        cands = [(cid.lam, 0.0)] if given else _lambda_candidates(ctx, False)

    def parts_for(lam, mu):
        if name == "T2_11":
            return [("all", [C("E2_33")]), ("all", [(lam, mu)]),
                    ("all", [C("E2_53", lam=lam, mu=mu, t1=t) for t in t1s])]
        if name == "T2_12":
            rho = cid.rho or PI1_POW_ALPHA
            return [("all", [C("E2_3")]), ("all", [C("E2_33")]), ("all", [(lam, 0.0)]),
                    ("any", [C("E2_58", rho=rho, lam=lam, t1=t) for t in t1s])]
        return [("all", [C("E2_3")]), ("all", [C("E2_33")]), ("all", [(lam, 0.0)]),
                ("all", [C("E2_59", lam=lam, t1=t) for t in t1s])]

    if given:
        return parts_for(*cands[0]), None
    return None, [(lam, mu, parts_for(lam, mu)) for lam, mu in cands]


def _realise(ctx, parts):
    out = []
    for q, items in parts:
        results = []
        for it in items:
            if isinstance(it, tuple):
                results.append(_feasibility(ctx, it[0], it[1], ctx.t1_values()))
            else:
                results.append(evaluate_component(ctx, it))
        out.append((q, tuple(results)))
    return tuple(out)


def _verdict_of(parts):
    return combine_all(_COMBINE[q](r.verdict for r in rs) for q, rs in parts)


def _hypotheses(spec, cid):
    hyp = ["noncanonical: pi1(t0) and pi2(t0) converge"]
    if cid.name not in ("T2_1", "T2_2"):
        hyp.append("gamma = alpha * beta")
    return tuple(hyp)


def _path_of(parts):
    paths = {r.path for _, rs in parts for r in rs}
    return "euler" if paths == {"euler"} else ("numeric" if paths == {"numeric"} else "mixed")


def _theorem(ctx: _Context, cid: CriterionId) -> CriterionResult:
    spec = ctx.spec
    if cid.name not in ("T2_1", "T2_2") and not gamma_equals_alpha_beta(spec):
        raise HypothesisViolated(f"{cid.name} needs gamma = alpha * beta (gamma = {spec.gamma}, "
                                 f"alpha * beta = {spec.alpha.fraction * spec.beta.fraction})")
    if cid.name in ("T2_11", "T2_12", "C2_5"):
        parts, cands = _lambda_theorem(ctx, cid)
        if cands is not None:
            subs = []
            for lam, mu, p in cands:
                sub_id = cid.with_(lam=lam, mu=mu if cid.name == "T2_11" else None)
                realised = _realise(ctx, p)
                subs.append(CriterionResult(sub_id, _verdict_of(realised), cid.conclusion,
                                            parts=realised, path=_path_of(realised)))
            parts = (("any", tuple(subs)),)
            verdict = combine_any(s.verdict for s in subs)
            return CriterionResult(cid, verdict, cid.conclusion, hypotheses_checked=_hypotheses(spec, cid),
                                   parts=parts, path=_path_of(parts),
                                   notes=f"{len(subs)} lambda/mu candidates tried")
    else:
        parts = _plan(ctx, cid)
    realised = _realise(ctx, parts)
    return CriterionResult(cid, _verdict_of(realised), cid.conclusion, hypotheses_checked=_hypotheses(spec, cid),
                           parts=realised, path=_path_of(realised))


def evaluate_criterion(spec: EquationSpec, profile: CanonicalProfile, id, options: EvaluationOptions | None = None,
                       *, _ctx: _Context | None = None) -> CriterionResult:
    """Evaluate a theorem, corollary or component condition.

    Raises :class:`UndecidedTail` when the profile is not certified and
    :class:`HypothesisViolated` when a theorem needs gamma = alpha * beta.
    """
    options = options or EvaluationOptions()
    profile.require_certified()
    cid = CriterionId.parse(id)
    ctx = _ctx or _Context(spec, profile, options)
    if cid.is_theorem:
        return _theorem(ctx, cid)
    return evaluate_component(ctx, cid)


def make_context(spec, profile, options=None):
    """Shared evaluation context so several criteria reuse kernels and windows."""
    return _Context(spec, profile, options or EvaluationOptions())


# -- conclusions -----------------------------------------------------------------------------

@dataclass
class AnalysisReport:
    """Everything a run produced; :meth:`to_dict` is deterministic."""

    spec: dict
    profile: dict
    results: list
    property_a: dict
    oscillatory: dict
    discrepancy_notes: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)
    applied_remarks: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def to_dict(self):
        return _clean({
            "spec": self.spec,
            "canonical_profile": self.profile,
            "results": [r.to_dict() for r in self.results],
            "property_A": self.property_a,
            "oscillatory": self.oscillatory,
            "discrepancy_notes": list(self.discrepancy_notes),
            "applied_remarks": list(self.applied_remarks),
            "skipped": list(self.skipped),
            "runtime": self.runtime,
        })

    def result(self, id) -> CriterionResult:
        key = str(CriterionId.parse(id)) if not isinstance(id, str) or "(" not in id else id
        for r in self.results:
            if r.key == key or r.key == str(id):
                return r
        raise KeyError(id)


#: (premise, consequence): the premise being Satisfied grants the consequence
REMARK_IMPLICATIONS = (("E2_33", "E2_29"), ("E2_1", "E2_3"))


def _upgrade(result: CriterionResult, granted: dict) -> CriterionResult:
    if not result.parts:
        src = granted.get(result.key)
        if src and result.verdict is not Verdict.SATISFIED:
            return CriterionResult(result.id, Verdict.SATISFIED, result.conclusion_kind, result.evidence,
                                   result.hypotheses_checked, f"granted by {src} Satisfied; " + result.notes,
                                   result.path, samples=result.samples)
        return result
    parts = tuple((q, tuple(_upgrade(r, granted) for r in rs)) for q, rs in result.parts)
    new = _verdict_of(parts)
    if result.verdict is Verdict.SATISFIED or new is not Verdict.SATISFIED:
        new = result.verdict
    return CriterionResult(result.id, new, result.conclusion_kind, result.evidence, result.hypotheses_checked,
                           result.notes, result.path, parts, result.samples)


def conclude(spec: EquationSpec, results, profile: CanonicalProfile | None = None) -> AnalysisReport:
    """Apply the logical implications between conditions and derive the flags.

    Implications: a Satisfied E2_33 grants E2_29, a Satisfied E2_1 grants
    E2_3, everywhere in the result tree.  Verdicts are only ever upgraded.
    Oscillation implies property A.
    """
    results = list(results)
    leaves = {}
    for r in results:
        for leaf in r.leaves():
            if leaf.verdict is Verdict.SATISFIED:
                leaves.setdefault(leaf.key, leaf)
    granted, applied = {}, []
    for premise, consequence in REMARK_IMPLICATIONS:
        if premise in leaves:
            granted[consequence] = premise
            applied.append(f"{premise} Satisfied grants {consequence}")
    results = sorted((_upgrade(r, granted) for r in results), key=lambda r: r.key)

    def flag(names):
        sat = [r.key for r in results if isinstance(r.id, CriterionId) and r.id.name in names
               and r.verdict is Verdict.SATISFIED]
        if sat:
            return {"verdict": Verdict.SATISFIED.value, "granted_by": sat[0]}
        return {"verdict": Verdict.INCONCLUSIVE.value, "granted_by": None}

    osc = flag(OSCILLATION_THEOREMS)
    prop = flag(PROPERTY_A_THEOREMS)
    if prop["granted_by"] is None and osc["granted_by"] is not None:
        prop = dict(osc)
    return AnalysisReport(spec=spec.to_dict(), profile=profile.summary() if profile else {}, results=results,
                          property_a=prop, oscillatory=osc, applied_remarks=applied)


def analyze(spec: EquationSpec, ids, options: EvaluationOptions | None = None,
            profile: CanonicalProfile | None = None) -> AnalysisReport:
    """Certify the profile, evaluate ``ids`` and conclude.

    Theorems whose structural hypothesis fails are recorded as Inconclusive
    with the note "not applicable".
    """
    options = options or EvaluationOptions()
    profile = profile or check_noncanonical(spec)
    profile.require_certified()
    ctx = _Context(spec, profile, options)
    results = []
    for i in ids:
        cid = CriterionId.parse(i)
        try:
            results.append(evaluate_criterion(spec, profile, cid, options, _ctx=ctx))
        except HypothesisViolated as exc:
            results.append(CriterionResult(cid, Verdict.INCONCLUSIVE, cid.conclusion,
                                           hypotheses_checked=_hypotheses(spec, cid),
                                           notes=f"not applicable: {exc}", path="none"))
    return conclude(spec, results, profile)
