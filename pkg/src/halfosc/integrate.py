"""Quadrature, improper tails and finite-horizon limit estimation.

Three layers:

* :func:`integrate` - adaptive Gauss-Kronrod on a finite interval (QUADPACK).
* :func:`integrate_to_infinity` - horizon doubling with power-law tail
  extrapolation and an explicit divergence rule; :func:`judge_tail` holds the
  decision logic so precomputed partial integrals can be judged the same way.
* :class:`PanelGrid` - Chebyshev panels with a spectral integration matrix,
  used to evaluate the triple-nested kernels cumulatively on a whole grid.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import integrate as sp_integrate

from .errors import NonFiniteCriterionFunction, NonFiniteIntegrand, ToleranceNotMet, UndecidedTail


@dataclass(frozen=True)
class HorizonPolicy:
    """Knobs for tail judgement and limit estimation."""

    max_horizon_factor: float = 1e8
    grid_ratio: float = 1.25
    tail_window: int = 20
    divergence_ratio: float = 1.5
    divergence_decades: int = 3
    plateau_rtol: float = 1e-9
    max_subdivisions: int = 2**15

    def __post_init__(self):
        if not 1 < self.grid_ratio <= 2:
            raise ValueError("grid_ratio must lie in (1, 2]")
        if self.max_horizon_factor < 10:
            raise ValueError("max_horizon_factor must be at least 10")
        if self.tail_window < 2:
            raise ValueError("tail_window must be at least 2")


DEFAULT_POLICY = HorizonPolicy()


class Quadrature(NamedTuple):
    value: float
    abs_error: float


def _checked(f):
    def wrapped(x):
        v = f(x)
        v = float(v)
        if not math.isfinite(v):
            raise NonFiniteIntegrand(f"integrand is {v!r} at x = {x!r}")
        return v
    return wrapped


def integrate(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, *,
              rtol: float = 1e-12, limit: int = 2**15) -> Quadrature:
    """Integral of ``f`` over ``[a, b]`` with an absolute error estimate.

    ``b = inf`` is delegated to :func:`integrate_to_infinity` and raises
    :class:`UndecidedTail` unless that converges.  When QUADPACK exhausts
    ``limit`` subintervals the best value is returned and a
    :class:`ToleranceNotMet` warning is issued.
    """
    a, b = float(a), float(b)
    if b == math.inf:
        tail = integrate_to_infinity(f, a, tol)
        if tail.kind is not TailKind.CONVERGED:
            raise UndecidedTail(f"integral to infinity is {tail.kind.value}")
        return Quadrature(tail.value, tail.abs_error)
    if not a <= b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if a == b:
        return Quadrature(0.0, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        res = sp_integrate.quad(_checked(f), a, b, epsabs=tol, epsrel=rtol,
                                limit=limit, full_output=1)
    value, err, info = res[0], res[1], res[2]
    ier = 0 if len(res) == 3 else 1
    if ier or err > max(tol, rtol * abs(value), 1e-300) * 10:
        warnings.warn(ToleranceNotMet(
            f"quadrature on [{a:.6g}, {b:.6g}] reached error {err:.3g} after "
            f"{info.get('last', '?')} subintervals"), stacklevel=2)
    return Quadrature(float(value), float(err))


# -- tails ---------------------------------------------------------------------

class TailKind(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailResult:
    kind: TailKind
    value: float = math.nan           # converged value, or partial value if inconclusive
    abs_error: float = math.nan
    growth_exponent: float = math.nan  # diverged: local exponent of f plus one
    horizon: float = math.nan

    @property
    def converged(self):
        return self.kind is TailKind.CONVERGED

    @property
    def diverged(self):
        return self.kind is TailKind.DIVERGED

    def to_dict(self):
        return {
            "type": "tail",
            "kind": self.kind.value,
            "value": self.value,
            "abs_error": self.abs_error,
            "growth_exponent": self.growth_exponent,
            "horizon": self.horizon,
        }


def _local_exponents(h, fv):
    """d log|f| / d log t between consecutive samples (nan where undefined)."""
    p = np.full(h.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        same = np.sign(fv[1:]) * np.sign(fv[:-1]) > 0
        ratio = np.log(np.abs(fv[1:]) / np.abs(fv[:-1])) / np.log(h[1:] / h[:-1])
    p[1:] = np.where(same, ratio, np.nan)
    both_zero = (fv[1:] == 0) & (fv[:-1] == 0)
    p[1:][both_zero] = -np.inf
    return p


def judge_tail(horizons, partials, integrand, *, tol: float = 1e-10, rtol: float = 1e-10,
               policy: HorizonPolicy = DEFAULT_POLICY, quad_error: float = 0.0) -> TailResult:
    """Decide convergence of ``int_a^inf f`` from partial integrals.

    ``partials[i]`` is the integral from the lower limit to ``horizons[i]``
    and ``integrand[i]`` is ``f(horizons[i])``.  The first event along the
    horizon sequence wins, so extending the sequence never revokes a verdict:

    * converged: the power-law tail extrapolation ``I + H f(H) / (-p - 1)``
      (``p`` the local log-log slope of ``f``) is stable to
      ``max(tol, rtol |I|)`` over three consecutive horizons, or ``f`` has
      vanished;
    * diverged: ``p >= -1`` throughout the last ``divergence_decades``
      decades and the partial integral grew monotonically across them by at
      least ``divergence_ratio``.
    """
    h = np.asarray(horizons, dtype=float)
    I = np.asarray(partials, dtype=float)
    fv = np.asarray(integrand, dtype=float)
    p = _local_exponents(h, fv)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tail = np.where(p < -1 - 1e-9, h * fv / (-p - 1), np.nan)
        tail = np.where(p == -np.inf, 0.0, tail)
    est = I + tail
    span = 10.0 ** policy.divergence_decades
    for i in range(1, len(h)):
        if not math.isfinite(I[i]):
            grow = p[i] + 1 if math.isfinite(p[i]) else math.inf
            return TailResult(TailKind.DIVERGED, growth_exponent=float(grow), horizon=float(h[i]))
        if i >= 2 and np.all(np.isfinite(est[i - 2:i + 1])):
            scale = max(tol, rtol * abs(est[i]))
            d1, d2 = abs(est[i] - est[i - 1]), abs(est[i - 1] - est[i - 2])
            if d1 <= scale and d2 <= scale:
                return TailResult(TailKind.CONVERGED, float(est[i]), float(d1 + quad_error), horizon=float(h[i]))
        j = int(np.searchsorted(h, h[i] / span * (1 + 1e-12), side="right")) - 1
        if j >= 0 and j < i:
            seg = I[j:i + 1]
            slopes = p[j + 1:i + 1]
            if (np.all(np.diff(seg) > 0) and np.all(slopes >= -1 - 1e-6)
                    and seg[-1] > 0 and (seg[0] <= 0 or seg[-1] / seg[0] >= policy.divergence_ratio)):
                return TailResult(TailKind.DIVERGED, growth_exponent=float(p[i] + 1), horizon=float(h[i]))
    return TailResult(TailKind.INCONCLUSIVE, value=float(I[-1]), horizon=float(h[-1]))


def integrate_to_infinity(f: Callable[[float], float], a: float, tol: float = 1e-10,
                          policy: HorizonPolicy = DEFAULT_POLICY, *, rtol: float = 1e-10) -> TailResult:
    """Judge and, if convergent, evaluate ``int_a^inf f(s) ds``.

    The horizon doubles from ``a`` up to ``a * policy.max_horizon_factor``;
    see :func:`judge_tail` for the decision rules.
    """
    a = float(a)
    head = 0.0
    head_err = 0.0
    start = a
    if a <= 0:
        head, head_err = integrate(f, a, 1.0, tol / 4)
        start = 1.0
    fcheck = _checked(f)
    horizons = [start]
    partials = [head]
    fvals = [fcheck(start)]
    qerr = head_err
    hmax = start * policy.max_horizon_factor
    result = None
    h = start
    while h * 2 <= hmax * (1 + 1e-12):
        nxt = h * 2
        piece, err = integrate(f, h, nxt, tol * 1e-3, rtol=1e-13, limit=policy.max_subdivisions)
        qerr += err
        horizons.append(nxt)
        partials.append(partials[-1] + piece)
        fvals.append(fcheck(nxt))
        h = nxt
        result = judge_tail(horizons, partials, fvals, tol=tol, rtol=rtol, policy=policy, quad_error=qerr)
        if result.kind is not TailKind.INCONCLUSIVE:
            return result
    if result is None:
        result = TailResult(TailKind.INCONCLUSIVE, value=head, horizon=start)
    return result


# -- limit estimation ---------------------------------------------------------------

class LimitKind(enum.Enum):
    LIMSUP = "limsup"
    LIMINF = "liminf"


class Trend(enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    PLATEAU = "plateau"


@dataclass(frozen=True)
class LimitEstimate:
    kind: LimitKind
    estimate: float
    horizon: float
    tail_window_width: int
    trend: Trend
    grid: np.ndarray = field(repr=False, compare=False, default=None)
    values: np.ndarray = field(repr=False, compare=False, default=None)

    def to_dict(self):
        return {
            "type": "limit",
            "kind": self.kind.value,
            "estimate": self.estimate,
            "horizon": self.horizon,
            "tail_window_width": self.tail_window_width,
            "trend": self.trend.value,
        }


def geometric_grid(t_start: float, horizon: float, ratio: float) -> np.ndarray:
    n = int(math.floor(math.log(horizon / t_start) / math.log(ratio) + 1e-9))
    return t_start * ratio ** np.arange(n + 1)


def limit_from_samples(kind: LimitKind, grid, values, policy: HorizonPolicy = DEFAULT_POLICY) -> LimitEstimate:
    """Tail-window extremum and trend of precomputed samples."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        bad = np.argmax(~np.isfinite(values))
        raise NonFiniteCriterionFunction(f"criterion function is {values[bad]!r} at t = {grid[bad]:.6g}")
    width = min(policy.tail_window, len(values))
    window = values[-width:]
    est = float(window.max() if kind is LimitKind.LIMSUP else window.min())
    change = window[-1] - window[0]
    scale = max(float(np.abs(window).max()), 1e-300)
    if abs(change) <= policy.plateau_rtol * scale:
        trend = Trend.PLATEAU
    else:
        trend = Trend.RISING if change > 0 else Trend.FALLING
    return LimitEstimate(kind, est, float(grid[-1]), width, trend, grid, values)


def _sample(g, grid):
    try:
        vals = np.asarray(g(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
        if vals.ndim == 0:
            return np.full(grid.shape, float(vals))
    except (TypeError, ValueError):
        pass
    return np.array([float(g(t)) for t in grid])


def _estimate(kind, g, t_start, policy, horizon):
    policy = policy or DEFAULT_POLICY
    horizon = float(horizon) if horizon is not None else t_start * policy.max_horizon_factor
    if horizon < 10 * t_start:
        raise ValueError("horizon must be at least 10 * t_start")
    grid = geometric_grid(t_start, horizon, policy.grid_ratio)
    with np.errstate(all="ignore"):
        values = _sample(g, grid)
    return limit_from_samples(kind, grid, values, policy)


def estimate_limsup(g, t_start: float, policy: HorizonPolicy | None = None, *, horizon=None) -> LimitEstimate:
    """Limsup estimate: max of ``g`` over the last grid points of ``t_start * ratio**k``.

    A nondecreasing ``g`` gets an estimate at or below its limit.
    """
    return _estimate(LimitKind.LIMSUP, g, float(t_start), policy, horizon)


def estimate_liminf(g, t_start: float, policy: HorizonPolicy | None = None, *, horizon=None) -> LimitEstimate:
    """Liminf estimate; for a nonincreasing ``g`` it is at or above the limit."""
    return _estimate(LimitKind.LIMINF, g, float(t_start), policy, horizon)


# -- panel quadrature for nested integrals -------------------------------------

@functools.lru_cache(maxsize=None)
def _cheb_rule(order: int):
    """Lobatto nodes on [-1, 1] and the matrix mapping samples to running integrals."""
    nodes = -np.cos(np.pi * np.arange(order + 1) / order)
    V = C.chebvander(nodes, order)
    S = np.empty((order + 1, order + 1))
    for k in range(order + 1):
        c = np.zeros(order + 1)
        c[k] = 1.0
        S[:, k] = C.chebval(nodes, C.chebint(c, lbnd=-1))
    M = np.linalg.solve(V.T, S.T).T
    return nodes, M


class PanelGrid:
    """Piecewise Chebyshev discretisation of an interval.

    The interval between consecutive breakpoints is split into geometric
    panels of ratio at most ``max_ratio``; panels next to ``grade_at`` points
    are refined dyadically (``levels`` halvings) to absorb endpoint
    singularities such as ``(u - a)**(1/beta)``.  Functions are sampled on
    ``self.x`` (shape ``(panels, order + 1)``) and integrated with
    :meth:`cumulative` / :meth:`reverse_cumulative`.
    """

    def __init__(self, breakpoints, *, order: int = 16, max_ratio: float = 1.5,
                 grade_at=(), levels: int = 30):
        grade_at = np.atleast_1d(np.asarray(grade_at, dtype=float))
        bp = np.unique(np.concatenate([np.asarray(breakpoints, dtype=float).ravel(), grade_at]))
        if bp.size < 2:
            raise ValueError("need at least two distinct breakpoints")
        edges = [bp[:1]]
        log_r = math.log(max_ratio)
        for x0, x1 in zip(bp[:-1], bp[1:]):
            if x0 > 0:
                n = max(1, math.ceil(math.log(x1 / x0) / log_r - 1e-9))
                pts = x0 * (x1 / x0) ** (np.arange(1, n + 1) / n)
            else:
                n = max(1, math.ceil((x1 - x0) / max(abs(x1), 1.0)))
                pts = x0 + (x1 - x0) * np.arange(1, n + 1) / n
            pts[-1] = x1
            edges.append(pts)
        e = np.concatenate(edges)
        extra = []
        for g in grade_at:
            i = int(np.searchsorted(e, g))
            if i < len(e) - 1:
                w = e[i + 1] - g
                extra.append(g + w * 2.0 ** -np.arange(1, levels + 1))
            if i > 0:
                w = g - e[i - 1]
                extra.append(g - w * 2.0 ** -np.arange(1, levels + 1))
        if extra:
            e = np.unique(np.concatenate([e] + extra))
        self.edges = e
        self.order = order
        nodes, self._M = _cheb_rule(order)
        mid = 0.5 * (e[1:] + e[:-1])
        self._half = 0.5 * (e[1:] - e[:-1])
        self.x = mid[:, None] + self._half[:, None] * nodes[None, :]
        self.x[:, 0] = e[:-1]
        self.x[:, -1] = e[1:]
        self._bp_index = np.searchsorted(e, bp)
        self.breakpoints = bp

    def _local(self, f):
        f = np.asarray(f, dtype=float)
        return self._half[:, None] * (f @ self._M.T)

    def cumulative(self, f):
        """Running integral from the left end to every node."""
        local = self._local(f)
        totals = local[:, -1]
        offsets = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        return local + offsets[:, None]

    def reverse_cumulative(self, f):
        """Integral from every node to the right end."""
        local = self._local(f)
        totals = local[:, -1]
        after = np.concatenate([np.cumsum(totals[::-1])[::-1][1:], [0.0]])
        return (totals[:, None] - local) + after[:, None]

    def total(self, f) -> float:
        return float(self._local(f)[:, -1].sum())

    def edge_values(self, vals):
        vals = np.asarray(vals)
        return np.concatenate([vals[:, 0], vals[-1:, -1]])

    def at_breakpoints(self, vals):
        """Values of a node function at the (deduplicated, sorted) breakpoints."""
        return self.edge_values(vals)[self._bp_index]
