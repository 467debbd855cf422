"""Tail functions of the inverse coefficients.

    pi1(t) = int_t^inf r1^(-1/alpha),   pi2(t) = int_t^inf r2^(-1/beta),
    pi(t)  = int_t^inf r1^(-1/alpha) pi2^(1/alpha).

Single power-law coefficients get closed forms.  Otherwise the tails are
tabulated once on the grid ``t0 * 1.05**k`` by backward spectral
integration and interpolated by cubic Hermite splines in log-log
coordinates, using the exact derivatives ``pi1' = -r1^(-1/alpha)`` etc.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import CanonicalOperator, UndecidedTail
from .integrate import (DEFAULT_POLICY, PanelGrid, TailKind, TailResult, geometric_grid,
                        integrate_to_infinity)
from .model import EquationSpec, signed_power

CACHE_RATIO = 1.05
#: default cache reach, as a multiple of t0 before the double advance sigma(sigma(.))
CACHE_HORIZON = 1e8


def inverse_power(fn, r):
    """``t -> fn(t)**(-1/r)`` for a positive coefficient and odd-rational ``r``."""
    inv = -1 / r.fraction

    def f(t):
        return signed_power(fn(t), inv)
    return f


@dataclass(frozen=True)
class TailFunction:
    """A tail integral ``T(t) = int_t^inf f``: closed form or tabulated."""

    integrand: Callable
    closed: Callable | None = None
    _spline: object = field(default=None, repr=False)
    _grid_end: float = math.inf
    _beyond: Callable | None = field(default=None, repr=False)

    @property
    def is_closed(self):
        return self.closed is not None

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.closed is not None:
            out = self.closed(t_arr)
        else:
            out = np.empty(t_arr.shape)
            flat_t, flat_o = t_arr.reshape(-1), out.reshape(-1)
            inside = flat_t <= self._grid_end
            if inside.any():
                flat_o[inside] = np.exp(self._spline(np.log(flat_t[inside])))
            for i in np.flatnonzero(~inside):
                flat_o[i] = self._beyond(float(flat_t[i]))
        return out if t_arr.ndim else float(out)

    def derivative(self, t):
        return -np.asarray(self.integrand(t), dtype=float)


@dataclass(frozen=True)
class CanonicalProfile:
    """pi1, pi2, pi for one equation, plus the tail verdicts at t0."""

    pi1: TailFunction
    pi2: TailFunction
    pi: TailFunction
    pi1_total: TailResult
    pi2_total: TailResult
    closed_form_available: bool
    t0: float
    cache_end: float = math.inf

    @property
    def certified(self):
        return self.pi1_total.converged and self.pi2_total.converged

    def require_certified(self):
        if not self.certified:
            raise UndecidedTail(
                f"noncanonical hypothesis undecided (pi1: {self.pi1_total.kind.value}, "
                f"pi2: {self.pi2_total.kind.value})")

    def summary(self):
        return {
            "closed_form": self.closed_form_available,
            "pi1_tail": self.pi1_total.to_dict(),
            "pi2_tail": self.pi2_total.to_dict(),
            "pi1_t0": self.pi1_total.value,
            "pi2_t0": self.pi2_total.value,
        }


def _monomial_tail(coef, exponent, r):
    """Closed form of ``int_t^inf (coef s^exponent)^(-1/r)`` or ``None``.

    Raises :class:`CanonicalOperator` when the tail diverges by exponent.
    """
    inv = 1.0 / float(r)
    c = coef ** -inv
    e = -exponent * inv
    if abs(e + 1) < 1e-12:
        warnings.warn("tail exponent is exactly -1; using the numeric tail", RuntimeWarning, stacklevel=3)
        return None
    if e > -1:
        raise CanonicalOperator(f"int^inf of s^{e:g} diverges")
    amp = c / (-e - 1)
    return amp, e + 1


def _tabulate(integrand, grid_pts, tail_at_end, *, t0):
    """Backward cumulative tail on ``grid_pts`` (must end at the cache top)."""
    pg = PanelGrid(grid_pts, order=16, max_ratio=CACHE_RATIO)
    vals = pg.reverse_cumulative(integrand(pg.x)) + tail_at_end
    return pg, vals


def _spline(grid_pts, values, slopes):
    """Cubic Hermite interpolant of log T against log t."""
    x = np.log(grid_pts)
    y = np.log(values)
    dy = -grid_pts * slopes / values
    return CubicHermiteSpline(x, y, dy)


def _tail_or_raise(f, t0, tol, name):
    res = integrate_to_infinity(f, t0, tol, DEFAULT_POLICY, rtol=1e-9)
    if res.kind is TailKind.DIVERGED:
        raise CanonicalOperator(f"{name}(t0) = int_t0^inf diverges (growth exponent {res.growth_exponent:.3g})")
    return res


def check_noncanonical(spec: EquationSpec, *, closed_forms: bool = True,
                       cache_horizon: float = CACHE_HORIZON, tol: float = 0.0) -> CanonicalProfile:
    """Certify (or refute) convergence of pi1(t0), pi2(t0) and build the profile.

    Raises :class:`CanonicalOperator` when a tail diverges.  An undecided tail
    is recorded in the profile; :func:`eval_pi1` and friends then refuse with
    :class:`UndecidedTail`.  ``closed_forms=False`` forces the tabulated path
    (used to cross-check the closed forms).
    """
    t0 = spec.t0
    f1 = inverse_power(spec.r1, spec.alpha)
    f2 = inverse_power(spec.r2, spec.beta)
    inv_a = 1 / spec.alpha.fraction

    mono1 = spec.r1.monomial if closed_forms else None
    mono2 = spec.r2.monomial if closed_forms else None
    c1 = _monomial_tail(*mono1, spec.alpha) if mono1 else None
    c2 = _monomial_tail(*mono2, spec.beta) if mono2 else None

    if c1 is not None:
        a1, e1 = c1
        pi1_total = TailResult(TailKind.CONVERGED, a1 * t0 ** e1, 0.0)
    else:
        pi1_total = _tail_or_raise(f1, t0, tol, "pi1")
    if c2 is not None:
        a2, e2 = c2
        pi2_total = TailResult(TailKind.CONVERGED, a2 * t0 ** e2, 0.0)
    else:
        pi2_total = _tail_or_raise(f2, t0, tol, "pi2")

    def pi_integrand_from(pi2_fn):
        def g(t):
            return np.asarray(f1(t)) * signed_power(pi2_fn(t), inv_a)
        return g

    if c1 is not None and c2 is not None:
        a1, e1 = c1
        a2, e2 = c2
        coef = -a1 * e1  # amplitude of r1^(-1/alpha)
        f = (e1 - 1) + e2 / float(spec.alpha)
        amp = coef * a2 ** float(inv_a) / (-f - 1)
        pi1 = TailFunction(f1, closed=lambda t, a=a1, e=e1: a * t ** e)
        pi2 = TailFunction(f2, closed=lambda t, a=a2, e=e2: a * t ** e)
        pi = TailFunction(pi_integrand_from(pi2), closed=lambda t, a=amp, e=f + 1: a * t ** e)
        return CanonicalProfile(pi1, pi2, pi, pi1_total, pi2_total, True, t0)

    if not (pi1_total.converged and pi2_total.converged):
        dead = TailFunction(f1, closed=lambda t: np.full(np.shape(t), np.nan))
        return CanonicalProfile(dead, dead, dead, pi1_total, pi2_total, False, t0)

    sig = spec.sigma
    top = float(sig(sig(t0 * cache_horizon))) * CACHE_RATIO
    grid_pts = geometric_grid(t0, top, CACHE_RATIO)
    top = float(grid_pts[-1])

    def direct(f):
        def tail(t):
            res = integrate_to_infinity(f, t, tol, DEFAULT_POLICY, rtol=1e-10)
            if not res.converged:
                raise UndecidedTail(f"tail from t = {t:.6g} is {res.kind.value}")
            return res.value
        return tail

    def build(f, closed):
        if closed is not None:
            a, e = closed
            return TailFunction(f, closed=lambda t, a=a, e=e: a * t ** e), None
        pg, vals = _tabulate(f, grid_pts, direct(f)(top), t0=t0)
        at = pg.at_breakpoints(vals)
        spl = _spline(grid_pts, at, np.asarray(f(grid_pts)))
        return TailFunction(f, _spline=spl, _grid_end=top, _beyond=direct(f)), (pg, vals)

    pi1, _ = build(f1, c1)
    pi2, tab2 = build(f2, c2)

    # pi needs pi2 at quadrature nodes: exact nodal values when tabulated
    g = pi_integrand_from(pi2)
    pg = PanelGrid(grid_pts, order=16, max_ratio=CACHE_RATIO)
    if tab2 is not None and tab2[0].x.shape == pg.x.shape:
        pi2_nodes = tab2[1]
    else:
        pi2_nodes = pi2(pg.x)
    g_nodes = np.asarray(f1(pg.x)) * signed_power(pi2_nodes, inv_a)

    # beyond the table pi2 is continued as a power law with its end slope
    p2_top = float(pi2(top))
    slope2 = -top * float(f2(top)) / p2_top

    def pi2_far(t):
        t = np.asarray(t, dtype=float)
        return p2_top * (t / top) ** slope2

    def g_far(t):
        return np.asarray(f1(t)) * signed_power(pi2_far(t), inv_a)

    tail_top = integrate_to_infinity(g_far, top, tol, DEFAULT_POLICY, rtol=1e-10)
    if not tail_top.converged:
        raise UndecidedTail(f"pi tail beyond t = {top:.6g} is {tail_top.kind.value}")
    vals = pg.reverse_cumulative(g_nodes) + tail_top.value
    at = pg.at_breakpoints(vals)
    spl = _spline(grid_pts, at, np.asarray(g(grid_pts)))

    def pi_beyond(t):
        res = integrate_to_infinity(g_far, t, tol, DEFAULT_POLICY, rtol=1e-10)
        if not res.converged:
            raise UndecidedTail(f"pi tail from t = {t:.6g} is {res.kind.value}")
        return res.value

    pi = TailFunction(g, _spline=spl, _grid_end=top, _beyond=pi_beyond)
    return CanonicalProfile(pi1, pi2, pi, pi1_total, pi2_total, False, t0, cache_end=top)


def eval_pi1(profile: CanonicalProfile, t):
    profile.require_certified()
    return profile.pi1(t)


def eval_pi2(profile: CanonicalProfile, t):
    profile.require_certified()
    return profile.pi2(t)


def eval_pi(profile: CanonicalProfile, t):
    profile.require_certified()
    return profile.pi(t)
