"""Explicit reduced inequalities for the one-third family.

For ``r1 = t^m``, ``r2 = t^n``, ``alpha = 1``, ``beta = gamma = 1/3``,
``q = q0 t^(m/3 + n - 5/3)`` and ``sigma(t) = delta t`` the limsup test from
``t1``, the liminf window anchored at ``t0`` and the liminf window anchored
at ``sigma(t)`` collapse to the polynomial/log inequalities below.  Each
function returns ``(lhs, rhs)``; the condition holds iff ``lhs > rhs``.

These formulas are independent of :mod:`halfosc.series` and serve as a
cross-check.  Multiplying the general closed-form limit and threshold by the
matching ``*_normalizer`` reproduces ``lhs`` and ``rhs``.
"""

import math


def limsup_condition(m, n, delta, q0):
    return 27 * q0 ** 3 * delta ** (1 - m), (m + 3 * n - 2) ** 3 * (m - 1) ** 2


def limsup_normalizer(m, n):
    return (m + 3 * n - 2) ** 3 * (m - 1) ** 2


def window_condition(m, n, delta, q0):
    return 27 * q0 ** 3 * math.log(delta), (m + 3 * n - 2) ** 3 * (m - 1) / math.e


def window_normalizer(m, n):
    return (m + 3 * n - 2) ** 3 * (m - 1)


def local_window_condition(m, n, delta, q0):
    """Raises ZeroDivisionError on the lines 2m - 3n - 1 = 0 and m - 6n + 1 = 0."""
    s = m + 3 * n - 2
    d = delta
    brace = (
        (d ** s - 1) / (s * (3 * n - 1))
        + math.log(d) / (m - 1)
        + 27 * (d ** ((2 * m + 6 * n - 4) / 3) - 1) / ((m - 6 * n + 1) * (2 * m + 6 * n - 4))
        - 27 * (d ** (s / 3) - 1) / ((2 * m - 3 * n - 1) * s)
        - (d ** (m - 1) - 1) / (m - 1) * (
            1 / (3 * n - 1) + 9 / (m - 6 * n + 1) - 9 / (2 * m - 3 * n - 1) + 1 / (m - 1))
    )
    return 27 * q0 ** 3 * brace, s ** 3 / math.e


def local_window_normalizer(m, n):
    return (m + 3 * n - 2) ** 3
