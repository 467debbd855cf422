"""Finite sums of ``c * t**e * log(t)**k`` with an optional O-remainder.

This is the small amount of symbolic algebra the closed-form path needs:
products, powers, antiderivatives and windows ``F(delta t) - F(t)`` of
power/log terms.  Non-integer powers of multi-term sums are expanded by the
binomial series around the leading term; the truncation is tracked as a
remainder ``O(t**E log(t)**K)`` so limits can still be read off the leading
term whenever it dominates the remainder.

Exponents and coefficients of exact series are exact fractions (float inputs
are converted exactly), so integer powers of long sums stay exact even when
their terms cancel by many orders of magnitude near the lower limit of an
integral.  Evaluation runs at 60 significant digits.  Series that carry a
remainder are only used for limits and work at double precision.
"""

from __future__ import annotations

import decimal
import math
from fractions import Fraction

from .errors import ClosedFormUnavailable
from .model import signed_power

#: exponents that agree to this many decimals count as one order of growth
EXP_DIGITS = 9
#: a group of like terms summing to less than this fraction of its
#: contributions counts as cancelled when the leading term is picked
CANCEL_RTOL = 1e-12
#: binomial expansions stop once terms are this many powers of t below the lead
EXPANSION_DEPTH = 3.0
#: ... and after at most this many orders
MAX_EXPANSION_ORDER = 16
#: expansions larger than this are abandoned (the caller falls back to numerics)
MAX_TERMS = 2000

_DEC = decimal.Context(prec=60)
_ZERO = Fraction(0)


def _frac(x) -> Fraction:
    """Exact rational copy of a number (floats are dyadic rationals)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ClosedFormUnavailable(f"non-finite value {x!r}")
    return Fraction(x)


def _dec(x) -> decimal.Decimal:
    if isinstance(x, float):
        return decimal.Decimal(x)
    return _DEC.divide(decimal.Decimal(x.numerator), decimal.Decimal(x.denominator))


def _key(e, k):
    """Order of growth of ``t^e log(t)^k``, with float drift in ``e`` rounded away."""
    return (round(float(e), EXP_DIGITS) + 0.0, int(k))


def _is_minus_one(e):
    return abs(float(e) + 1.0) < 1e-9


class Series:
    """Immutable power/log series in one variable ``t``.

    ``terms`` maps ``(exponent, log power)`` (exponent an exact fraction) to
    the coefficient.  ``mag`` keeps, per term, the size of the contributions
    it was summed from: inputs carry float rounding, so a group of terms of
    one order far below its ``mag`` is read as a cancellation when limits
    are taken.  ``remainder`` is an order key ``(exponent, log power)``.
    """

    __slots__ = ("terms", "remainder", "mag")

    def __init__(self, terms=None, remainder=None, mag=None):
        self.terms = {key: c for key, c in (terms or {}).items()
                      if c != 0 and (remainder is None or _key(*key) > remainder)}
        self.remainder = remainder
        mag = mag or {}
        self.mag = {key: mag.get(key, abs(float(c))) for key, c in self.terms.items()}

    # -- construction ------------------------------------------------------------
    @classmethod
    def monomial(cls, coef, exponent=0.0, logpower=0):
        return cls({(_frac(exponent), int(logpower)): _frac(coef)})

    @classmethod
    def constant(cls, value):
        return cls.monomial(value, 0, 0)

    @classmethod
    def _accumulate(cls, pieces, remainder, approx=None):
        """Sum ``(exponent, logpower, coef, magnitude)`` pieces over equal exponents.

        A series with a remainder is only asymptotic and never evaluated, so
        its like orders are merged and its coefficients kept as floats;
        exact rational arithmetic there only makes truncated expansions grow.
        """
        acc, mag = {}, {}
        approx = remainder is not None if approx is None else approx
        if approx:
            rep = {}
            for e, k, c, m in pieces:
                order = _key(e, k)
                key = rep.get(order)
                if key is None:
                    key = rep[order] = (_frac(float(e)), int(k))
                acc[key] = acc.get(key, 0.0) + float(c)
                mag[key] = max(mag.get(key, 0.0), m)
            return cls(acc, remainder, mag)
        for e, k, c, m in pieces:
            key = (e, int(k))
            acc[key] = acc.get(key, _ZERO) + c
            mag[key] = max(mag.get(key, 0.0), m)
        return cls(acc, remainder, mag)

    def _pieces(self):
        return [(e, k, c, self.mag[(e, k)]) for (e, k), c in self.terms.items()]

    def _groups(self):
        """Terms grouped by order of growth: key -> [sum, size, representative term]."""
        groups = {}
        for (e, k), c in self.terms.items():
            g = groups.setdefault(_key(e, k), [_ZERO, 0.0, None])
            g[0] += c
            g[1] += self.mag[(e, k)]
            if g[2] is None or abs(c) > abs(self.terms[g[2]]):
                g[2] = (e, k)
        return groups

    def _significant(self):
        return {key: g for key, g in self._groups().items() if abs(float(g[0])) > CANCEL_RTOL * g[1]}

    def _scale_at(self, t):
        """Size of the summands at ``t``: reference for what cancels there."""
        t = float(t)
        lt = abs(math.log(t))
        return math.fsum(self.mag[(e, k)] * t ** float(e) * lt ** k for (e, k) in self.terms)

    # -- inspection ---------------------------------------------------------------
    @property
    def exact(self):
        return self.remainder is None

    @property
    def is_zero(self):
        return not self.terms and self.remainder is None

    def order(self):
        """Largest order key present (term or remainder), or ``None`` for zero."""
        keys = list(self._significant())
        if self.remainder is not None:
            keys.append(self.remainder)
        return max(keys) if keys else None

    def leading(self):
        """``(coef, exponent, logpower)`` of the dominant known term, as floats."""
        c, e, k = self._lead()
        return float(c), float(e), k

    def _lead(self):
        sig = self._significant()
        if not sig:
            raise ClosedFormUnavailable("series has no known leading term")
        key = max(sig)
        if self.remainder is not None and key <= self.remainder:
            raise ClosedFormUnavailable("leading term is swamped by the remainder")
        total, _, (e, k) = sig[key]
        return total, e, k

    def __repr__(self):
        return f"Series({self.describe()})"

    def describe(self, var="t"):
        parts = []
        for (e, k) in sorted(self.terms, reverse=True):
            s = f"{float(self.terms[(e, k)]):.12g}"
            if e != 0:
                s += f"*{var}^{float(e):.10g}"
            if k:
                s += f"*ln({var})^{k}"
            parts.append(s)
        if self.remainder is not None:
            e, k = self.remainder
            parts.append(f"O({var}^{e:.10g}" + (f"*ln({var})^{k}" if k else "") + ")")
        return " + ".join(parts) if parts else "0"

    # -- arithmetic ---------------------------------------------------------------
    @staticmethod
    def _max_rem(*rems):
        rems = [r for r in rems if r is not None]
        return max(rems) if rems else None

    def __add__(self, other):
        other = _coerce(other)
        rem = self._max_rem(self.remainder, other.remainder)
        return Series._accumulate(self._pieces() + other._pieces(), rem)

    __radd__ = __add__

    def __neg__(self):
        return Series({key: -c for key, c in self.terms.items()}, self.remainder, self.mag)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return Series()
        pieces = [(e1 + e2, k1 + k2, c1 * c2, m1 * m2)
                  for e1, k1, c1, m1 in self._pieces()
                  for e2, k2, c2, m2 in other._pieces()]
        rems = []
        lead_self, lead_other = self.order(), other.order()
        if self.remainder is not None:
            rems.append(_key(self.remainder[0] + lead_other[0], self.remainder[1] + lead_other[1]))
        if other.remainder is not None:
            rems.append(_key(other.remainder[0] + lead_self[0], other.remainder[1] + lead_self[1]))
        return Series._accumulate(pieces, self._max_rem(*rems))

    __rmul__ = __mul__

    def truncated(self, order):
        """Absorb every term at or below ``order`` into the remainder."""
        return Series(self.terms, self._max_rem(self.remainder, order), self.mag)

    def __pow__(self, p):
        p = p.fraction if hasattr(p, "fraction") else p
        if isinstance(p, int) or (isinstance(p, Fraction) and p.denominator == 1) or (
                isinstance(p, float) and p.is_integer()):
            n = int(p)
            if n < 0:
                raise ClosedFormUnavailable("negative integer powers are not supported")
            out, base = Series.constant(1), self
            while n:
                if n & 1:
                    out = out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        pf = float(p)
        if self.is_zero:
            return Series()
        c, e, k = self._lead()
        if k * pf != int(k * pf):
            raise ClosedFormUnavailable("fractional power of a logarithm")
        if isinstance(p, Fraction):
            cp = signed_power(float(c), p)
        else:
            cp = math.copysign(abs(float(c)) ** pf, float(c))
        pq = p if isinstance(p, Fraction) else _frac(pf)
        lead_pow = Series.monomial(cp, e * pq, int(k * pf))
        if len(self.terms) == 1 and self.remainder is None:
            return lead_pow
        x = self * Series.monomial(1 / c, -e, -k) - 1
        xe, xk = x.order()
        jmax = min(MAX_EXPANSION_ORDER, math.ceil(EXPANSION_DEPTH / -xe)) if xe < 0 else 8
        cut = _key((jmax + 1) * xe, (jmax + 1) * xk)
        total = Series.constant(1)
        power = Series.constant(1)
        binom = Fraction(1)
        for j in range(1, jmax + 1):
            binom *= (pq - j + 1) / j
            power = (power * x).truncated(cut)
            total = total + binom * power
            if len(total.terms) > MAX_TERMS:
                raise ClosedFormUnavailable(f"binomial expansion exceeds {MAX_TERMS} terms")
        return lead_pow * total.truncated(cut)

    # -- calculus -------------------------------------------------------------------
    @staticmethod
    def _antiderivative_terms(e, k, c):
        if k < 0:
            raise ClosedFormUnavailable("antiderivative of a negative log power")
        if _is_minus_one(e):
            return [(_ZERO, k + 1, c / (k + 1))]
        f = e + 1
        out = []
        fall = 1
        for j in range(k + 1):
            out.append((f, k - j, c * (-1) ** j * fall / f ** (j + 1)))
            fall *= (k - j)
        return out

    def antiderivative(self):
        """An antiderivative of the exact part (the remainder is ignored)."""
        pieces = []
        for e, k, c, m in self._pieces():
            for f, j, d in self._antiderivative_terms(e, k, c):
                pieces.append((f, j, d, m * abs(float(d / c))))
        return Series._accumulate(pieces, None, approx=not self.exact)

    def _integrated_remainder(self, window=False):
        if self.remainder is None:
            return None
        e, k = self.remainder
        if _is_minus_one(e):
            return (0.0, k) if window else (0.0, k + 1)
        if e > -1 or window:
            return _key(e + 1, k)
        return (0.0, 0)  # convergent tail: an unknown constant remains

    def integrate_from(self, a):
        """``int_a^t f(s) ds`` as a series in ``t``."""
        F = self.antiderivative()
        const = (_ZERO, 0, -Fraction(F._evaluate(a)), F._scale_at(a))
        return Series._accumulate(F._pieces() + [const], self._integrated_remainder(), approx=not self.exact)

    def integral_to(self, b):
        """``int_t^b f(s) ds`` as a series in ``t`` (exact series only)."""
        self._require_exact()
        F = self.antiderivative()
        const = (_ZERO, 0, Fraction(F._evaluate(b)), F._scale_at(b))
        return Series._accumulate([const], None) - F

    def definite(self, a, b):
        self._require_exact()
        F = self.antiderivative()
        return float(_DEC.subtract(F._evaluate(b), F._evaluate(a)))

    def window(self, delta):
        """``int_t^{delta t} f(s) ds`` as a series in ``t``."""
        F = self.antiderivative()
        ln_d = _DEC.ln(decimal.Decimal(float(delta)))
        ld = Fraction(ln_d)
        pieces = []
        for f, j, c, m in F._pieces():
            dm = Fraction(_DEC.exp(_DEC.multiply(_dec(f), ln_d)))
            for i in range(j + 1):
                w = math.comb(j, i) * ld ** (j - i)
                pieces.append((f, i, c * dm * w, m * float(dm) * abs(float(w))))
            pieces.append((f, j, -c, m))
        return Series._accumulate(pieces, self._integrated_remainder(window=True))

    # -- evaluation ---------------------------------------------------------------
    def _require_exact(self):
        if self.remainder is not None:
            raise ClosedFormUnavailable("series is only known up to " + self.describe())

    def _evaluate(self, t) -> decimal.Decimal:
        self._require_exact()
        lt = _DEC.ln(decimal.Decimal(float(t)))
        total = decimal.Decimal(0)
        for (e, k), c in self.terms.items():
            term = _DEC.multiply(_dec(c), _DEC.exp(_DEC.multiply(_dec(e), lt)))
            if k:
                term = _DEC.multiply(term, _DEC.power(lt, k))
            total = _DEC.add(total, term)
        return total

    def evaluate(self, t):
        return float(self._evaluate(t))

    def condition(self, t):
        """Sum of absolute term values over the absolute sum at ``t``: how much
        rounding in the data would be amplified by summing the terms."""
        self._require_exact()
        t = float(t)
        lt = math.log(t)
        vals = [float(c) * t ** float(e) * lt ** k for (e, k), c in self.terms.items()]
        total = abs(float(self._evaluate(t)))
        return math.fsum(abs(v) for v in vals) / total if total else math.inf

    def limit(self):
        """``lim_{t -> inf}``: a float, ``+-inf``, or :class:`ClosedFormUnavailable`."""
        if not self._significant():
            if self.remainder is None or self.remainder < (0.0, 0):
                return 0.0
            raise ClosedFormUnavailable("limit is hidden in the remainder")
        c, e, k = self.leading()
        key = _key(e, k)
        if key > (0.0, 0):
            return math.copysign(math.inf, c)
        if key == (0.0, 0):
            return c
        return 0.0


def _coerce(x):
    return x if isinstance(x, Series) else Series.constant(x)


def integral_diverges(integrand: Series) -> bool:
    """Whether ``int^inf`` of a series with positive leading term diverges."""
    _, e, k = integrand.leading()
    if _is_minus_one(e):
        return k >= -1
    return e > -1
