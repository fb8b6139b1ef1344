"""Truncated Puiseux series with per-series truncation tracking.

A series is sum_{k=e0}^{N-1} c_k * z**(k/r), with r the ramification index and
N the first *unknown* exponent (exclusive, in units of 1/r).  Every operation
returns the weakest truncation order its inputs guarantee; asking for a
coefficient at or beyond the window raises TruncationError instead of
silently returning zero.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .fields import QQ, QuadField, quad_sqrt

import mpmath as mp


class TruncationError(ArithmeticError):
    pass


def _sqrt_scalar(field, c):
    if getattr(field, "exact", False):
        if isinstance(field, QuadField) and field.D != 1:
            return field.sqrt_rational(
                c.as_fraction() if hasattr(c, "as_fraction") else c)
        return quad_sqrt(c, 1)
    return mp.sqrt(c)


class PuiseuxSeries:
    """Dense truncated series over a coefficient field."""

    __slots__ = ("field", "r", "e0", "coeffs", "ntrunc")

    def __init__(self, field, coeffs, e0=0, ntrunc=None, r=1):
        self.field = field
        self.r = r
        self.e0 = e0
        self.coeffs = [field.coerce(c) for c in coeffs]
        self.ntrunc = e0 + len(self.coeffs) if ntrunc is None else ntrunc
        if self.ntrunc < e0 + len(self.coeffs):
            raise ValueError("coefficients past the truncation order")
        # pad so the window is dense
        self.coeffs += [field.zero] * (self.ntrunc - e0 - len(self.coeffs))

    # -- constructors -------------------------------------------------------

    @classmethod
    def var(cls, field, ntrunc, r=1):
        """The series z, known to order ntrunc."""
        return cls(field, [field.one], e0=r, ntrunc=ntrunc, r=r)

    @classmethod
    def const(cls, field, c, ntrunc, r=1):
        return cls(field, [field.coerce(c)], e0=0, ntrunc=ntrunc, r=r)

    # -- bookkeeping ---------------------------------------------------------

    def _rescale(self, r2):
        """Rewrite with ramification r2 (a multiple of r)."""
        if r2 == self.r:
            return self
        if r2 % self.r:
            raise ValueError("ramification must grow by integer factor")
        m = r2 // self.r
        coeffs = [self.field.zero] * (len(self.coeffs) * m)
        coeffs[::m] = self.coeffs
        return PuiseuxSeries(self.field, coeffs, self.e0 * m,
                             self.ntrunc * m, r2)

    def valuation(self):
        """Exponent (Fraction) of the lowest known nonzero term; None if all
        known coefficients vanish (the series is O(z^(ntrunc/r)))."""
        for i, c in enumerate(self.coeffs):
            if not self.field.is_zero(c):
                return Fraction(self.e0 + i, self.r)
        return None

    def _val_units(self):
        v = self.valuation()
        return self.ntrunc if v is None else int(v * self.r)

    def coeff(self, q):
        """Coefficient of z**q (q a Fraction or int)."""
        q = Fraction(q)
        k = q * self.r
        if k >= self.ntrunc:
            raise TruncationError(
                f"coefficient at z^{q} beyond truncation {self.ntrunc}/{self.r}")
        if k.denominator != 1:
            return self.field.zero
        k = int(k)
        if k < self.e0:
            return self.field.zero
        return self.coeffs[k - self.e0]

    def residue(self):
        """Coefficient of z**(-1); the window must cover exponent -1."""
        return self.coeff(Fraction(-1))

    def truncate(self, ntrunc):
        ntrunc = min(ntrunc, self.ntrunc)
        if ntrunc <= self.e0:
            return PuiseuxSeries(self.field, [], e0=ntrunc, ntrunc=ntrunc,
                                 r=self.r)
        return PuiseuxSeries(self.field, self.coeffs[:ntrunc - self.e0],
                             self.e0, ntrunc, self.r)

    def _trim(self):
        """Drop leading stored zeros (window unchanged)."""
        i = 0
        while i < len(self.coeffs) and self.field.is_zero(self.coeffs[i]):
            i += 1
        if i == 0:
            return self
        return PuiseuxSeries(self.field, self.coeffs[i:], self.e0 + i,
                             self.ntrunc, self.r)

    def is_zero(self):
        return all(self.field.is_zero(c) for c in self.coeffs)

    # -- ring operations -----------------------------------------------------

    def _align(self, other):
        if not isinstance(other, PuiseuxSeries):
            # scalars carry this series' window
            other = PuiseuxSeries(self.field, [other], 0,
                                  max(self.ntrunc, 1), self.r)
        r = self.r * other.r // gcd(self.r, other.r)
        return self._rescale(r), other._rescale(r)

    def __add__(self, other):
        a, b = self._align(other)
        nt = min(a.ntrunc, b.ntrunc)
        e0 = min(a.e0, b.e0, nt)
        coeffs = [a.field.zero] * (nt - e0)
        for src in (a, b):
            for i, c in enumerate(src.coeffs):
                k = src.e0 + i
                if k < nt:
                    coeffs[k - e0] = coeffs[k - e0] + c
        return PuiseuxSeries(a.field, coeffs, e0, nt, a.r)._trim()

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(self.field, [-c for c in self.coeffs], self.e0,
                             self.ntrunc, self.r)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PuiseuxSeries)
                       else PuiseuxSeries(self.field, [-self.field.coerce(other)],
                                          0, self.ntrunc, self.r))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            c = self.field.coerce(other)
            return PuiseuxSeries(self.field, [x * c for x in self.coeffs],
                                 self.e0, self.ntrunc, self.r)
        a, b = self._align(other)
        va, vb = a._val_units(), b._val_units()
        nt = min(a.ntrunc + vb, b.ntrunc + va)
        e0 = va + vb
        if nt <= e0:
            return PuiseuxSeries(a.field, [], e0=nt, ntrunc=nt, r=a.r)
        coeffs = [a.field.zero] * (nt - e0)
        for i, ca in enumerate(a.coeffs):
            if a.field.is_zero(ca):
                continue
            ka = a.e0 + i
            for j, cb in enumerate(b.coeffs):
                k = ka + b.e0 + j
                if k >= nt:
                    break
                if k >= e0:
                    coeffs[k - e0] = coeffs[k - e0] + ca * cb
        return PuiseuxSeries(a.field, coeffs, e0, nt, a.r)

    __rmul__ = __mul__

    def inverse(self):
        """1/self; leading coefficient must be known and nonzero."""
        s = self._trim()
        v = s.valuation()
        if v is None:
            raise TruncationError("division by series with unknown leading term")
        vu = int(v * s.r)
        n = s.ntrunc - vu  # relative precision
        c0 = s.coeffs[0]
        inv0 = s.field.inv(c0)
        out = [inv0] + [s.field.zero] * (n - 1)
        for k in range(1, n):
            acc = s.field.zero
            for j in range(1, k + 1):
                if j < len(s.coeffs):
                    acc = acc + s.coeffs[j] * out[k - j]
            out[k] = -inv0 * acc
        return PuiseuxSeries(s.field, out, -vu, n - vu, s.r)

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self * other.inverse()
        return self * self.field.inv(self.field.coerce(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        # start from a window wide enough not to throttle the product
        start = self.ntrunc + max(n - 1, 0) * max(self._val_units(), 0)
        acc = PuiseuxSeries(self.field, [self.field.one], 0, max(start, 1),
                            self.r)
        base = self
        m = n
        while m:
            if m & 1:
                acc = acc * base
            m >>= 1
            if m:
                base = base * base
        return acc

    # -- transcendental-ish operations ---------------------------------------

    def derivative(self):
        coeffs = []
        for i, c in enumerate(self.coeffs):
            k = self.e0 + i
            coeffs.append(c * Fraction(k, self.r))
        return PuiseuxSeries(self.field, coeffs, self.e0 - self.r,
                             self.ntrunc - self.r, self.r)._trim()

    def integrate(self):
        """Antiderivative with zero constant; fails on a z**-1 term."""
        coeffs = []
        for i, c in enumerate(self.coeffs):
            k = self.e0 + i
            if k == -self.r:
                if not self.field.is_zero(c):
                    raise ValueError("cannot integrate a z^-1 term")
                coeffs.append(self.field.zero)
            else:
                coeffs.append(c * Fraction(self.r, k + self.r))
        return PuiseuxSeries(self.field, coeffs, self.e0 + self.r,
                             self.ntrunc + self.r, self.r)._trim()

    def binomial_pow(self, q):
        """self**q for rational q; self must have constant term 1."""
        if self.e0 > 0 or self.field.is_zero(self.coeff(0)) \
                or self.coeff(0) != self.field.one:
            raise ValueError("binomial_pow needs leading term 1")
        q = Fraction(q)
        u = self - self.field.one
        nt = self.ntrunc
        out = PuiseuxSeries(self.field, [self.field.one], 0, nt, self.r)
        term = PuiseuxSeries(self.field, [self.field.one], 0, nt, self.r)
        vu = u._val_units()
        if vu <= 0:
            if u.is_zero():
                return out
            raise ValueError("binomial_pow needs leading term exactly 1")
        kmax = (nt // vu) + 1
        for k in range(1, kmax + 1):
            term = term * u * (Fraction(q - (k - 1)) / k)
            if term._val_units() >= nt:
                break
            out = out + term
        return out.truncate(nt)

    def sqrt(self, max_r=2):
        """Square root; odd valuation doubles r up to max_r."""
        s = self._trim()
        v = s.valuation()
        if v is None:
            raise TruncationError("sqrt of series with unknown leading term")
        vu = int(v * s.r)
        if vu % 2:
            if 2 * s.r > max_r:
                raise ValueError(
                    f"sqrt needs ramification {2*s.r} > limit {max_r}")
            s = s._rescale(2 * s.r)
            vu *= 2
        c0 = s.coeffs[0]
        root = _sqrt_scalar(s.field, c0)
        root = s.field.coerce(root)
        body = (s * self.field.inv(c0))
        body = PuiseuxSeries(s.field, body.coeffs, 0, body.ntrunc - vu, s.r)
        half = body.binomial_pow(Fraction(1, 2))
        out = half * root
        return PuiseuxSeries(out.field, out.coeffs, out.e0 + vu // 2,
                             out.ntrunc + vu // 2, out.r)

    def log1p(self):
        """log of self, requiring constant term exactly 1."""
        if self.coeff(0) != self.field.one:
            raise ValueError("log1p needs constant term 1")
        u = (self - self.field.one)._trim()
        if u.is_zero():
            return PuiseuxSeries(self.field, [], 0, self.ntrunc, self.r)
        nt = self.ntrunc
        out = PuiseuxSeries(self.field, [], 0, nt, self.r)
        term = PuiseuxSeries(self.field, [self.field.one], 0, nt, self.r)
        vu = u._val_units()
        kmax = nt // vu + 1
        sign = 1
        for k in range(1, kmax + 1):
            term = term * u
            if term._val_units() >= nt:
                break
            out = out + term * Fraction(sign, k)
            sign = -sign
        return out.truncate(nt)

    def compose(self, inner):
        """self(inner); inner must have strictly positive valuation.

        If self has ramification r > 1, inner**(1/r) must exist as a series
        (only r = 2 supported, via sqrt).
        """
        v = inner.valuation()
        if v is None or v <= 0:
            raise ValueError("compose needs inner valuation > 0")
        if self.r != 1:
            inner = inner.nth_root(self.r)
        return self._compose_int(inner)

    def _compose_int(self, inner):
        """Composition treating self's exponent units as integer powers."""
        field = self.field
        v_in = inner._val_units()
        # the unknown tail of self enters at order ntrunc * val(inner)
        nt = min(inner.ntrunc, self.ntrunc * v_in)
        out = PuiseuxSeries(inner.field, [], 0, nt, inner.r)
        if self.e0 < 0:
            inv = inner.inverse()
            power = PuiseuxSeries(inner.field, [inner.field.one], 0,
                                  nt + (-self.e0) * v_in, inner.r)
            for k in range(1, -self.e0 + 1):
                power = power * inv
                c = self.coeffs[-self.e0 - k]
                if not field.is_zero(c):
                    out = out + power * c
            pos_coeffs = self.coeffs[-self.e0:]
            pos_e0 = 0
        else:
            pos_coeffs = self.coeffs
            pos_e0 = self.e0
        # Horner on the nonnegative part
        acc = PuiseuxSeries(inner.field, [], 0, nt + 1, inner.r)
        for c in reversed(pos_coeffs):
            acc = acc * inner + inner.field.coerce(c)
        for _ in range(pos_e0):
            acc = acc * inner
        return (out + acc).truncate(nt)

    def nth_root(self, n):
        if n == 1:
            return self
        if n == 2:
            return self.sqrt()
        raise NotImplementedError("only square roots supported")

    def invert_functional(self):
        """Compositional inverse g with self(g(z)) = z + O(z^(N/r)).

        Requires valuation exactly one unit (1/r).
        """
        s = self._trim()
        if s._val_units() != 1:
            raise ValueError("functional inversion needs valuation 1/r")
        field = s.field
        nt = s.ntrunc
        c1 = s.coeffs[0]
        g = PuiseuxSeries(field, [field.inv(c1)], e0=1, ntrunc=2, r=s.r)
        # Newton iteration, doubling the correct order each step
        order = 2
        while order < nt:
            order = min(2 * order, nt)
            g = PuiseuxSeries(field, g.coeffs, g.e0, order, g.r)
            fg = s.truncate(order + 1)._compose_int(g)
            var = PuiseuxSeries.var(field, order, s.r)
            err = fg - var
            dfg = s.derivative().truncate(order)._compose_int(g)
            g = (g - err * dfg.inverse()).truncate(order)
        return g

    # -- misc ----------------------------------------------------------------

    def map_coeffs(self, fn, field=None):
        field = field or self.field
        return PuiseuxSeries(field, [fn(c) for c in self.coeffs], self.e0,
                             self.ntrunc, self.r)

    def __call__(self, x):
        """Evaluate at a scalar (finite truncated sum)."""
        acc = None
        for i, c in enumerate(self.coeffs):
            k = Fraction(self.e0 + i, self.r)
            if k.denominator != 1:
                if not self.field.is_zero(c):
                    raise ValueError("cannot evaluate fractional exponents")
                continue
            term = c * x ** int(k) if int(k) >= 0 else c * (1 / (x ** (-int(k))))
            acc = term if acc is None else acc + term
        return acc

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        a, b = self._align(other)
        return (a - b).is_zero()

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if not self.field.is_zero(c):
                k = Fraction(self.e0 + i, self.r)
                terms.append(f"({c})*z^{k}")
            if len(terms) > 6:
                terms.append("...")
                break
        body = " + ".join(terms) if terms else "0"
        return f"<{body} + O(z^{Fraction(self.ntrunc, self.r)})>"


def series_arith(a, b, op, **kw):
    """Spec-level dispatcher over the series operations."""
    ops = {
        "add": lambda: a + b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
        "compose": lambda: a.compose(b),
        "invert_functional": lambda: a.invert_functional(),
        "sqrt": lambda: a.sqrt(**kw),
        "log1p": lambda: a.log1p(),
    }
    if op not in ops:
        raise ValueError(f"unknown op {op!r}")
    return ops[op]()


def residue(s):
    return s.residue()
