"""Dense univariate polynomials and rational functions over a pluggable field.

Just enough structure for spectral-curve work: arithmetic, exact gcd
normalization (exact fields only), evaluation at scalars and at truncated
series, derivatives, and partial-fraction style shifted expansions.
"""

from __future__ import annotations

from .series import PuiseuxSeries


class Poly:
    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        cs = [field.coerce(c) for c in coeffs]
        while cs and field.is_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @classmethod
    def x(cls, field):
        return cls(field, [field.zero, field.one])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [self.field.zero] * (n - len(self.coeffs))
        b = other.coeffs + [self.field.zero] * (n - len(other.coeffs))
        return Poly(self.field, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        return Poly(self.field, [other])

    def __neg__(self):
        return Poly(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.field.coerce(other)
            return Poly(self.field, [x * c for x in self.coeffs])
        if self.is_zero() or other.is_zero():
            return Poly(self.field, [])
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if self.field.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(self.field, out)

    __rmul__ = __mul__

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        field = self.field
        rem = list(self.coeffs)
        q = [field.zero] * max(0, len(rem) - len(other.coeffs) + 1)
        inv_lead = field.inv(other.coeffs[-1])
        for k in range(len(rem) - len(other.coeffs), -1, -1):
            c = rem[k + len(other.coeffs) - 1] * inv_lead
            q[k] = c
            if not field.is_zero(c):
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return Poly(field, q), Poly(field, rem)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a * self.field.inv(a.coeffs[-1])

    def derivative(self):
        return Poly(self.field,
                    [c * (i + 1) for i, c in enumerate(self.coeffs[1:])])

    def __call__(self, x):
        if isinstance(x, PuiseuxSeries):
            acc = PuiseuxSeries(x.field, [], 0, x.ntrunc + 1, x.r)
            for c in reversed(self.coeffs):
                acc = acc * x + x.field.coerce(c)
            return acc
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift(self, a):
        """Coefficients of self(z + a)."""
        out = Poly(self.field, [])
        za = Poly(self.field, [a, self.field.one])
        acc = Poly(self.field, [self.field.one])
        for c in self.coeffs:
            out = out + acc * c
            acc = acc * za
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        return "Poly[" + ", ".join(map(str, self.coeffs)) + "]"


class RatFunc:
    """num/den with exact-field normalization (monic den, gcd removed)."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field, num, den=None):
        self.field = field
        num = num if isinstance(num, Poly) else Poly(field, num)
        den = (den if isinstance(den, Poly)
               else Poly(field, den if den is not None else [field.one]))
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if getattr(field, "exact", False) and not num.is_zero():
            g = num.gcd(den)
            if g.degree > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
        if den.coeffs:
            lead = den.coeffs[-1]
            if not field.is_zero(lead - field.one):
                inv = field.inv(lead)
                num = num * inv
                den = den * inv
        self.num, self.den = num, den

    @classmethod
    def x(cls, field):
        return cls(field, Poly.x(field))

    def _lift(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(self.field, other)
        return RatFunc(self.field, Poly(self.field, [other]))

    def __add__(self, other):
        o = self._lift(other)
        return RatFunc(self.field, self.num * o.den + o.num * self.den,
                       self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.field, -self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        return RatFunc(self.field, self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError
        return RatFunc(self.field, self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n):
        if n < 0:
            return (1 / self) ** (-n)
        out = RatFunc(self.field, [self.field.one])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self):
        return RatFunc(self.field,
                       self.num.derivative() * self.den
                       - self.num * self.den.derivative(),
                       self.den * self.den)

    def __call__(self, x):
        if isinstance(x, PuiseuxSeries):
            return self.num(x) / self.den(x)
        den = self.den(x)
        return self.num(x) / den

    def series_at(self, a, ntrunc):
        """Laurent expansion in (z - a) to order ntrunc, as a PuiseuxSeries.

        Exact when a lies in the field.
        """
        num = self.num.shift(a)
        den = self.den.shift(a)
        f = self.field
        sn = PuiseuxSeries(f, num.coeffs or [f.zero], 0,
                           max(ntrunc + den.degree + 1, len(num.coeffs) + 1))
        sd = PuiseuxSeries(f, den.coeffs, 0,
                           max(ntrunc + den.degree + 1, len(den.coeffs) + 1))
        return (sn / sd).truncate(ntrunc)

    def is_zero(self):
        return self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, (RatFunc, Poly, int)):
            return NotImplemented
        o = self._lift(other)
        return (self.num * o.den - o.num * self.den).is_zero()

    def __repr__(self):
        return f"({self.num})/({self.den})"
