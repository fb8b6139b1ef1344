"""Coefficient fields: exact rationals, one quadratic extension, interval scalars.

Every other module does its arithmetic over one of the fields defined here.
Exact values are `fractions.Fraction` or `QuadNum` (a + b*sqrt(D) with a fixed
squarefree integer D, possibly negative); numeric values are `Ball` intervals
(mpmath midpoint plus tracked error radius) or bare mpmath numbers in fast
paths that a Ball-certified quantity seeds.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp


class IndeterminateComparison(Exception):
    """Raised when two overlapping intervals are compared."""


class MixedExtensionError(TypeError):
    """Raised when two QuadNum with different discriminants are combined."""


def squarefree_part(n):
    """Signed squarefree part of a nonzero integer (and its square cofactor).

    n = D * s**2 with D squarefree carrying the sign of n.  Returns (D, s).
    """
    if n == 0:
        raise ValueError("squarefree part of 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    D, s, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            D *= p
        s *= p ** (e // 2)
        p += 1 if p == 2 else 2
    return sign * D * n, s


class QuadNum:
    """Element a + b*sqrt(D) of Q(sqrt(D)), D a fixed squarefree integer != 1.

    D < 0 is allowed (one imaginary quadratic layer); mixing two different
    nonzero discriminants is an error, not a silent tower.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D=None):
        if D is None or D == 1:
            raise ValueError("QuadNum needs a squarefree discriminant != 1")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.D = D

    def _coerce(self, other):
        if isinstance(other, QuadNum):
            if other.D != self.D and other.b != 0 and self.b != 0:
                raise MixedExtensionError(
                    f"cannot mix sqrt({self.D}) with sqrt({other.D})")
            D = self.D if self.b != 0 or other.b == 0 else other.D
            return QuadNum(self.a, self.b, D), QuadNum(other.a, other.b, D)
        if isinstance(other, (int, Fraction)):
            return self, QuadNum(other, 0, self.D)
        return NotImplemented, None

    def __add__(self, other):
        s, o = self._coerce(other)
        if s is NotImplemented:
            return NotImplemented
        return QuadNum(s.a + o.a, s.b + o.b, s.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.D)

    def __sub__(self, other):
        s, o = self._coerce(other)
        if s is NotImplemented:
            return NotImplemented
        return QuadNum(s.a - o.a, s.b - o.b, s.D)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        s, o = self._coerce(other)
        if s is NotImplemented:
            return NotImplemented
        return QuadNum(s.a * o.a + s.D * s.b * o.b, s.a * o.b + s.b * o.a, s.D)

    __rmul__ = __mul__

    def conj(self):
        return QuadNum(self.a, -self.b, self.D)

    def norm(self):
        """Field norm a**2 - D*b**2 (a Fraction)."""
        return self.a * self.a - self.D * self.b * self.b

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadNum division by zero")
        return QuadNum(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        s, o = self._coerce(other)
        if s is NotImplemented:
            return NotImplemented
        return s * o.inverse()

    def __rtruediv__(self, other):
        return QuadNum(other, 0, self.D) / self

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadNum(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, QuadNum):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.D == other.D and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def rational_part(self):
        return self.a

    def as_fraction(self):
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def to_mp(self, prec=None):
        """mpmath value (mpc when D < 0)."""
        with mp.workprec(prec or mp.mp.prec):
            a = mp.mpf(self.a.numerator) / self.a.denominator
            b = mp.mpf(self.b.numerator) / self.b.denominator
            if self.D >= 0:
                return a + b * mp.sqrt(self.D)
            return mp.mpc(a) + b * mp.sqrt(mp.mpc(self.D))

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        return f"({self.a}+{self.b}*sqrt({self.D}))"


def quad_sqrt(x, D):
    """Exact sqrt of a rational x inside Q(sqrt(D)), if it exists there.

    Returns a QuadNum (or Fraction when x is a perfect square).
    """
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    d1, s1 = squarefree_part(num)
    d2, s2 = squarefree_part(den)
    # x = (d1*d2) * (s1/(s2*d2))**2
    core = d1 * d2
    scale = Fraction(s1, s2 * d2)
    if core == 1:
        return scale
    if core == D:
        return QuadNum(0, scale, D)
    raise ValueError(f"sqrt({x}) is not in Q(sqrt({D}))")


def exact_to_mp(x, prec=None):
    if isinstance(x, QuadNum):
        return x.to_mp(prec)
    if isinstance(x, Fraction):
        with mp.workprec(prec or mp.mp.prec):
            return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return mp.mpf(x)
    return x


# ---------------------------------------------------------------------------
# Interval scalars


def _ulp_bound(m):
    """Crude outward bound on one rounding of midpoint m."""
    return mp.ldexp(1 + abs(m), -mp.mp.prec + 3)


class Ball:
    """Midpoint-radius interval over mpmath (real or complex midpoint).

    Arithmetic propagates the radius outward; the radius is never dropped.
    Comparisons between overlapping balls raise IndeterminateComparison.
    """

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=0):
        self.mid = mp.mpmathify(mid)
        self.rad = mp.mpf(rad)
        if self.rad < 0:
            raise ValueError("negative radius")

    @staticmethod
    def _lift(x):
        if isinstance(x, Ball):
            return x
        if isinstance(x, (int, Fraction, QuadNum)):
            m = exact_to_mp(x)
            # exact dyadic conversion only for ints; otherwise one rounding
            r = 0 if isinstance(x, int) else _ulp_bound(abs(m))
            return Ball(m, r)
        return Ball(mp.mpmathify(x), 0)

    def __add__(self, other):
        o = Ball._lift(other)
        m = self.mid + o.mid
        return Ball(m, self.rad + o.rad + _ulp_bound(abs(m)))

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __sub__(self, other):
        return self + (-Ball._lift(other))

    def __rsub__(self, other):
        return Ball._lift(other) + (-self)

    def __mul__(self, other):
        o = Ball._lift(other)
        m = self.mid * o.mid
        r = (abs(self.mid) * o.rad + abs(o.mid) * self.rad
             + self.rad * o.rad + _ulp_bound(abs(m)))
        return Ball(m, r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Ball._lift(other)
        if abs(o.mid) <= o.rad:
            raise ZeroDivisionError("division by interval containing 0")
        m = self.mid / o.mid
        # |x/y - mx/my| <= (|mx| ry + |my| rx) / (|my| (|my| - ry))
        r = ((abs(self.mid) * o.rad + abs(o.mid) * self.rad)
             / (abs(o.mid) * (abs(o.mid) - o.rad)))
        return Ball(m, r + _ulp_bound(abs(m)))

    def __rtruediv__(self, other):
        return Ball._lift(other) / self

    def sqrt(self):
        m = mp.sqrt(self.mid)
        if abs(self.mid) <= self.rad:
            raise ValueError("sqrt of interval containing 0")
        r = self.rad / abs(m) + _ulp_bound(abs(m))
        return Ball(m, r)

    def __abs__(self):
        return Ball(abs(self.mid), self.rad)

    def contains_zero(self):
        return abs(self.mid) <= self.rad

    def _cmp(self, other, op):
        o = Ball._lift(other)
        lo_s, hi_s = abs(self.mid) - self.rad, None  # only used for real order
        if mp.im(self.mid) != 0 or mp.im(o.mid) != 0:
            raise IndeterminateComparison("no order on complex intervals")
        a, ra = mp.re(self.mid), self.rad
        b, rb = mp.re(o.mid), o.rad
        if a + ra < b - rb:
            return op in ("lt", "le")
        if a - ra > b + rb:
            return op in ("gt", "ge")
        raise IndeterminateComparison(f"overlapping intervals in {op}")

    def __lt__(self, other):
        return self._cmp(other, "lt")

    def __gt__(self, other):
        return self._cmp(other, "gt")

    def __le__(self, other):
        return self._cmp(other, "le")

    def __ge__(self, other):
        return self._cmp(other, "ge")

    def __eq__(self, other):
        o = Ball._lift(other)
        if self.rad == 0 and o.rad == 0:
            return self.mid == o.mid
        raise IndeterminateComparison("equality of fuzzy intervals")

    def __repr__(self):
        return f"Ball({self.mid}, r={mp.nstr(self.rad, 3)})"


# ---------------------------------------------------------------------------
# Field protocol objects


class RationalField:
    name = "QQ"
    exact = True

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, QuadNum):
            return x.as_fraction()
        raise TypeError(f"cannot coerce {x!r} to QQ")

    zero = Fraction(0)
    one = Fraction(1)

    def is_zero(self, x):
        return x == 0

    def inv(self, x):
        return 1 / self.coerce(x)


class QuadField:
    """Q(sqrt(D)) for a fixed signed squarefree D (D=1 degenerates to QQ)."""

    exact = True

    def __init__(self, D):
        if D != 1:
            d, s = squarefree_part(D)
            if s != 1:
                raise ValueError(f"{D} is not squarefree")
        self.D = D
        self.name = f"QQ(sqrt({D}))"
        self.zero = Fraction(0) if D == 1 else QuadNum(0, 0, D)
        self.one = Fraction(1) if D == 1 else QuadNum(1, 0, D)

    def coerce(self, x):
        if self.D == 1:
            return RationalField().coerce(x)
        if isinstance(x, QuadNum):
            if x.b != 0 and x.D != self.D:
                raise MixedExtensionError(f"{x} not in {self.name}")
            return QuadNum(x.a, x.b, self.D)
        if isinstance(x, (int, Fraction)):
            return QuadNum(x, 0, self.D)
        raise TypeError(f"cannot coerce {x!r} to {self.name}")

    def is_zero(self, x):
        return not bool(x) if isinstance(x, QuadNum) else x == 0

    def inv(self, x):
        x = self.coerce(x)
        return x.inverse() if isinstance(x, QuadNum) else 1 / x

    def sqrt_rational(self, x):
        """sqrt of a rational inside this field."""
        return self.coerce(quad_sqrt(x, self.D)) if self.D != 1 else quad_sqrt(x, 1)


class ComplexNumericField:
    """Plain mpmath complex numbers at a fixed working precision."""

    exact = False

    def __init__(self, prec_bits=256):
        self.prec = prec_bits
        self.name = f"MPC({prec_bits})"
        with mp.workprec(prec_bits):
            self.zero = mp.mpc(0)
            self.one = mp.mpc(1)
        # comparisons below this threshold count as zero (pole detection etc.)
        self.eps = mp.ldexp(1, -(prec_bits - 16))

    def coerce(self, x):
        with mp.workprec(self.prec):
            if isinstance(x, (Fraction, QuadNum, int)):
                return mp.mpc(exact_to_mp(x, self.prec))
            if isinstance(x, Ball):
                return mp.mpc(x.mid)
            return mp.mpc(x)

    def is_zero(self, x):
        return abs(x) < self.eps

    def inv(self, x):
        with mp.workprec(self.prec):
            return 1 / self.coerce(x)


QQ = RationalField()


def field_for_vertex(fa, fb):
    """Exact field of a framed vertex: Q(sqrt(2 f_a f_b (f_a+f_b))) squarefree."""
    D, _ = squarefree_part(2 * fa * fb * (fa + fb))
    return QuadField(D)
