"""Spectral curves on the z-sphere and their branchpoint-local data.

A curve is (P^1-domain, x, y, Bergman kernel dz1 dz2/(z1-z2)^2) presented
through the rational differentials xp = dx/dz and yp = dy/dz (x and y
themselves have log singularities at the punctures; the recursion only ever
uses x - x(branchpoint) and odd parts of y, both captured by xp, yp).
Branchpoints are the finite zeros of xp; each carries the local coordinate
zeta = sqrt(x - a), the deck involution, and series caches for the residue
engine.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .fields import Ball, QuadField, QQ, ComplexNumericField, exact_to_mp
from .ratfun import Poly, RatFunc
from .series import PuiseuxSeries


class CurveError(ValueError):
    pass


class Puncture:
    """Puncture of the curve with its half-edge framing.

    `z0` is a field element or None for z = infinity.  `x_order` is the
    order of X = e^{-x} at the puncture (X ~ const * local^x_order), i.e.
    the framing of the associated outgoing half-edge.
    """

    __slots__ = ("z0", "framing", "label")

    def __init__(self, z0, framing, label=""):
        self.z0 = z0
        self.framing = framing
        self.label = label

    def __repr__(self):
        at = "inf" if self.z0 is None else self.z0
        return f"Puncture(z={at}, f={self.framing}, {self.label!r})"


class BranchpointData:
    """Local data at a simple zero alpha of dx.

    zeta = sqrt(x - a) is the local coordinate; zs is z - alpha as a series
    in zeta, yodd(zeta) = y(z(zeta)) - y(z(-zeta)), and ypr1 is y'(a) in the
    sense y ~ y(a) + y'(a) sqrt(x - a).
    """

    __slots__ = ("alpha", "a_shift", "zs", "zs_neg", "yodd", "ypr1", "order",
                 "certificate")

    def __init__(self, alpha, zs, zs_neg, yodd, order, certificate=None):
        self.alpha = alpha
        self.zs = zs
        self.zs_neg = zs_neg
        self.yodd = yodd
        self.ypr1 = yodd.coeff(1) / 2
        self.order = order
        self.certificate = certificate


class SpectralCurve:
    def __init__(self, field, xp, yp, punctures, name="", y_rat=None,
                 x_const=None):
        self.field = field
        self.xp = xp
        self.yp = yp
        self.punctures = punctures
        self.name = name
        self.y_rat = y_rat            # exact y(z) when it is rational
        self.x_const = x_const        # callable z -> x(z) (numeric, branch 0)
        self._bp_cache = {}

    # -- branchpoints ---------------------------------------------------------

    def branchpoint_locations(self):
        """Finite zeros of dx (numerator roots of xp away from punctures)."""
        num = self.xp.num
        if getattr(self.field, "exact", False):
            roots = _exact_roots(self.field, num)
        else:
            roots = _numeric_roots(self.field, num)
        pz = [p.z0 for p in self.punctures if p.z0 is not None]
        out = []
        for r in roots:
            if any(self.field.is_zero(r - z) for z in pz):
                continue
            out.append(r)
        return out

    def branchpoints(self, order):
        """Branchpoint local data, monotone-cached over the series order."""
        cached = self._bp_cache.get("data")
        if cached is None or cached[0] < order:
            locs = _sort_roots(self.field, self.branchpoint_locations())
            data = [self._local_data(a, order) for a in locs]
            self._bp_cache["data"] = (order, data)
            return data
        return cached[1]

    def _local_data(self, alpha, order):
        f = self.field
        L = 2 * order + 6
        xs = self.xp.series_at(alpha, L)          # dx/dz around alpha
        if not f.is_zero(xs.coeff(0)) or f.is_zero(xs.coeff(1)):
            raise CurveError(f"dx does not have a simple zero at {alpha}")
        x_minus_a = xs.integrate()                # valuation exactly 2
        zeta = x_minus_a.sqrt()                   # valuation 1 series in (z-a)
        zs = zeta.invert_functional()             # z - a as series in zeta
        zs_neg = _flip(zs)
        ys = self.yp.series_at(alpha, L).integrate()   # y - y(a), series in z-a
        if f.is_zero(ys.coeff(1)):
            raise CurveError(f"dy vanishes at branchpoint {alpha}"
                             " (irregular curve)")
        yodd = ys.compose(zs) - ys.compose(zs_neg)
        cert = None
        if not getattr(f, "exact", False):
            cert = _certify_root(self.xp.num, alpha)
        return BranchpointData(alpha, zs, zs_neg, yodd, order, cert)

    # -- numeric evaluation ----------------------------------------------------

    def x_numeric(self, z, branch_ref=None):
        """x(z) = -ln X(z) through the stored closed form (numeric mode)."""
        if self.x_const is None:
            raise CurveError("curve carries no numeric x closed form")
        return self.x_const(z)

    def __repr__(self):
        return f"SpectralCurve({self.name or 'anon'}, field={self.field.name})"


def _flip(s):
    """s(-zeta) for an integer-exponent series."""
    out = []
    for i, c in enumerate(s.coeffs):
        k = s.e0 + i
        out.append(c if k % 2 == 0 else -c)
    return PuiseuxSeries(s.field, out, s.e0, s.ntrunc, s.r)


def _exact_roots(field, poly):
    """Roots of an exact polynomial: linear and quadratic only (by design:
    higher-degree exact branchpoints do not occur for the supported curves)."""
    cs = poly.coeffs
    d = poly.degree
    if d <= 0:
        return []
    if d == 1:
        return [(-cs[0]) * field.inv(cs[1])]
    if d == 2:
        a, b, c = cs[2], cs[1], cs[0]
        disc = b * b - 4 * a * c
        if isinstance(field, QuadField) and field.D != 1:
            sq = _exact_sqrt_in(field, disc)
        else:
            sq = _exact_sqrt_in(QQ, disc)
        inv2a = field.inv(a + a)
        return [(-b + sq) * inv2a, (-b - sq) * inv2a]
    raise CurveError("exact branchpoints beyond degree 2 not supported; "
                     "use numeric mode")


def _exact_sqrt_in(field, x):
    from .fields import quad_sqrt, QuadNum
    if isinstance(x, QuadNum):
        x = x.as_fraction()
    D = getattr(field, "D", 1)
    return field.coerce(quad_sqrt(x, D))


def _numeric_roots(field, poly):
    prec = getattr(field, "prec", mp.mp.prec)
    with mp.workprec(prec + 40):
        cs = [exact_to_mp(c) if not isinstance(c, (mp.mpf, mp.mpc)) else c
              for c in poly.coeffs]
        roots = mp.polyroots([mp.mpc(c) for c in reversed(cs)], maxsteps=200,
                             extraprec=prec)
        # Newton polish to the working precision
        dcs = [c * i for i, c in enumerate(cs)][1:]

        def ev(co, z):
            acc = mp.mpc(0)
            for c in reversed(co):
                acc = acc * z + c
            return acc

        out = []
        for r in roots:
            z = mp.mpc(r)
            for _ in range(80):
                fz = ev(cs, z)
                dz = ev(dcs, z)
                step = fz / dz
                z = z - step
                if abs(step) < mp.ldexp(1, -prec - 20) * (1 + abs(z)):
                    break
            out.append(z)
    return [field.coerce(z) for z in out]


def _certify_root(poly, alpha):
    """Interval-Newton certificate ball around a numeric root."""
    cs = [Ball(exact_to_mp(c)) if not isinstance(c, Ball) else c
          for c in poly.coeffs]

    def ev(co, z):
        acc = Ball(0)
        for c in reversed(co):
            acc = acc * z + c
        return acc

    dcs = [c * i for i, c in enumerate(cs)][1:]
    z = Ball(alpha)
    fz = ev(cs, z)
    dfz = ev(dcs, z)
    try:
        step = fz / dfz
        rad = 2 * (abs(step.mid) + step.rad)
    except ZeroDivisionError:
        rad = None
    return Ball(alpha, rad) if rad is not None else None


def _sort_roots(field, roots):
    if getattr(field, "exact", False):
        def key(r):
            if isinstance(r, Fraction):
                return (float(r), 0.0)
            return (float(r.a), float(r.b))
        return sorted(roots, key=key)
    return sorted(roots, key=lambda z: (mp.re(z), mp.im(z)))


# ---------------------------------------------------------------------------
# Stock curves


def airy_curve(order_hint=24):
    """x = z^2, y = z; the one-branchpoint normalization testbed."""
    f = QQ
    xp = RatFunc(f, [0, 2])
    yp = RatFunc(f, [1])
    y_rat = RatFunc(f, [0, 1])
    return SpectralCurve(f, xp, yp, [Puncture(None, 1, "infinity")],
                         name="airy", y_rat=y_rat)


def vertex_curve(fa, fb, fc=None, fd=None, field=None):
    """The framed one-vertex curve on P^1 - {0, 1, inf}.

    X(z) = C z^fb (1-z)^fa with C = (fa+fb)^(fa+fb)/(fa^fa fb^fb), so
    xp = -(fb/z + fa/(z-1)) and yp = -(fd/z + fc/(z-1)); (fc, fd) is any
    completion with fa*fd - fb*fc = 1 (the invariants do not depend on it).
    """
    if fa == 0 or fb == 0 or fa + fb == 0:
        raise CurveError("vertex framing needs fa, fb, fa+fb nonzero")
    if fc is None or fd is None:
        fc, fd = _complete_sl2(fa, fb)
    if fa * fd - fb * fc != 1:
        raise CurveError("framing matrix must have determinant 1")
    if field is None:
        from .fields import field_for_vertex
        field = field_for_vertex(fa, fb)
    f = field
    # xp = -(fb (z-1) + fa z) / (z (z-1))
    num_x = Poly(f, [fb, -(fa + fb)])
    num_y = Poly(f, [fd, -(fc + fd)])
    den = Poly(f, [0, -1, 1])  # z(z-1); overall minus folded into num
    xp = RatFunc(f, num_x, den)
    yp = RatFunc(f, num_y, den)
    punctures = [Puncture(f.coerce(0), fb, "z=0"),
                 Puncture(f.coerce(1), fa, "z=1"),
                 Puncture(None, -(fa + fb), "z=inf")]
    c = SpectralCurve(f, xp, yp, punctures, name=f"vertex({fa},{fb})")
    c.framing = ((fa, fb), (fc, fd))
    return c


def _complete_sl2(fa, fb):
    """(fc, fd) with fa*fd - fb*fc = 1 (extended Euclid)."""
    import math
    g = math.gcd(fa, fb)
    if g != 1:
        raise CurveError(f"({fa},{fb}) not coprime: no SL2(Z) completion")
    # solve fa*fd - fb*fc = 1
    # extended gcd on (fa, fb): u*fa + v*fb = 1 -> fd = u, fc = -v
    old_r, r = fa, fb
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    # old_s*fa + old_t*fb = old_r = +-1
    if old_r == -1:
        old_s, old_t = -old_s, -old_t
    return -old_t, old_s
