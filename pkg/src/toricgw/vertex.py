"""Closed forms for the framed one-vertex curve and its Laplace data.

Everything here lives in one real or imaginary quadratic extension
Q(sqrt(D)), D = squarefree(2 fa fb (fa+fb)): the simple-pole kernel
xi0(z) = sqrt(2 fa fb/(fa+fb)) / ((fa+fb) z - fb), its x-derivatives, their
Fourier expansions at the three punctures (which define gamma at every
rational argument, including the analytic continuation to negative ones),
the Bernoulli times of the Laplace transform of y dx, and the assembled
Hodge-integral form of the amplitudes.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .fields import quad_sqrt
from .intersection import hodge_integral, defined_convention
from .ratfun import Poly, RatFunc
from .series import PuiseuxSeries
from .curves import vertex_curve


def bernoulli(n):
    p, q = mp.bernfrac(n)
    return Fraction(int(p), int(q))


def _dfact(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class VertexData:
    """Framed C^3 vertex: curve, charts, gamma tables, times."""

    def __init__(self, fa, fb, tzero_sign=1):
        self.fa, self.fb = fa, fb
        self.curve = vertex_curve(fa, fb)
        self.field = self.curve.field
        self.m = fa * fb * (fa + fb)
        self.tzero_sign = tzero_sign
        # e^{-t_0} = sign * 2 sqrt(2)/sqrt(m) = sign * 2 sqrt(2m)/m
        root2m = self.field.coerce(quad_sqrt(2 * self.m, self.field.D))
        self.exp_minus_t0 = root2m * Fraction(2 * tzero_sign, self.m)
        self.exp_t0 = self.field.inv(self.exp_minus_t0)
        # xi0 closed form
        pref = self.field.coerce(
            quad_sqrt(Fraction(2 * fa * fb, fa + fb), self.field.D))
        self.xi0 = RatFunc(self.field, Poly(self.field, [pref]),
                           Poly(self.field, [-fb, fa + fb]))
        self._charts = {}
        self._gamma_chart = {}

    # -- times ---------------------------------------------------------------

    def hat_times(self, K):
        """t_k, k = 1..K, of g(u) = sum_k t_k u^-k (odd k only)."""
        fa, fb = self.fa, self.fb
        out = {}
        for k in range(1, K + 1):
            if k % 2 == 0:
                out[k] = Fraction(0)
                continue
            two_k = k + 1  # k = 2j-1 -> j = (k+1)/2
            j = two_k // 2
            out[k] = bernoulli(2 * j) / (2 * j * (2 * j - 1)) * (
                Fraction(1, (fa + fb) ** (2 * j - 1))
                - Fraction(1, fa ** (2 * j - 1))
                - Fraction(1, fb ** (2 * j - 1)))
        return out

    def g_series(self, K):
        """exp(-g(u)) as a series in 1/u to order K (exact rationals)."""
        ts = self.hat_times(K)
        f = self.field
        g = PuiseuxSeries(f, [ts.get(k, Fraction(0)) for k in range(K + 1)],
                          0, K + 1)
        # exp(-g): g has valuation >= 1 in 1/u
        out = PuiseuxSeries(f, [1], 0, K + 1)
        term = PuiseuxSeries(f, [1], 0, K + 1)
        for j in range(1, K + 2):
            term = term * (-1) * g * Fraction(1, j)
            if term._val_units() > K:
                break
            out = out + term
        return out.truncate(K + 1)

    # -- xi forms --------------------------------------------------------------

    def xi_tilde(self, d):
        """xi_d = (-1)^d (d/dx)^d xi0 as an exact rational function of z."""
        cur = self.xi0
        for _ in range(d):
            cur = (cur.derivative() / self.curve.xp) * (-1)
        return cur

    # -- charts ----------------------------------------------------------------

    def chart(self, which, order=14):
        """Exact winding chart at puncture 'z=0', 'z=1' or 'z=inf'."""
        cur = self._charts.get(which)
        if cur is None or cur.order < order:
            cur = VertexChart(self, which, order=order)
            self._charts[which] = cur
        return cur

    def gamma_chart(self, which, k):
        """gamma_f(k/f_eps) read from the xi0 Fourier expansion at a chart.

        This is the analytic continuation used for half-edges of either
        orientation; at charts with integer k f_a/f_eps it agrees with the
        regularized-Gamma closed form.
        """
        key = (which, k)
        if key not in self._gamma_chart:
            ch = self.chart(which)
            kmax = max(k, 8)
            ser = ch.compose_to_u(self.xi0, kmax + 1)
            for kk in range(kmax + 1):
                self._gamma_chart[(which, kk)] = \
                    ser.coeff(kk) * (-ch.framing)
        return self._gamma_chart[key]

    def gamma(self, q):
        """gamma_f at a positive rational argument with integer q*fa, q*fb.

        Closed form through the regularized Gamma ratio: all transcendental
        factors cancel, leaving a rational times sqrt(2(fa+fb)/(fa fb)).
        """
        q = Fraction(q)
        if q == 0:
            return self.field.one  # limit value
        A, B = q * self.fa, q * self.fb
        if A.denominator != 1 or B.denominator != 1 or A <= 0 or B <= 0:
            raise ValueError(f"gamma closed form needs positive integer "
                             f"arguments, got ({A},{B})")
        A, B = int(A), int(B)
        pref = quad_sqrt(Fraction(2 * (self.fa + self.fb), self.fa * self.fb),
                         self.field.D)
        rat = Fraction(1, q)
        # A^A B^B / (A+B)^(A+B) * (A+B-1)! / ((A-1)! (B-1)!)
        import math
        rat *= Fraction(A ** A) * Fraction(B ** B) / Fraction((A + B) ** (A + B))
        rat *= Fraction(math.factorial(A + B - 1),
                        math.factorial(A - 1) * math.factorial(B - 1))
        return self.field.coerce(pref) * rat

    # -- Laplace data of the Bergman kernel --------------------------------------

    def bergman_hat(self, K):
        """B-hat_{k,l} for 1 <= k,l <= K from the curve's Bergman expansion.

        Row 2d is read from the local expansion of the residue form
        dxi_d(z) = -(2d-1)!! 2^{-d} Res_{z'->a} B(z,z') (x'-a)^{-d-1/2}.
        """
        L = 6 * K + 14
        bp = self.curve.branchpoints(L)[0]
        zs = bp.zs.truncate(L)
        zp = zs.derivative()
        f = self.field
        out = {}
        for k in range(0, K + 1):
            d = k
            # dxi_d in the zeta chart: the regular part of
            #   Res_{zeta'} [ zp(z')/(zs(z)-zs(z'))^2 ] zeta'^{-2d-1}
            # expanded in zeta; then xi_d = integral, B_{2d,l} from
            # xi_d ~ ... - (2d-1)!! 2^{-d} sum_l B_{2d,l} zeta^{l+1}/(l+1)
            ser = _dxi_series(zs, zp, d, L)
            xi = _integrate_no_const(ser)
            scale = f.inv(f.coerce(Fraction(_dfact(2 * d - 1), 2 ** d)))
            for l in range(0, 2 * K + 1):
                cl = xi.coeff(l + 1)
                b_dl = -(cl * (l + 1)) * scale
                if l % 2 == 0:
                    kk, ll = d, l // 2
                    if 0 <= ll <= K:
                        val = b_dl * Fraction(
                            _dfact(2 * kk - 1) * _dfact(2 * ll - 1),
                            2 ** (kk + ll + 1))
                        out[(kk, ll)] = val
        return out

    def bergman_hat_rhs(self, K):
        """B-hat_{k,l} from uv (1 - e^{-g(u)} e^{-g(v)})/(u+v)."""
        fu = self.g_series(2 * K + 2)      # in powers of 1/u
        coe = {}
        # 1 - f(u) f(v) = -(sum_{i,j not both 0} f_i f_j u^-i v^-j)
        fs = [fu.coeff(i) for i in range(2 * K + 3)]
        prod = {}
        for i in range(2 * K + 3):
            for j in range(2 * K + 3):
                if i == 0 and j == 0:
                    continue
                c = fs[i] * fs[j]
                if not self.field.is_zero(c):
                    prod[(i, j)] = -c
        # divide by (u+v), multiply by uv: B(u,v) = uv/(u+v) (1 - f f)
        # uv/(u+v) * u^-i v^-j = u^{1-i} v^{1-j} / (u+v);
        # 1/(u+v) = sum_{r>=0} (-1)^r u^{-r-1} v^{r} ... instead solve
        # (u+v) B = uv (1 - f(u) f(v)) on coefficients of u^{-k} v^{-l}:
        # B_{k+1,l} + B_{k,l+1} = [u^{-k} v^{-l}] uv(1-ff)   (k,l >= 0)
        rhs = {}
        for (i, j), c in prod.items():
            # uv * u^-i v^-j = u^{1-i} v^{1-j} -> contributes to (i-1, j-1)
            rhs[(i - 1, j - 1)] = rhs.get((i - 1, j - 1), Fraction(0)) + c
        B = {}
        # B_{0,l} = 0 = B_{k,0}? no: B has k,l >= 0; from symmetry and the
        # recurrence with boundary B_{k,0}: use [u^{-k} v^{+1}]-type rows:
        # (u+v)B has min v-power v^0 ... solve by increasing k+l:
        # at (k,-1): B_{k+1,-1} ... cleaner: B_{k,l} with k,l>=0 and
        # rhs index (a,b) with a>=-1, b>=-1:
        # a=-1: B_{0,b+1} = rhs(-1,b) (no B_{-1,...} term)
        for b in range(-1, 2 * K + 2):
            val = rhs.get((-1, b), Fraction(0))
            if b + 1 >= 0:
                B[(0, b + 1)] = val
        maxi = 2 * K + 2
        for a in range(0, maxi):
            for b in range(-1, maxi):
                val = rhs.get((a, b), Fraction(0))
                left = B.get((a, b + 1), Fraction(0))
                B[(a + 1, b)] = val - left
        return {(k, l): B.get((k, l), Fraction(0))
                for k in range(K + 1) for l in range(K + 1)}

    # -- Marino-Vafa ------------------------------------------------------------

    def marino_vafa_rhs(self, g, n, charts, windings, table=None,
                        global_sign=1):
        """Winding coefficient of the triple-Hodge side of the vertex formula.

        charts: per-leg chart names; windings: per-leg positive integers k_i.
        Returns the coefficient of prod_i u_i^{k_i} (with u the chart winding
        variable), i.e. 2^{3g-3+n} e^{t0 (2g-2+n)} < Lambda^3 prod 1/(1 -
        (k_i/f_i) psi_i) > prod (k_i/f_i^2) gamma(k_i/f_i) in this package's
        branch conventions.
        """
        fa, fb = self.fa, self.fb
        weights = (fa, fb, -fa - fb)
        f = self.field
        ks = []
        for ch_name, k in zip(charts, windings):
            feps = self.chart(ch_name).framing
            ks.append(Fraction(k, feps))
        dim = 3 * g - 3 + n
        total = Fraction(0)
        # sum over psi-degree vectors
        from itertools import product as iproduct
        for ds in iproduct(range(dim + 1), repeat=n):
            if sum(ds) > dim:
                continue
            if table is not None:
                hv = table.lookup(g, n, weights, ds)
            else:
                hv = hodge_integral(g, n, weights, ds)
            if hv == 0:
                continue
            mono = hv
            for k, d in zip(ks, ds):
                mono *= k ** d
            total += mono
        pref = f.coerce(2 ** (3 * g - 3 + n) if 3 * g - 3 + n >= 0
                        else Fraction(1, 2 ** (3 - 3 * g - n)))
        pref = pref * self.exp_t0 ** (2 * g - 2 + n) * global_sign
        legf = f.one
        for ch_name, k in zip(charts, windings):
            feps = self.chart(ch_name).framing
            legf = legf * self.gamma_chart(ch_name, k) * Fraction(k, feps ** 2)
        return pref * f.coerce(total) * legf

    def extract_hodge_table(self, g, n, chart_names, kmax, table):
        """Invert the vertex formula: triple Hodge integrals from TR windings.

        Solves the Vandermonde system in (k_i/f_eps)^d_i using windings
        k_i = 1..kmax on the given charts; puts entries into `table` with
        provenance 'vertex-extracted'.
        """
        from .recursion import omega, winding_coefficients
        dim = 3 * g - 3 + n
        npts = dim + 1
        if kmax < npts:
            raise ValueError(f"need at least {npts} windings per leg")
        amp = omega(self.curve, g, n)
        charts = [self.chart(nm) for nm in chart_names]
        wc = winding_coefficients(amp, charts, npts)
        f = self.field
        pref = f.coerce(2 ** max(3 * g - 3 + n, 0) if 3 * g - 3 + n >= 0
                        else Fraction(1, 2 ** (3 - 3 * g - n)))
        pref = pref * self.exp_t0 ** (2 * g - 2 + n)
        # right-hand sides: wc[ks] / (pref * prod gamma * prod k/f^2)
        rhs = {}
        for ks in _grid(npts, n):
            val = wc.get(ks, f.zero)
            div = pref
            for ch, k in zip(charts, ks):
                div = div * self.gamma_chart(ch.name, k) * \
                    Fraction(k, ch.framing ** 2)
            rhs[ks] = _as_fraction(val * f.inv(div))
        # Vandermonde solve per leg: unknowns H[ds]
        weights = (self.fa, self.fb, -self.fa - self.fb)
        sols = _solve_tensor_vandermonde(
            rhs, [Fraction(1, self.chart(nm).framing) for nm in chart_names],
            dim, n)
        for ds, val in sols.items():
            table.put(g, n, weights, ds, val, "vertex-extracted")
        return sols


def _grid(npts, n):
    from itertools import product as iproduct
    return list(iproduct(range(1, npts + 1), repeat=n))


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if hasattr(x, "as_fraction"):
        return x.as_fraction()
    raise TypeError(f"expected rational value, got {x!r}")


def _solve_tensor_vandermonde(rhs, inv_framings, dim, n):
    """Solve rhs[k_1..k_n] = sum_{|d| <= dim} H[d] prod (k_i/f_i)^{d_i}."""
    from itertools import product as iproduct
    ds_list = [ds for ds in iproduct(range(dim + 1), repeat=n)
               if sum(ds) <= dim]
    ks_list = sorted(rhs)
    mat = []
    vec = []
    for ks in ks_list:
        row = []
        for ds in ds_list:
            t = Fraction(1)
            for k, invf, d in zip(ks, inv_framings, ds):
                t *= (k * invf) ** d
            row.append(t)
        mat.append(row)
        vec.append(rhs[ks])
    sol = _lstsq_exact(mat, vec)
    return {ds: v for ds, v in zip(ds_list, sol)}


def _lstsq_exact(mat, vec):
    """Exact solve of an overdetermined consistent system by elimination."""
    rows = [list(r) + [v] for r, v in zip(mat, vec)]
    ncol = len(mat[0])
    rank = 0
    for col in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0),
                   None)
        if piv is None:
            raise ValueError("singular winding sample matrix")
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = 1 / pr[col]
        rows[rank] = [x * inv for x in pr]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                c = rows[i][col]
                rows[i] = [a - c * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    for i in range(rank, len(rows)):
        if any(x != 0 for x in rows[i]):
            raise ValueError("inconsistent extraction system")
    return [rows[i][ncol] for i in range(ncol)]


def _dxi_series(zs, zp, d, L):
    """Regular zeta-expansion of dxi_d (as a dzeta-density) at the branchpoint.

    dxi_d(z)/dzeta = -(2d-1)!! 2^{-d} Res_{w->0} [zp(zeta) /
    (zs(zeta) - zs(w))^2] w^{-2d-1}, including the principal part.
    """
    f = zs.field
    # Res_w  zp(zeta) / (zs(zeta)-zs(w))^2  * w^{-2d-1}
    # expand 1/(zs(zeta)-zs(w))^2 in powers of w via the bivariate quotient
    # H(zeta, w) = (zs(zeta)-zs(w))/(zeta-w):
    #   1/(zs-zs')^2 = 1/((zeta-w)^2 H^2)
    # Work per power of w: write zs(w) = sum c_k w^k and expand directly:
    #   1/(zs(zeta)-zs(w))^2 = sum_j w^j R_j(zeta).
    # We only need j = 2d, so assemble by Newton's expansion in
    # delta = zs(w) (series in w):
    S = zs.truncate(L)
    # 1/(S(zeta) - t)^2 = sum_m (m+1) t^m / S(zeta)^{m+2}, t = zs(w);
    # the w-residue needs the jacobian zp(w) dw as well
    inv_s = S.inverse()
    res = None
    W = 2 * d + 1
    zw_pow = [PuiseuxSeries.const(f, 1, W)]
    for _ in range(2 * d):
        zw_pow.append((zw_pow[-1] * zs).truncate(W))
    zpw = zp.truncate(W)
    for m in range(0, 2 * d + 1):
        wm = (zw_pow[m] * zpw).truncate(W)
        cm = wm.coeff(2 * d) if 2 * d < wm.ntrunc else None
        if cm is None or f.is_zero(cm):
            continue
        term = (inv_s ** (m + 2)) * ((m + 1) * cm)
        res = term if res is None else res + term
    if res is None:
        res = PuiseuxSeries(f, [], 0, L)
    out = res * zp * Fraction(-_dfact(2 * d - 1), 2 ** d)
    return out.truncate(L - 2 * d - 2)


def _integrate_no_const(ser):
    """Antiderivative; the dxi expansion must be residue-free."""
    if ser.e0 <= -1 < ser.ntrunc and not ser.field.is_zero(ser.coeff(-1)):
        raise ArithmeticError("unexpected residue in dxi expansion")
    return ser.integrate()


class VertexChart:
    """Exact local winding chart at one puncture of the vertex curve.

    The winding variable is u = (normalized X)^(1/f_eps) with the real
    branch; s is the local parameter (z at z=0, 1-z at z=1, 1/z at infinity).
    """

    def __init__(self, vd, name, order=14):
        self.vd = vd
        self.name = name
        fa, fb = vd.fa, vd.fb
        f = vd.field
        self.order = order
        L = order
        s = PuiseuxSeries.var(f, L)
        one = PuiseuxSeries.const(f, 1, L)
        if name == "z=0":
            self.framing = fb
            cpow = _c_power(vd, Fraction(1, fb))
            u = (one - s).binomial_pow(Fraction(fa, fb)) * s * cpow
            self._z_of_s = s          # z = s
            self._at_infinity = False
            self.z0 = f.coerce(0)
        elif name == "z=1":
            self.framing = fa
            cpow = _c_power(vd, Fraction(1, fa))
            u = (one - s).binomial_pow(Fraction(fb, fa)) * s * cpow
            self._z_of_s = one - s    # z = 1 - s
            self._at_infinity = False
            self.z0 = f.coerce(1)
        elif name == "z=inf":
            self.framing = -(fa + fb)
            # X = C z^fb (1-z)^fa = C (-1)^fa w^{-fa-fb} (1-w)^fa, w = 1/z;
            # real branch drops the (-1)^fa phase (recorded separately)
            cpow = _c_power(vd, Fraction(-1, fa + fb))
            u = (one - s).binomial_pow(Fraction(-fa, fa + fb)) * s * cpow
            self.dropped_phase_numerator = fa % 2
            self._z_of_s = None       # z = 1/s handled specially
            self._at_infinity = True
            self.z0 = None
        else:
            raise ValueError(f"unknown chart {name!r}")
        self.u_of_s = u
        self.s_of_u = u.invert_functional()

    def phi_over_xp(self, bp_index, m):
        """Series in s of 1/((z - alpha)^m xp(z))."""
        vd = self.vd
        f = vd.field
        L = self.order
        bps = vd.curve.branchpoints(L)
        alpha = bps[bp_index].alpha
        xp = vd.curve.xp
        den = RatFunc(f, Poly(f, [-alpha, 1])) ** m * xp
        func = 1 / den
        return _ratfunc_in_chart(func, self, L)

    def compose_to_u(self, func, kmax):
        """Fourier coefficients of a rational function at this puncture."""
        ser = _ratfunc_in_chart(func, self, max(kmax + 2, self.order))
        return ser.compose(self.s_of_u.truncate(kmax + 2))

    def __repr__(self):
        return f"VertexChart({self.name}, f={self.framing})"


def _c_power(vd, q):
    """C^q with C = (fa+fb)^(fa+fb)/(fa^fa fb^fb), exact in the field."""
    fa, fb = vd.fa, vd.fb
    # negative entries give genuine Fraction powers
    val = (Fraction(fa + fb) ** (fa + fb)
           / (Fraction(fa) ** fa * Fraction(fb) ** fb))
    # val^q: q rational; exact if the root stays in the field
    num = val ** q.numerator
    if q.denominator == 1:
        return vd.field.coerce(num)
    if q.denominator == 2:
        return vd.field.coerce(quad_sqrt(num, vd.field.D))
    # general small roots: factor exponents
    return vd.field.coerce(_rational_root(num, q.denominator, vd.field))


def _rational_root(x, r, field):
    """x^(1/r) for Fraction x, landing in QQ or Q(sqrt(D))."""
    from .fields import squarefree_part
    sign = 1
    if x < 0:
        if r % 2 == 0:
            raise ValueError("even root of negative rational")
        sign, x = -1, -x

    def root_int(n):
        # n = prod p^e: need e divisible by r, or by r/2 leaving sqrt
        out_rat, out_rad = 1, 1
        p = 2
        while p * p <= n:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e % r == 0:
                out_rat *= p ** (e // r)
            elif (2 * e) % r == 0:
                out_rat_sqrt = p ** (2 * e // r)
                out_rad *= out_rat_sqrt
            else:
                raise ValueError(f"{p}^{e} has no exact {r}-th root")
            p += 1
        if n > 1:
            raise ValueError(f"prime {n} has no exact {r}-th root")
        return out_rat, out_rad

    rn, radn = root_int(x.numerator)
    rd, radd = root_int(x.denominator)
    if radn == radd == 1:
        return sign * Fraction(rn, rd)
    val = quad_sqrt(Fraction(radn, radd), field.D)
    return sign * Fraction(rn, rd) * field.coerce(val)


def _ratfunc_in_chart(func, chart, L):
    """Series of a rational function of z in the chart's local parameter."""
    f = func.field
    if not chart._at_infinity:
        num = func.num
        den = func.den
        if chart.name == "z=1":
            # z = 1 - s: substitute and expand at s = 0
            num = _sub_one_minus(num)
            den = _sub_one_minus(den)
            func2 = RatFunc(f, num, den)
            return func2.series_at(f.coerce(0), L)
        return func.series_at(chart.z0, L)
    # z = 1/s
    num, den = func.num, func.den
    dmax = max(num.degree, den.degree)
    ncoef = list(reversed(num.coeffs)) + [f.zero] * (dmax - num.degree)
    dcoef = list(reversed(den.coeffs)) + [f.zero] * (dmax - den.degree)
    func2 = RatFunc(f, Poly(f, ncoef), Poly(f, dcoef))
    return func2.series_at(f.coerce(0), L)


def _sub_one_minus(poly):
    """p(1 - s) as a polynomial in s."""
    f = poly.field
    out = Poly(f, [])
    base = Poly(f, [f.one, -f.one])   # 1 - s
    acc = Poly(f, [f.one])
    for c in poly.coeffs:
        out = out + acc * c
        acc = acc * base
    return out
