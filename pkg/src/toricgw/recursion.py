"""Eynard-Orantin residue recursion on genus-0 spectral curves.

Stable amplitudes are stored as finite tensors over the polar basis
phi_{s,m}(z) = 1/(z - alpha_s)^m, m >= 2: on the z-sphere a stable omega_{g,n}
is, in each variable, a rational form with residue-free poles at the
branchpoints only, so

    omega_{g,n} = sum_T  T[(s1,m1),...,(sn,mn)] prod_i phi_{si,mi}(z_i) dz_i.

The recursion kernel and all residues are evaluated in the local coordinate
zeta = sqrt(x - a) where dx = 2 zeta dzeta exactly.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product as iproduct

import mpmath as mp

from .fields import exact_to_mp
from .series import PuiseuxSeries, TruncationError


class Amplitude:
    """A stable omega_{g,n} as a polar-basis tensor."""

    def __init__(self, curve, g, n, tensor, provenance="direct-TR"):
        self.curve = curve
        self.g = g
        self.n = n
        self.tensor = {k: v for k, v in tensor.items()
                       if not curve.field.is_zero(v)}
        self.provenance = provenance

    def max_pole_order(self):
        return max((m for key in self.tensor for (_, m) in key), default=0)

    def pole_bound_ok(self):
        return self.max_pole_order() <= 6 * self.g + 2 * self.n - 4

    def is_symmetric(self):
        from itertools import permutations
        for key, v in self.tensor.items():
            for p in permutations(key):
                w = self.tensor.get(tuple(p), self.curve.field.zero)
                if not self.curve.field.is_zero(w - v):
                    return False
        return True

    def w_function(self, zs):
        """W = omega / prod dx_i evaluated at scalar points z_i."""
        f = self.curve.field
        bps = self.curve.branchpoints(_order_for(self.g, self.n))
        total = f.zero
        for key, v in self.tensor.items():
            term = v
            for (s, m), z in zip(key, zs):
                term = term * f.inv((z - bps[s].alpha) ** m)
            total = total + term
        xps = [self.curve.xp(z) for z in zs]
        for xp in xps:
            total = total * f.inv(xp)
        return total

    def chain_integral_last(self, z_from, z_to):
        """Integrate the last slot along a path between two regular points.

        Exact: every basis function has the global antiderivative
        -(m-1)^-1 (z-alpha)^(1-m).  Pass None for z = infinity.
        """
        f = self.curve.field
        bps = self.curve.branchpoints(_order_for(self.g, self.n))
        out = {}
        for key, v in self.tensor.items():
            head, (s, m) = key[:-1], key[-1]
            alpha = bps[s].alpha

            def anti(z):
                if z is None:
                    return f.zero
                return f.inv((z - alpha) ** (m - 1)) * Fraction(-1, m - 1)

            val = v * (anti(z_to) - anti(z_from))
            if head in out:
                out[head] = out[head] + val
            else:
                out[head] = val
        return Amplitude(self.curve, self.g, self.n - 1, out,
                         provenance=self.provenance + "+chain")

    def __repr__(self):
        return (f"Amplitude(g={self.g}, n={self.n}, "
                f"{len(self.tensor)} terms, {self.provenance})")


def _order_for(g, n):
    return 6 * g + 2 * n + 8


def _bracket_order(g, n):
    # the deepest pole met in the bracket is a product of two sub-amplitude
    # poles: 12g + 4n - 8 in the worst split, plus slack
    return max(6 * g + 2 * n + 4, 12 * g + 4 * n - 8)


class _BPWork:
    """Series caches in the zeta chart of one branchpoint."""

    def __init__(self, curve, bps, s_idx, L):
        self.curve = curve
        self.idx = s_idx
        bp = bps[s_idx]
        self.bp = bp
        f = curve.field
        self.zs = bp.zs.truncate(L)
        self.zs_neg = bp.zs_neg.truncate(L)
        self.zp = self.zs.derivative()
        self.zp_neg = self.zs_neg.derivative()
        self.kfac = (bp.yodd.truncate(L) * 4 *
                     PuiseuxSeries.var(f, L)).inverse()
        # powers of zs / zs_neg
        self.zs_pow = [PuiseuxSeries.const(f, 1, L)]
        self.zsn_pow = [PuiseuxSeries.const(f, 1, L)]
        for _ in range(L):
            self.zs_pow.append((self.zs_pow[-1] * self.zs).truncate(L))
            self.zsn_pow.append((self.zsn_pow[-1] * self.zs_neg).truncate(L))
        # phi_{s',m} at z(zeta) and z(-zeta), built on demand
        self._phi = {}
        self._bps = bps
        self.L = L

    def phi(self, s2, m, conj=False):
        key = (s2, m, conj)
        if key in self._phi:
            return self._phi[key]
        if m > 1:
            out = (self.phi(s2, m - 1, conj) * self.phi(s2, 1, conj))
            out = out.truncate(self.L)
        else:
            zser = self.zs_neg if conj else self.zs
            if s2 == self.idx:
                out = zser.inverse()
            else:
                gap = self._bps[s2].alpha - self.bp.alpha
                out = (zser + gap).inverse()
            out = out.truncate(self.L)
        self._phi[key] = out
        return out

    def bergman_self(self):
        """B(z(zeta), z(-zeta)) / (dzeta)^2 including the dz dzbar jacobian."""
        diff = self.zs - self.zs_neg
        # d zbar/d zeta = zp_neg already carries the orientation flip
        val = (self.zp * self.zp_neg) * (diff.inverse() ** 2)
        return val.truncate(self.L)

    def bergman_leg_series(self, mmax):
        """1/(z(zeta)-z')^2 expanded as sum_m (m+1) zs^m phi_{self,m+2}(z').

        Returns the list of zeta-series multiplying phi_{self, m+2}(z'),
        m = 0..mmax, with the z-slot jacobian zp included.
        """
        return [(self.zs_pow[m] * (m + 1) * self.zp).truncate(self.L)
                for m in range(mmax + 1)]


def omega(curve, g, n, _order=None):
    """Stable amplitude omega_{g,n} by the residue recursion (memoized)."""
    if 2 * g - 2 + n <= 0:
        raise ValueError(f"omega({g},{n}) is unstable; the recursion seeds "
                         "omega_{0,1} = y dx and omega_{0,2} = B implicitly")
    cache = getattr(curve, "_omega_cache", None)
    if cache is None:
        cache = curve._omega_cache = {}
    if (g, n) in cache:
        return cache[(g, n)]
    f = curve.field
    L = _order or _bracket_order(g, n)
    bps = curve.branchpoints(_order_for(g, n))
    works = [_BPWork(curve, bps, s, L) for s in range(len(bps))]
    rest = n - 1
    tensor = {}
    for wk in works:
        bracket = _bracket(curve, wk, g, rest, works)
        if not bracket:
            continue
        # A-expansion: 1/(z0 - z) - 1/(z0 - zbar) =
        #   sum_m (zs^m - zsn^m) mu^{m+1},  mu = 1/(z0 - alpha)
        for key, cser in bracket.items():
            r = (wk.kfac * cser)
            # residue against each A-coefficient
            lead = r._val_units()
            jmax = -lead - 1
            if jmax < 0:
                continue
            for m in range(0, jmax + 2):
                aser = wk.zs_pow[m] - wk.zsn_pow[m]
                if aser.is_zero():
                    continue
                # coefficient of zeta^{-1} in aser * r
                res = f.zero
                for j in range(max(aser._val_units(), 1), jmax + 1):
                    cj = aser.coeff(j) if j < aser.ntrunc else None
                    if cj is None:
                        raise TruncationError("A-series window too small")
                    if f.is_zero(cj):
                        continue
                    rk = r.coeff(-1 - j)
                    res = res + cj * rk
                if f.is_zero(res):
                    continue
                out_key = ((wk.idx, m + 1),) + key
                tensor[out_key] = tensor.get(out_key, f.zero) + res
    amp = Amplitude(curve, g, n, tensor)
    if amp.max_pole_order() > 6 * g + 2 * n - 4:
        raise ArithmeticError(
            f"omega({g},{n}) pole order {amp.max_pole_order()} exceeds "
            f"{6*g+2*n-4}")
    cache[(g, n)] = amp
    return amp


def _bracket(curve, wk, g, rest, works):
    """Coefficient series of the recursion bracket at one branchpoint.

    Returns {rest_key: zeta-series} where rest_key is a tuple of `rest`
    polar-basis labels for the spectator legs, and the series carries all
    z- and zbar-slot jacobians (a d(zeta)^2 density).
    """
    f = curve.field
    L = wk.L
    out = {}

    def add(key, ser):
        if key in out:
            out[key] = out[key] + ser
        else:
            out[key] = ser

    mleg = 6 * g + 2 * (rest + 1)  # generous basis bound for leg expansions

    # --- omega_{g-1, rest+2}(z, zbar, rest) ---
    if g >= 1:
        if (g - 1, rest + 2) == (0, 2):
            add((), wk.bergman_self())
        elif 2 * (g - 1) - 2 + rest + 2 > 0:
            sub = omega(curve, g - 1, rest + 2)
            jac = wk.zp * wk.zp_neg
            for key, v in sub.tensor.items():
                (s1, m1), (s2, m2) = key[0], key[1]
                ser = (wk.phi(s1, m1) * wk.phi(s2, m2, conj=True) * jac) * v
                add(key[2:], ser.truncate(L))
        # (g-1, rest+2) = (0,1) cannot occur for rest >= 0

    # --- split terms: ordered (h, I) pairs, omega_{0,1} excluded ---
    idxs = tuple(range(rest))
    berg = wk.bergman_leg_series(mleg)
    for h in range(g + 1):
        for rI in range(rest + 1):
            for I in combinations(idxs, rI):
                J = tuple(i for i in idxs if i not in I)
                hp = g - h
                a1, a2 = (h, 1 + len(I)), (hp, 1 + len(J))
                if a1 == (0, 1) or a2 == (0, 1):
                    continue
                fac1 = _leg_factor(curve, wk, a1, I, berg)
                if fac1 is None:
                    continue
                fac2 = _leg_factor(curve, wk, a2, J, berg)
                if fac2 is None:
                    continue
                for key1, s1 in fac1:
                    for key2, s2 in fac2:
                        merged = _merge_keys(rest, I, key1, J, key2)
                        add(merged, (s1 * s2).truncate(L))
    return out


def _leg_factor(curve, wk, gn, legs, berg):
    """One omega factor of the split term, with its z-slot jacobian.

    Returns a list of (leg_key_tuple, zeta_series) or None when the factor
    vanishes identically.
    """
    f = curve.field
    g1, n1 = gn
    if gn == (0, 2):
        # B(z, z_j): series multiplying phi_{wk.idx, m+2}(z_j)
        return [(((wk.idx, m + 2),), berg[m]) for m in range(len(berg))]
    if 2 * g1 - 2 + n1 <= 0:
        return None
    sub = omega(curve, g1, n1)
    rows = []
    for key, v in sub.tensor.items():
        (s1, m1) = key[0]
        ser = wk.phi(s1, m1) * wk.zp * v
        rows.append((key[1:], ser))
    return rows or None


def _merge_keys(rest, I, key1, J, key2):
    slots = [None] * rest
    for pos, lab in zip(I, key1):
        slots[pos] = lab
    for pos, lab in zip(J, key2):
        slots[pos] = lab
    return tuple(slots)


# ---------------------------------------------------------------------------
# Free energies


def free_energy(curve, g):
    """F_g = (1/(2-2g)) sum_s Res_{z->alpha_s} omega_{g,1} int_alpha^z y dx.

    Needs g >= 2 (F_0, F_1 are out of scope) and an exact rational y or a
    numeric field.
    """
    if g < 2:
        raise ValueError("F_g defined here for g >= 2 only "
                         "(F_0, F_1 not in scope)")
    f = curve.field
    amp = omega(curve, g, 1)
    L = _bracket_order(g, 1)
    bps = curve.branchpoints(_order_for(g, 1))
    total = f.zero
    for s, bp in enumerate(bps):
        y_at_alpha = _y_value(curve, bp.alpha)
        zs = bp.zs.truncate(L)
        zp = zs.derivative()
        ys = curve.yp.series_at(bp.alpha, L).integrate()   # y - y(a) in (z-a)
        ytil = ys.compose(zs)
        var = PuiseuxSeries.var(f, L)
        phi_big = (ytil * var * 2).integrate() + \
            (var ** 2) * y_at_alpha                       # int y dx from alpha
        wser = None
        for key, v in amp.tensor.items():
            (s1, m1) = key[0]
            if s1 == s:
                ser = zs.inverse() ** m1 * v
            else:
                gap = bps[s1].alpha - bp.alpha
                ser = ((zs + gap).inverse() ** m1) * v
            wser = ser if wser is None else wser + ser
        if wser is None:
            continue
        integrand = wser * zp * phi_big
        total = total + integrand.residue()
    return total * Fraction(1, 2 - 2 * g)


def _y_value(curve, alpha):
    if curve.y_rat is not None:
        return curve.y_rat(alpha)
    if not getattr(curve.field, "exact", False) and curve.x_const is not None:
        raise NotImplementedError("numeric y(alpha) closed form not wired")
    raise NotImplementedError("free_energy needs a rational y on this curve")


# ---------------------------------------------------------------------------
# Winding coefficient extraction


def leg_matrix_exact(curve, chart, kmax, g, n):
    """Winding transform for one leg through an exact puncture chart.

    chart supplies s_of_u (local parameter as a series in the winding
    variable u) and phi-over-xp series; returns {k: {(s,m): coeff}} for
    k = 1..kmax.
    """
    bps = curve.branchpoints(_order_for(g, n))
    mmax = 6 * g + 2 * n - 4
    out = {k: {} for k in range(1, kmax + 1)}
    for s in range(len(bps)):
        for m in range(2, mmax + 1):
            ser = chart.phi_over_xp(s, m)          # series in local param
            ser_u = ser.compose(chart.s_of_u)
            for k in range(1, kmax + 1):
                c = ser_u.coeff(k)
                if not curve.field.is_zero(c):
                    out[k][(s, m)] = c
    return out


def winding_coefficients(amp, charts, kmax):
    """Coefficients of prod_i u_i^{k_i} of W = omega/prod dx, per leg charts.

    charts: one exact chart per leg (see vertex.VertexChart).  Returns a dict
    {(k_1..k_n): value}.  Contracts the tensor one leg at a time so shared
    label suffixes merge early.
    """
    curve = amp.curve
    f = curve.field
    mats = [leg_matrix_exact(curve, chart, kmax, amp.g, amp.n)
            for chart in charts]
    state = {}
    for key, v in amp.tensor.items():
        state[((), key)] = state.get(((), key), f.zero) + v
    for leg in range(amp.n):
        mat = mats[leg]
        new = {}
        for (kpre, labs), v in state.items():
            lab = labs[0]
            for k in range(1, kmax + 1):
                c = mat[k].get(lab)
                if c is None:
                    continue
                key = (kpre + (k,), labs[1:])
                cur = new.get(key)
                add = v * c
                new[key] = add if cur is None else cur + add
        state = new
    return {ks: v for (ks, _), v in state.items() if not f.is_zero(v)}


def winding_coefficients_numeric(amp, contours, kmax, npts=2048):
    """Numeric winding extraction by contour Fourier quadrature.

    contours: per leg, a dict with center z_c, radius rho, framing f_eps and
    a callable X(z) (the rational e^{-x}); u = (X(z))^(1/f_eps) tracked
    continuously from theta = 0.  Returns {(k_i): mpc}.
    """
    curve = amp.curve
    f = curve.field
    prec = getattr(f, "prec", mp.mp.prec)
    with mp.workprec(prec):
        mats = []
        bps = curve.branchpoints(_order_for(amp.g, amp.n))
        mmax = amp.max_pole_order()
        for ct in contours:
            mats.append(_leg_matrix_numeric(curve, bps, ct, kmax, mmax, npts))
        out = {}
        for key, v in amp.tensor.items():
            vv = exact_to_mp(v) if not isinstance(v, (mp.mpf, mp.mpc)) else v
            for ks in iproduct(range(1, kmax + 1), repeat=amp.n):
                coef = mp.mpc(vv)
                for leg, (k, lab) in enumerate(zip(ks, key)):
                    coef = coef * mats[leg][k][lab]
                out[ks] = out.get(ks, mp.mpc(0)) + coef
    return out


def _leg_matrix_numeric(curve, bps, ct, kmax, mmax, npts):
    prec = getattr(curve.field, "prec", mp.mp.prec)
    zc, rho, feps = ct["center"], ct["radius"], ct["framing"]
    Xfun = ct["X"]
    with mp.workprec(prec):
        thetas = [mp.mpf(2) * mp.pi * j / npts for j in range(npts)]
        zs = [zc + rho * mp.e ** (1j * th) for th in thetas]
        # continuous f-th root of X along the contour
        xvals = [Xfun(z) for z in zs]
        logs = [mp.log(xvals[0])]
        for xv in xvals[1:]:
            prev = logs[-1]
            cand = mp.log(xv)
            k2pi = mp.nint((mp.im(prev) - mp.im(cand)) / (2 * mp.pi))
            logs.append(cand + 2j * mp.pi * k2pi)
        us = [mp.e ** (lg / feps) for lg in logs]
        xps = [curve.xp(z) for z in zs]
        dz = [rho * 1j * mp.e ** (1j * th) for th in thetas]
        out = {k: {} for k in range(1, kmax + 1)}
        for s, bp in enumerate(bps):
            al = bp.alpha
            for m in range(2, mmax + 1):
                vals = [1 / ((z - al) ** m * xp) for z, xp in zip(zs, xps)]
                for k in range(1, kmax + 1):
                    # c_k = (1/2 pi i) oint psi u^{-k} du/u, du/u = -(xp/feps) dz
                    acc = mp.mpc(0)
                    for v, u, dzj, xp in zip(vals, us, dz, xps):
                        acc += v * u ** (-k) * (-xp / feps) * dzj
                    out[k][(s, m)] = acc / (2j * mp.pi) / npts
        return out


# ---------------------------------------------------------------------------
# Special geometry


def special_geometry_residual(family, tparam, g, n, chain, samples, dt=None):
    """max |d W_{g,n}/dt - int_chain W_{g,n+1}| over sample points.

    family: t -> SpectralCurve (numeric field).  The derivative is a central
    difference at fixed x (Richardson-extrapolated); chain = (z_from, z_to)
    pair of puncture locations for the dual cycle.
    """
    curve0 = family(tparam)
    f = curve0.field
    prec = getattr(f, "prec", mp.mp.prec)
    dt = dt or mp.ldexp(1, -prec // 4)
    with mp.workprec(prec):
        if 2 * g - 2 + n > 0:
            w_plus = omega(family(tparam + dt), g, n)
            w_minus = omega(family(tparam - dt), g, n)
            w_plus2 = omega(family(tparam + dt / 2), g, n)
            w_minus2 = omega(family(tparam - dt / 2), g, n)
        big = omega(curve0, g, n + 1) if 2 * g - 2 + n + 1 > 0 else None
        chain_amp = big.chain_integral_last(*chain)
        worst = mp.mpf(0)
        for zpt in samples:
            zvec = list(zpt)
            x_targets = [curve0.x_numeric(z) for z in zvec]
            if 2 * g - 2 + n > 0:
                vp = _w_at_fixed_x(family(tparam + dt), w_plus, zvec, x_targets)
                vm = _w_at_fixed_x(family(tparam - dt), w_minus, zvec, x_targets)
                vp2 = _w_at_fixed_x(family(tparam + dt / 2), w_plus2, zvec,
                                    x_targets)
                vm2 = _w_at_fixed_x(family(tparam - dt / 2), w_minus2, zvec,
                                    x_targets)
                coarse = (vp - vm) / (2 * dt)
                fine = (vp2 - vm2) / dt
                deriv = (4 * fine - coarse) / 3
            else:
                raise ValueError("use special_geometry_unstable for (0,1)/(0,2)")
            rhs = chain_amp.w_function(zvec)
            worst = max(worst, abs(deriv - rhs))
    return worst


def _w_at_fixed_x(curve, amp, z_guesses, x_targets):
    """Evaluate W at the points with given x-values (Newton from guesses)."""
    zs = []
    for zg, xt in zip(z_guesses, x_targets):
        z = mp.mpc(zg)
        for _ in range(60):
            fx = curve.x_numeric(z) - xt
            dfx = curve.xp(z)
            step = fx / dfx
            z = z - step
            if abs(step) < mp.ldexp(1, -mp.mp.prec + 12) * (1 + abs(z)):
                break
        zs.append(z)
    return amp.w_function(zs)
