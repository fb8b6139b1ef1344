"""Intersection numbers on moduli of curves: psi, kappa and Hodge classes.

psi-class correlators come from the KdV/Virasoro (DVV) recursion with the
string and dilaton equations kept as independent cross-checks.  kappa
monomials convert to psi integrals by forgetful pushforward.  Triple Hodge
integrals at genus <= 2 expand the Hodge classes through the exponential of
kappa_1 - sum(psi) + boundary terms, peeling one lambda_1 at a time so that
boundary restrictions only ever see genus <= 1 Hodge data (rank relations
ch_2 = ch_4 = 0 close the ring: lambda_2 = lambda_1^2/2, lambda_1^4 = 0).
"""

from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction
from itertools import combinations

GENUS_CAP = 3
N_CAP = 12

_MEMO = {}


class CapExceeded(ValueError):
    pass


def _dfact(n):
    """(n)!! for odd n >= -1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def psi_number(g, degrees):
    """<tau_{d_1} ... tau_{d_n}>_g, exact Fraction.

    Off-dimension queries return 0; caps raise.
    """
    n = len(degrees)
    if g < 0 or n < 1 or any(d < 0 for d in degrees):
        return Fraction(0)
    if g > GENUS_CAP or n > N_CAP:
        raise CapExceeded(f"psi_number({g}, n={n}) beyond caps")
    if 3 * g - 3 + n < 0:
        return Fraction(0)
    if sum(degrees) != 3 * g - 3 + n:
        return Fraction(0)
    key = (g, tuple(sorted(degrees)))
    val = _MEMO.get(key)
    if val is None:
        val = _psi_recurse(g, key[1])
        _MEMO[key] = val
    return val


def _psi_recurse(g, degrees):
    if g == 0 and degrees == (0, 0, 0):
        return Fraction(1)
    if g == 1 and degrees == (1,):
        return Fraction(1, 24)
    if g == 0 and len(degrees) == 3:
        return Fraction(0)  # dimension already matched => degrees (0,0,0)
    # pick the largest index to recurse on
    d0 = degrees[-1]
    rest = degrees[:-1]
    if d0 == 0:
        # string equation downward
        return sum((psi_number(g, rest[:j] + (rest[j] - 1,) + rest[j + 1:])
                    for j in range(len(rest)) if rest[j] >= 1),
                   Fraction(0))
    total = Fraction(0)
    # transport term
    for j, dj in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        total += Fraction(_dfact(2 * (d0 + dj) - 1), _dfact(2 * dj - 1)) * \
            psi_number(g, others + (d0 + dj - 1,))
    # splitting terms
    for a in range(d0 - 1):
        b = d0 - 2 - a
        w = Fraction(_dfact(2 * a + 1) * _dfact(2 * b + 1), 2)
        total += w * psi_number(g - 1, rest + (a, b))
        for gp in range(g + 1):
            for r in range(len(rest) + 1):
                for I in combinations(range(len(rest)), r):
                    Iset = set(I)
                    dI = tuple(rest[i] for i in I)
                    dJ = tuple(rest[i] for i in range(len(rest))
                               if i not in Iset)
                    total += w * psi_number(gp, (a,) + dI) * \
                        psi_number(g - gp, (b,) + dJ)
    return total / _dfact(2 * d0 + 1)


def string_check(g, degrees):
    """String equation residual (0 when it holds)."""
    lhs = psi_number(g, tuple(degrees) + (0,))
    rhs = sum((psi_number(g, tuple(degrees[:j]) + (degrees[j] - 1,)
                          + tuple(degrees[j + 1:]))
               for j in range(len(degrees)) if degrees[j] >= 1), Fraction(0))
    return lhs - rhs


def dilaton_check(g, degrees):
    lhs = psi_number(g, tuple(degrees) + (1,))
    rhs = (2 * g - 2 + len(degrees)) * psi_number(g, tuple(degrees))
    return lhs - rhs


# ---------------------------------------------------------------------------
# kappa conversion


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def kappa_psi_number(g, kappas, degrees):
    """<kappa_{k_1}...kappa_{k_m} tau_{d_1}...tau_{d_n}>_g.

    Uses the forgetful-pushforward relations: a single kappa_k is a
    tau_{k+1} on one more point, and multiple kappas expand over set
    partitions with (-1)^(|B|-1) (|B|-1)! per block.
    """
    kappas = [k for k in kappas if k != 0 or True]
    # kappa_0 insertions multiply by 2g-2+n of the space they sit on;
    # handle them through the same partition formula (tau_1 = dilaton).
    total = Fraction(0)
    for part in _set_partitions(list(kappas)):
        coeff = 1
        extra = []
        for block in part:
            coeff *= (-1) ** (len(block) - 1) * _factorial(len(block) - 1)
            extra.append(sum(block) + 1)
        total += coeff * psi_number(g, tuple(degrees) + tuple(extra))
    return total


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# Hodge integrals, g <= 2


def _stable(g, n):
    return 2 * g - 2 + n > 0


def lambda1_power_integral(g, j, degrees):
    """<lambda_1^j psi_1^{d_1}...psi_n^{d_n}>_{g,n} for g <= 2.

    lambda_1 = (kappa_1 - sum psi_i + boundary/2) / 12; one power is peeled
    per step, restricting the remaining power to each boundary divisor where
    the Hodge bundle splits off lower genus.
    """
    degrees = tuple(degrees)
    n = len(degrees)
    if j < 0 or g < 0:
        raise ValueError("bad lambda power query")
    if g > 2:
        raise CapExceeded("direct Hodge integrals implemented for g <= 2 only")
    if sum(degrees) + j != 3 * g - 3 + n:
        return Fraction(0)
    if j == 0:
        return psi_number(g, degrees)
    if g == 0:
        return Fraction(0)
    if g == 1 and j >= 2:
        return Fraction(0)  # ch_2(E) = 0 forces lambda_1^2 = 0
    if g == 2 and j >= 4:
        return Fraction(0)  # lambda_1^4 = 4 lambda_2^2 = 0
    key = ("lam", g, j, tuple(sorted(degrees)))
    val = _MEMO.get(key)
    if val is not None:
        return val
    # kappa_1 term: push one power to (g, n+1)
    total = lambda1_power_integral(g, j - 1, degrees + (2,))
    # -sum psi_i
    for i in range(n):
        total -= lambda1_power_integral(
            g, j - 1, degrees[:i] + (degrees[i] + 1,) + degrees[i + 1:])
    # boundary: irreducible
    bnd = Fraction(0)
    if _stable(g - 1, n + 2):
        bnd += _lambda_on_genus(g - 1, j - 1, degrees + (0, 0))
    # boundary: ordered separating pairs (h, S)
    for h in range(g + 1):
        gp = g - h
        for r in range(n + 1):
            for S in combinations(range(n), r):
                Sset = set(S)
                dS = tuple(degrees[i] for i in S)
                dT = tuple(degrees[i] for i in range(n) if i not in Sset)
                if not (_stable(h, len(dS) + 1) and _stable(gp, len(dT) + 1)):
                    continue
                for p in range(j):  # split lambda_1^(j-1) across the node
                    q = j - 1 - p
                    c = _binom(j - 1, p)
                    lhs = _lambda_on_genus(h, p, dS + (0,))
                    if lhs == 0:
                        continue
                    rhs = _lambda_on_genus(gp, q, dT + (0,))
                    bnd += c * lhs * rhs
    total += bnd / 2
    total = total / 12
    _MEMO[key] = total
    return total


def _binom(n, k):
    if k < 0 or k > n:
        return 0
    return _factorial(n) // (_factorial(k) * _factorial(n - k))


def _lambda_on_genus(g, j, degrees):
    """lambda_1^j integral on a boundary component of genus g."""
    if j == 0:
        return psi_number(g, degrees)
    if g == 0:
        return Fraction(0)
    return lambda1_power_integral(g, j, degrees)


def hodge_integral(g, n, weights, degrees):
    """<Lambda(a) Lambda(b) Lambda(c) tau_{d_1}...tau_{d_n}>_{g,n}, g <= 2.

    weights are the three nonzero (integer or rational) Hodge weights; the
    value is the mixed-degree integral (the Lambda expansion fills whatever
    codimension the psi part leaves).
    """
    a, b, c = (Fraction(w) for w in weights)
    if any(w == 0 for w in (a, b, c)):
        raise ValueError("zero Hodge weight")
    degrees = tuple(degrees)
    if len(degrees) != n:
        raise ValueError("degree tuple arity != n")
    if g == 0:
        return psi_number(0, degrees)
    if g > 2:
        raise CapExceeded("hodge_integral supports g <= 2 (use vertex "
                          "extraction beyond)")
    dim = 3 * g - 3 + n
    codim = dim - sum(degrees)
    if codim < 0:
        return Fraction(0)
    e1 = 1 / a + 1 / b + 1 / c
    if g == 1:
        # Lambda(a)Lambda(b)Lambda(c) = 1 - e1 * lambda_1
        val = psi_number(1, degrees)
        val -= e1 * lambda1_power_integral(1, 1, degrees)
        return val
    # g == 2: Lambda(w) = 1 - lambda_1/w + lambda_2/w^2, lambda_2 = lambda_1^2/2
    e2 = 1 / (a * b) + 1 / (a * c) + 1 / (b * c)
    e3 = 1 / (a * b * c)
    # product over the three weights, collecting lambda_1^k coefficients:
    # per factor: 1 - L/w + L^2/(2 w^2)  with L = lambda_1
    # lambda_1^0: 1
    # lambda_1^1: -e1
    # lambda_1^2: e2 + e1^2/2 - e2 ... expand carefully below
    # (1 - x1 L + x1^2 L^2/2)(...x2...)(...x3...) with xi = 1/w_i
    x = [1 / a, 1 / b, 1 / c]
    coeff = [Fraction(0)] * 7
    from itertools import product as iproduct
    for picks in iproduct(range(3), repeat=3):
        csign = Fraction(1)
        deg = 0
        for xi, p in zip(x, picks):
            deg += p
            if p == 1:
                csign *= -xi
            elif p == 2:
                csign *= xi * xi / 2
        coeff[deg] += csign
    val = Fraction(0)
    for k in range(4):  # lambda_1^4 and beyond vanish
        if coeff[k] != 0:
            val += coeff[k] * lambda1_power_integral(2, k, degrees)
    return val


# ---------------------------------------------------------------------------
# unstable conventions


def defined_convention(g, n, ks, h02_factor=1):
    """The (0,1)/(0,2) replacement values for the Hodge-psi bracket.

    (0,1): 1/k^2.  (0,2): h02_factor/(k_1+k_2) with the factor frozen by
    calibration (1 by default).
    """
    if (g, n) == (0, 1):
        (k,) = ks
        if k == 0:
            raise ZeroDivisionError("(0,1) convention at k = 0")
        return 1 / Fraction(k) ** 2
    if (g, n) == (0, 2):
        k1, k2 = ks
        if k1 + k2 == 0:
            raise ZeroDivisionError("(0,2) convention at k1 + k2 = 0")
        return Fraction(h02_factor) / (Fraction(k1) + Fraction(k2))
    raise ValueError(f"no defined convention for (g,n)=({g},{n})")


# ---------------------------------------------------------------------------
# Hodge table with provenance and JSON/export, plus the disk cache


class HodgeTable:
    """Exact triple-Hodge integral values keyed by (g, n, weights, degrees)."""

    def __init__(self):
        self._data = {}

    @staticmethod
    def _key(g, n, weights, degrees):
        w = tuple(str(Fraction(x)) for x in weights)
        return (g, n, w, tuple(int(d) for d in degrees))

    def put(self, g, n, weights, degrees, value, provenance):
        key = self._key(g, n, weights, degrees)
        if key in self._data and self._data[key][0] != value:
            raise ValueError(
                f"HodgeTable conflict at {key}: {self._data[key][0]} vs {value}")
        prov = self._data.get(key, (value, set()))[1]
        prov.add(provenance)
        self._data[key] = (value, prov)

    def get(self, g, n, weights, degrees):
        return self._data[self._key(g, n, weights, degrees)][0]

    def lookup(self, g, n, weights, degrees, compute=True):
        key = self._key(g, n, weights, degrees)
        if key in self._data:
            return self._data[key][0]
        if not compute:
            raise KeyError(key)
        val = hodge_integral(g, n, weights, degrees)
        self.put(g, n, weights, degrees, val, "mumford-direct")
        return val

    def items(self):
        return sorted(self._data.items())

    def to_json(self):
        rows = []
        for (g, n, w, d), (v, prov) in self.items():
            rows.append({"g": g, "n": n, "weights": list(w),
                         "psi_degrees": list(d), "value": str(v),
                         "provenance": sorted(prov)})
        return json.dumps({"schema": "toricgw.hodge_table.v1",
                           "entries": rows}, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("schema") != "toricgw.hodge_table.v1":
            raise ValueError("unknown hodge table schema")
        tab = cls()
        for row in doc["entries"]:
            for prov in row["provenance"]:
                tab.put(row["g"], row["n"],
                        [Fraction(w) for w in row["weights"]],
                        row["psi_degrees"], Fraction(row["value"]), prov)
        return tab


CACHE_VERSION = "toricgw.psicache.v1"


def save_cache(path):
    """Persist the psi/lambda memo: versioned header, sorted key lines."""
    rows = []
    for key, val in _MEMO.items():
        h = hashlib.sha256(repr(key).encode()).hexdigest()[:16]
        rows.append(f"{h} {key!r} = {val}")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(CACHE_VERSION + "\n")
        for row in sorted(rows):
            fh.write(row + "\n")
    os.replace(tmp, path)


def load_cache(path):
    if not os.path.exists(path):
        return 0
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CACHE_VERSION:
            return 0
        count = 0
        for line in fh:
            _, rest = line.split(" ", 1)
            keyrepr, valrepr = rest.rsplit(" = ", 1)
            key = eval(keyrepr)  # noqa: S307 - our own versioned cache file
            _MEMO[key] = Fraction(valrepr.strip())
            count += 1
    return count
