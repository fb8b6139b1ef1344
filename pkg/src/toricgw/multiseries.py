"""Multivariate truncated generating series in Kahler monomials and windings.

A monomial is (q, k): q a tuple of Fraction exponents, one per Kahler
parameter, and k a tuple of integer windings, one per open leg.  Caps
(max total q-degree, max winding per leg) are enforced on every store and
re-intersected by arithmetic.
"""

from __future__ import annotations

from fractions import Fraction


class CapError(ValueError):
    pass


def _q_degree(q):
    return sum(q, Fraction(0))


class MultiSeries:
    __slots__ = ("n_q", "n_legs", "cap_q", "cap_k", "terms")

    def __init__(self, n_q, n_legs, cap_q, cap_k):
        self.n_q = n_q
        self.n_legs = n_legs
        self.cap_q = Fraction(cap_q)
        self.cap_k = cap_k
        self.terms = {}

    def copy(self):
        out = MultiSeries(self.n_q, self.n_legs, self.cap_q, self.cap_k)
        out.terms = dict(self.terms)
        return out

    def _check_key(self, q, k):
        q = tuple(Fraction(x) for x in q)
        k = tuple(int(x) for x in k)
        if len(q) != self.n_q or len(k) != self.n_legs:
            raise ValueError("monomial arity mismatch")
        if _q_degree(q) > self.cap_q or any(x > self.cap_k for x in k):
            raise CapError(f"monomial (q={q}, k={k}) exceeds caps")
        return q, k

    def add_term(self, q, k, value):
        q, k = self._check_key(q, k)
        cur = self.terms.get((q, k))
        new = value if cur is None else cur + value
        if new == 0 if not hasattr(new, "is_zero") else new.is_zero():
            self.terms.pop((q, k), None)
        else:
            self.terms[(q, k)] = new

    def coeff(self, q, k):
        q, k = self._check_key(q, k)
        return self.terms.get((q, k), 0)

    def __add__(self, other):
        self._compat(other)
        out = MultiSeries(self.n_q, self.n_legs,
                          min(self.cap_q, other.cap_q),
                          min(self.cap_k, other.cap_k))
        for src in (self, other):
            for (q, k), v in src.terms.items():
                if _q_degree(q) <= out.cap_q and all(x <= out.cap_k for x in k):
                    out.add_term(q, k, v)
        return out

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            out = self.copy()
            out.terms = {key: v * other for key, v in self.terms.items()}
            return out
        self._compat(other)
        out = MultiSeries(self.n_q, self.n_legs,
                          min(self.cap_q, other.cap_q),
                          min(self.cap_k, other.cap_k))
        for (q1, k1), v1 in self.terms.items():
            for (q2, k2), v2 in other.terms.items():
                q = tuple(a + b for a, b in zip(q1, q2))
                k = tuple(a + b for a, b in zip(k1, k2))
                if _q_degree(q) <= out.cap_q and all(x <= out.cap_k for x in k):
                    out.add_term(q, k, v1 * v2)
        return out

    __rmul__ = __mul__

    def _compat(self, other):
        if self.n_q != other.n_q or self.n_legs != other.n_legs:
            raise ValueError("incompatible MultiSeries shapes")

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(self.terms.get(key, 0) == other.terms.get(key, 0)
                   for key in keys)

    def items_sorted(self):
        return sorted(self.terms.items(),
                      key=lambda kv: (_q_degree(kv[0][0]), kv[0][0], kv[0][1]))

    def __repr__(self):
        rows = [f"Q^{list(q)} w^{list(k)}: {v}" for (q, k), v in
                self.items_sorted()]
        return "MultiSeries{" + "; ".join(rows[:8]) + \
            ("; ..." if len(rows) > 8 else "") + "}"
