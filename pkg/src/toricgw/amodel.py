"""Localization graph sums: decorated graphs, vertex/edge weights, open series.

A decorated graph has vertices colored by toric-graph vertices with genera,
closed edges pairing adjacent toric half-edges with equal degrees >= 1, and
labeled open legs on the brane's half-edge.  The generating series is

  lam^n sum_G  1/|Aut G|  prod_v H  prod_e F  prod_legs (d/f^2) u^d

with H the triple-Hodge vertex weight, F the Kahler-weighted propagator and
u_i the recentered winding variable e^{-(x_i - a_brane)/f}; every closed
edge of degree d carries Q-degree d, so caps bound the graph family.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product

from .fields import QuadField, QQ
from .intersection import defined_convention
from .multiseries import MultiSeries
from .toric import LinComb
from .vertex import VertexData

# triangle side position -> puncture chart of the vertex curve
SIDE_TO_CHART = {0: "z=0", 1: "z=inf", 2: "z=1"}


class BraneSpec:
    """Lagrangian on a non-compact half-edge, with winding cap."""

    def __init__(self, toric, halfedge_index, kmax):
        h = toric.halfedges[halfedge_index]
        if h.compact:
            raise ValueError("the brane must end on a non-compact edge")
        self.halfedge = halfedge_index
        self.vertex = h.vertex
        self.framing = h.framing
        self.kmax = kmax


class DecoratedGraph:
    """One localization graph: vertex colors/genera, edges, labeled legs."""

    __slots__ = ("vertices", "edges", "legs", "aut")

    def __init__(self, vertices, edges, legs, aut=None):
        self.vertices = tuple(vertices)   # (sigma, g_v) per vertex
        self.edges = tuple(sorted(_norm_edge(e) for e in edges))
        self.legs = tuple(legs)           # per label: (v, eps, d)
        self.aut = aut

    def valence(self, v):
        n = 0
        for (v1, _, v2, _, _) in self.edges:
            n += (v1 == v) + (v2 == v)
        n += sum(1 for (lv, _, _) in self.legs if lv == v)
        return n

    def euler_ok(self, g, n):
        rhs = sum(2 - 2 * gv - self.valence(i)
                  for i, (_, gv) in enumerate(self.vertices))
        return 2 - 2 * g - n == rhs

    def q_degree(self):
        return sum(d for (_, _, _, _, d) in self.edges)

    def canonical(self):
        best = None
        V = len(self.vertices)
        for perm in permutations(range(V)):
            vs = tuple(self.vertices[perm.index(i)] for i in range(V))
            es = tuple(sorted(_norm_edge((perm[v1], e1, perm[v2], e2, d))
                              for (v1, e1, v2, e2, d) in self.edges))
            ls = tuple((perm[v], e, d) for (v, e, d) in self.legs)
            cand = (vs, es, ls)
            if best is None or cand < best:
                best = cand
        return best

    def automorphisms(self):
        """|Aut|: decoration-preserving vertex bijections fixing the labeled
        legs, times m! per class of m identical parallel edges."""
        V = len(self.vertices)
        edge_ms = {}
        for e in self.edges:
            edge_ms[e] = edge_ms.get(e, 0) + 1
        count = 0
        for perm in permutations(range(V)):
            if any(self.vertices[i] != self.vertices[perm[i]]
                   for i in range(V)):
                continue
            if any((perm[v], e, d) != self.legs[i]
                   for i, (v, e, d) in enumerate(self.legs)):
                continue
            mapped = {}
            for (v1, e1, v2, e2, d) in self.edges:
                key = _norm_edge((perm[v1], e1, perm[v2], e2, d))
                mapped[key] = mapped.get(key, 0) + 1
            if mapped == edge_ms:
                count += 1
        par = 1
        for m in edge_ms.values():
            par *= _factorial(m)
        return count * par

    def __repr__(self):
        return (f"Graph(v={self.vertices}, e={self.edges}, "
                f"legs={self.legs}, aut={self.aut})")


def _norm_edge(e):
    v1, e1, v2, e2, d = e
    if (v2, e2) < (v1, e1):
        v1, e1, v2, e2 = v2, e2, v1, e1
    return (v1, e1, v2, e2, d)


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _compositions(total, parts):
    """Vectors of `parts` integers >= 1 summing to exactly `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_graphs(g, n, toric, brane, dq_cap, max_vertices=None):
    """All isomorphism classes of decorated graphs within the caps."""
    max_edges = dq_cap
    out = []
    seen = set()
    for ne in range(0, max_edges + 1):
        vmax = min(max_vertices or (ne + 1), ne + 1)
        for nv in range(1, vmax + 1):
            for graph in _graphs_with(g, n, toric, brane, nv, ne, dq_cap):
                if not graph.euler_ok(g, n):
                    continue
                key = graph.canonical()
                if key in seen:
                    continue
                seen.add(key)
                graph.aut = graph.automorphisms()
                out.append(graph)
    out.sort(key=lambda gr: gr.canonical())
    return out


def _graphs_with(g, n, toric, brane, nv, ne, dq_cap):
    sigmas = range(toric.n_vertices)
    halfpairs = []
    for (i, j) in toric.compact_edges():
        halfpairs.append((i, j))
        halfpairs.append((j, i))
    for colors in product(sigmas, repeat=nv):
        if brane.vertex not in colors and n > 0:
            continue
        for genera in product(range(g + 1), repeat=nv):
            if sum(genera) > g:
                continue
            slots = []
            for (va, vb) in product(range(nv), repeat=2):
                for (ea, eb) in halfpairs:
                    if toric.halfedges[ea].vertex != colors[va]:
                        continue
                    if toric.halfedges[eb].vertex != colors[vb]:
                        continue
                    if (vb, eb) < (va, ea):
                        continue
                    slots.append((va, ea, vb, eb))
            for combo in combinations_with_replacement(slots, ne):
                if not _connected(nv, combo):
                    continue
                for dtotal in range(ne, dq_cap + 1):
                    for degs in _compositions(dtotal, ne):
                        edges = tuple(
                            (va, ea, vb, eb, d)
                            for (va, ea, vb, eb), d in zip(combo, degs))
                        for legs in _leg_assignments(n, nv, colors, brane):
                            yield DecoratedGraph(list(zip(colors, genera)),
                                                 edges, legs)


def _connected(nv, edges):
    if nv == 1:
        return True
    adj = {i: set() for i in range(nv)}
    for (va, _, vb, _) in edges:
        adj[va].add(vb)
        adj[vb].add(va)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == nv


def _leg_assignments(n, nv, colors, brane):
    if n == 0:
        yield ()
        return
    bv = [i for i in range(nv) if colors[i] == brane.vertex]
    for vs in product(bv, repeat=n):
        for ds in product(range(1, brane.kmax + 1), repeat=n):
            yield tuple((v, brane.halfedge, d) for v, d in zip(vs, ds))


# ---------------------------------------------------------------------------
# Weights


class VertexBank:
    """VertexData per toric vertex plus half-edge -> chart resolution."""

    def __init__(self, toric, calibration):
        self.toric = toric
        self.cal = calibration
        self.data = []
        for v, ((fa, fb), (fc, fd)) in enumerate(toric.framing_matrices):
            self.data.append(VertexData(fa, fb,
                                        tzero_sign=calibration.tzero_sign))

    def chart_of(self, halfedge_index):
        h = self.toric.halfedges[halfedge_index]
        side_pos = halfedge_index % 3   # halfedges are built 3 per triangle
        chart = SIDE_TO_CHART[side_pos]
        vd = self.data[h.vertex]
        assert vd.chart(chart).framing == h.framing, \
            (halfedge_index, chart, vd.chart(chart).framing, h.framing)
        return vd, chart


class Calibration:
    """Frozen sign/factor conventions (see harness.calibrate)."""

    def __init__(self, tzero_sign=1, genus_sign=-1, leg_sign=1, h02_factor=1):
        self.tzero_sign = tzero_sign
        self.genus_sign = genus_sign   # applied as genus_sign**g_v per vertex
        self.leg_sign = leg_sign       # applied as leg_sign**n globally
        self.h02_factor = h02_factor

    def as_dict(self):
        return {"tzero_sign": self.tzero_sign, "genus_sign": self.genus_sign,
                "leg_sign": self.leg_sign, "h02_factor": self.h02_factor}

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)

    def __eq__(self, other):
        return isinstance(other, Calibration) and \
            self.as_dict() == other.as_dict()


def vertex_weight(bank, sigma, g_v, halfedge_degrees, table=None):
    """H_{g,n,sigma}: prefactor times the Hodge-gamma-psi contraction.

    halfedge_degrees: list of (toric half-edge index, degree d_h).  The
    gamma arguments are k = d_h / f_eps (chart-continued when f_eps < 0 or
    fractional); unstable (0,1) and (0,2) take the defined conventions.
    """
    n_v = len(halfedge_degrees)
    vd = bank.data[sigma]
    f = vd.field
    cal = bank.cal
    pref = f.coerce(Fraction(2) ** (3 * g_v - 3 + n_v))
    pref = pref * vd.exp_t0 ** (2 * g_v - 2 + n_v)
    if cal.genus_sign == -1:
        pref = pref * Fraction((-1) ** g_v)
    legf = f.one
    ks = []
    for (he, d) in halfedge_degrees:
        vd2, chart = bank.chart_of(he)
        assert vd2 is vd
        feps = vd.chart(chart).framing
        legf = legf * vd.gamma_chart(chart, d)
        ks.append(Fraction(d, feps))
    if 2 - 2 * g_v - n_v < 0:
        weights = (vd.fa, vd.fb, -vd.fa - vd.fb)
        dim = 3 * g_v - 3 + n_v
        total = Fraction(0)
        for ds in product(range(dim + 1), repeat=n_v):
            if sum(ds) > dim:
                continue
            if table is not None:
                hv = table.lookup(g_v, n_v, weights, ds)
            else:
                from .intersection import hodge_integral
                hv = hodge_integral(g_v, n_v, weights, ds)
            if hv == 0:
                continue
            mono = hv
            for k, dd in zip(ks, ds):
                mono *= k ** dd
            total += mono
        bracket = f.coerce(total)
    else:
        bracket = f.coerce(defined_convention(g_v, n_v, ks,
                                              h02_factor=cal.h02_factor))
    return pref * bracket * legf


def edge_weight(toric, eps_plus, eps_minus, d, dprime):
    """F = A delta_{d,d'} (d/f^2) Q^(d (a_sigma - a_sigma')/f) as a monomial.

    Returns (rational factor, tuple of Q-exponents) or None when the pair is
    not an edge / degrees differ.
    """
    h = toric.halfedges[eps_plus]
    if h.partner != eps_minus or d != dprime:
        return None
    hp = toric.halfedges[eps_minus]
    a_self = toric.positions[h.vertex][0]
    a_other = toric.positions[hp.vertex][0]
    diff = a_other - a_self          # a_{sigma'} - a_{sigma}
    expo = tuple(Fraction(d, h.framing) * c for c in diff.vec[1:])
    if diff.vec[0] != 0:
        raise ValueError("edge length has a constant part")
    return Fraction(d, h.framing ** 2), expo


def gw_sum(g, n, toric, brane, dq_cap, calibration=None, table=None,
           graphs=None):
    """The open Gromov-Witten generating series as a MultiSeries.

    Monomials: Q-exponent vector (one slot per Kahler parameter) and the
    winding vector (k_i = leg degrees); coefficients are exact scalars in the
    smallest common quadratic field of the vertices.
    """
    cal = calibration or Calibration()
    bank = VertexBank(toric, cal)
    field = _common_field([vd.field for vd in bank.data])
    if graphs is None:
        graphs = enumerate_graphs(g, n, toric, brane, dq_cap)
    series = MultiSeries(toric.r, n, dq_cap, brane.kmax)
    for gr in graphs:
        total = field.one
        qexp = [Fraction(0)] * toric.r
        dead = False
        # vertices
        for vi, (sigma, gv) in enumerate(gr.vertices):
            hd = []
            for (v1, e1, v2, e2, d) in gr.edges:
                if v1 == vi:
                    hd.append((e1, d))
                if v2 == vi:
                    hd.append((e2, d))
            for (lv, eps, d) in gr.legs:
                if lv == vi:
                    hd.append((eps, d))
            w = vertex_weight(bank, sigma, gv, hd, table=table)
            total = total * field.coerce(w)
        # closed edges
        for (v1, e1, v2, e2, d) in gr.edges:
            fw = edge_weight(toric, e1, e2, d, d)
            if fw is None:
                dead = True
                break
            fac, expo = fw
            total = total * fac
            qexp = [a + b for a, b in zip(qexp, expo)]
        if dead:
            continue
        # open legs: (d/f^2) u^d, u recentered at the brane vertex
        ks = []
        for (lv, eps, d) in gr.legs:
            h = toric.halfedges[eps]
            total = total * Fraction(d, h.framing ** 2)
            ks.append(d)
        total = total * Fraction(1, gr.aut)
        if cal.leg_sign == -1:
            total = total * Fraction((-1) ** n)
        if any(e < 0 for e in qexp):
            raise ArithmeticError(f"negative Q-exponent {qexp} in {gr}")
        series.add_term(tuple(qexp), tuple(ks), field.coerce(total))
    return series


def _common_field(fields):
    ds = {f.D for f in fields if getattr(f, "D", 1) != 1}
    if not ds:
        return QuadField(1)
    if len(ds) == 1:
        return QuadField(ds.pop())
    raise NotImplementedError(
        f"vertices span several quadratic extensions {sorted(ds)}; "
        "run this geometry in numeric mode")
