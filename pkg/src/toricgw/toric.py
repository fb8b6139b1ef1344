"""Toric data from charge vectors: dual triangulation, toric graph, framings.

Charges q (r rows, r+3 columns, rows summing to zero) determine normal
vectors (alpha_j, beta_j) and the moment polytope.  Triangles of the dual
graph are the polytope vertices; each is a trivalent vertex of the toric
graph with an SL2(Z) framing matrix, half-edge framings summing to zero,
and a planar position whose coordinates are integer combinations of the
Kahler parameters.
"""

from __future__ import annotations

import json
from fractions import Fraction


class ToricError(ValueError):
    pass


class LinComb:
    """const + sum_j c_j t_j with Fraction coefficients."""

    __slots__ = ("vec",)

    def __init__(self, vec):
        self.vec = tuple(Fraction(v) for v in vec)

    @classmethod
    def const(cls, c, r):
        return cls((c,) + (0,) * r)

    @classmethod
    def t(cls, j, r):
        v = [Fraction(0)] * (r + 1)
        v[j + 1] = Fraction(1)
        return cls(v)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return LinComb((self.vec[0] + other,) + self.vec[1:])
        return LinComb(tuple(a + b for a, b in zip(self.vec, other.vec)))

    __radd__ = __add__

    def __neg__(self):
        return LinComb(tuple(-a for a in self.vec))

    def __sub__(self, other):
        return self + (-other if isinstance(other, LinComb)
                       else LinComb.const(-other, len(self.vec) - 1))

    def __mul__(self, c):
        return LinComb(tuple(a * c for a in self.vec))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return LinComb(tuple(a / c for a in self.vec))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.vec[0] == other and all(a == 0 for a in self.vec[1:])
        return self.vec == other.vec

    def __hash__(self):
        return hash(self.vec)

    def eval(self, tvals):
        out = self.vec[0]
        for c, t in zip(self.vec[1:], tvals):
            out = out + c * t
        return out

    def __repr__(self):
        parts = []
        if self.vec[0] != 0:
            parts.append(str(self.vec[0]))
        for j, c in enumerate(self.vec[1:], 1):
            if c == 0:
                continue
            if c == 1:
                parts.append(f"t{j}")
            elif c == -1:
                parts.append(f"-t{j}")
            else:
                parts.append(f"{c}*t{j}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


class ChargeSpec:
    def __init__(self, charges, kahler=None):
        rows = [tuple(int(x) for x in row) for row in charges]
        self.r = len(rows)
        for row in rows:
            if len(row) != self.r + 3:
                raise ToricError("each charge row needs r+3 entries")
            if sum(row) != 0:
                raise ToricError(f"charge row {row} does not sum to zero")
        self.charges = rows
        if self.r and _rank(rows) != self.r:
            raise ToricError("charge rows are linearly dependent")
        # reference Kahler values used only to pick the polytope chamber
        self.kahler = list(kahler) if kahler else \
            [Fraction(100 + 7 * j) for j in range(self.r)]

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(doc["charges"], doc.get("kahler")), int(doc.get("framing", 0))


def _rank(rows):
    m = [[Fraction(x) for x in row] for row in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                c = m[i][col]
                m[i] = [a - c * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _solve_square(mat, rhs):
    """Exact solve of a square system over Fractions; None if singular."""
    n = len(mat)
    m = [[Fraction(x) for x in row] + [Fraction(rhs[i])]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                c = m[i][col]
                m[i] = [a - c * b for a, b in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def _signed_area2(p1, p2, p3):
    """Twice the signed area."""
    return (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1])


class DualGraph:
    """Triangulated Newton polygon: lattice vertices plus oriented triangles."""

    def __init__(self, vertices, triangles):
        self.vertices = [tuple(v) for v in vertices]
        tris = []
        for t in triangles:
            if _signed_area2(*(self.vertices[i] for i in t)) < 0:
                t = (t[0], t[2], t[1])
            tris.append(tuple(t))
        self.triangles = tris
        edges = {}
        for ti, t in enumerate(self.triangles):
            for k in range(3):
                e = frozenset((t[k], t[(k + 1) % 3]))
                edges.setdefault(e, []).append(ti)
        self.edge_triangles = edges

    def interior_vertices(self):
        """Dual vertices strictly inside the convex hull (the genus count)."""
        hull = _convex_hull(self.vertices)
        boundary = set()
        for i, p in enumerate(self.vertices):
            if _on_hull_boundary(p, hull):
                boundary.add(i)
        return [i for i in range(len(self.vertices)) if i not in boundary]

    def genus(self):
        return len(self.interior_vertices())

    def triangle_areas(self):
        return [Fraction(_signed_area2(*(self.vertices[i] for i in t)), 2)
                for t in self.triangles]


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(pts):
        out = []
        for p in pts:
            while len(out) >= 2 and _signed_area2(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(list(reversed(pts)))
    return lower[:-1] + upper[:-1]


def _on_hull_boundary(p, hull):
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if _signed_area2(a, b, p) == 0 and \
                min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and \
                min(a[1], b[1]) <= p[1] <= max(a[1], b[1]):
            return True
    return False


def _rot90(v):
    return (-v[1], v[0])


class HalfEdge:
    __slots__ = ("index", "vertex", "side", "framing", "direction",
                 "compact", "partner", "s")

    def __init__(self, index, vertex, side, framing, direction, compact):
        self.index = index
        self.vertex = vertex          # toric vertex (= triangle) index
        self.side = side              # ordered dual edge (i1, i2) it crosses
        self.framing = framing
        self.direction = direction
        self.compact = compact
        self.partner = None           # half-edge index across the edge
        self.s = None

    def __repr__(self):
        kind = "compact" if self.compact else "open"
        return (f"HalfEdge({self.index}@v{self.vertex} f={self.framing} "
                f"{kind} s={self.s})")


class ToricGraph:
    def __init__(self, dual, r, positions, framing_matrices, halfedges):
        self.dual = dual
        self.r = r
        self.positions = positions              # [(LinComb a, LinComb b)]
        self.framing_matrices = framing_matrices
        self.halfedges = halfedges
        self.genus = dual.genus()

    @property
    def n_vertices(self):
        return len(self.positions)

    def halfedges_at(self, v):
        return [h for h in self.halfedges if h.vertex == v]

    def compact_edges(self):
        seen = set()
        out = []
        for h in self.halfedges:
            if h.compact and h.index not in seen:
                seen.add(h.index)
                seen.add(h.partner)
                out.append((h.index, h.partner))
        return out

    def noncompact_halfedges(self):
        return [h for h in self.halfedges if not h.compact]

    def counts(self):
        return {"vertices": self.n_vertices,
                "compact_edges": len(self.compact_edges()),
                "noncompact_edges": len(self.noncompact_halfedges()),
                "genus": self.genus}

    def check_invariants(self):
        g, r = self.genus, self.r
        c = self.counts()
        assert c["vertices"] == g + r + 1, c
        assert c["compact_edges"] == 2 * g + r, c
        assert c["noncompact_edges"] == r + 3 - g, c
        for v, f in enumerate(self.framing_matrices):
            (fa, fb), (fc, fd) = f
            if fa * fd - fb * fc != 1:
                raise ToricError(f"det f_sigma != 1 at vertex {v}")
            fr = [h.framing for h in self.halfedges_at(v)]
            if sum(fr) != 0:
                raise ToricError(f"half-edge framings at {v} sum to {sum(fr)}")
        for h in self.halfedges:
            if h.compact:
                p = self.halfedges[h.partner]
                if p.framing != -h.framing:
                    raise ToricError("edge framings not opposite")

    def to_dot(self):
        lines = ["graph toric {"]
        for v, (a, b) in enumerate(self.positions):
            f = self.framing_matrices[v]
            lines.append(
                f'  v{v} [label="v{v}\\n({a}, {b})\\nf={f}"];')
        for i, j in self.compact_edges():
            h = self.halfedges[i]
            lines.append(
                f"  v{h.vertex} -- v{self.halfedges[j].vertex} "
                f'[label="f={h.framing}"];')
        nleaf = 0
        for h in self.noncompact_halfedges():
            lines.append(f'  leaf{nleaf} [shape=point];')
            lines.append(f'  v{h.vertex} -- leaf{nleaf} [label="f={h.framing}"];')
            nleaf += 1
        lines.append("}")
        return "\n".join(lines)


def dual_to_dot(dual):
    lines = ["graph dual {"]
    for i, (a, b) in enumerate(dual.vertices):
        lines.append(f'  d{i} [label="({a},{b})", pos="{a},{b}!"];')
    for e in dual.edge_triangles:
        i, j = sorted(e)
        lines.append(f"  d{i} -- d{j};")
    lines.append("}")
    return "\n".join(lines)


def build_graphs(spec):
    """ChargeSpec -> (DualGraph, ToricGraph) in the unframed presentation."""
    r = spec.r
    n = r + 3
    q = spec.charges
    alpha = _normal_vector(q, 0, r)
    beta = _normal_vector(q, 1, r)
    verts = list(zip(alpha, beta))
    if len(set(verts)) != n:
        raise ToricError("degenerate configuration: repeated dual vertices")

    # polytope vertices: triples with the complementary square block invertible
    # and nonnegative moment coordinates at the reference Kahler point
    tvals = spec.kahler
    triangles, positions = [], []
    for t in _triples(n):
        others = [j for j in range(n) if j not in t]
        mat = [[q[i][j] for j in others] for i in range(r)]
        sol = _solve_square(mat, tvals) if r else []
        if sol is None:
            continue
        if any(x < 0 for x in sol):
            continue
        if any(x == 0 for x in sol):
            raise ToricError("degenerate configuration at reference Kahler "
                             "point (non-simple polytope vertex)")
        # symbolic positions: x_others = M^{-1} t, column by column
        x = {j: LinComb.const(0, r) for j in range(n)}
        for k in range(r):
            ek = [1 if i == k else 0 for i in range(r)]
            col = _solve_square(mat, ek)
            for idx, j in enumerate(others):
                x[j] = x[j] + LinComb.t(k, r) * col[idx]
        triangles.append(tuple(t))
        positions.append((x.get(0, LinComb.const(0, r)),
                          x.get(1, LinComb.const(0, r))))

    dual = DualGraph(verts, triangles)
    areas = dual.triangle_areas()
    if any(abs(a) != Fraction(1, 2) for a in areas):
        raise ToricError(f"smoothness fails: triangle areas {areas}")
    toric = _assemble_toric(dual, r, positions)
    toric.check_invariants()
    return dual, toric


def _normal_vector(q, unit_pos, r):
    """Integer vector v with v[0..2] = unit basis e_unit_pos, q . v = 0."""
    n = r + 3
    lead = [1 if j == unit_pos else 0 for j in range(3)]
    if r == 0:
        return lead
    mat = [[q[i][j] for j in range(3, n)] for i in range(r)]
    rhs = [-q[i][unit_pos] for i in range(r)]
    sol = _solve_square(mat, rhs)
    if sol is None:
        raise ToricError("charge block q[:,3:] singular; relabel coordinates")
    for x in sol:
        if x.denominator != 1:
            raise ToricError("normal vector not integral (smoothness fails)")
    return lead + [int(x) for x in sol]


def _triples(n):
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                yield (i, j, k)


def _assemble_toric(dual, r, positions):
    framings, halfedges = [], []
    for ti, tri in enumerate(dual.triangles):
        p = [dual.vertices[i] for i in tri]
        fa = p[2][1] - p[0][1]
        fb = p[0][1] - p[1][1]
        fc = p[0][0] - p[2][0]
        fd = p[1][0] - p[0][0]
        framings.append(((fa, fb), (fc, fd)))
        for k in range(3):
            i1, i2 = tri[k], tri[(k + 1) % 3]
            side = frozenset((i1, i2))
            compact = len(dual.edge_triangles[side]) == 2
            f_eps = dual.vertices[i1][1] - dual.vertices[i2][1]
            w = _rot90((dual.vertices[i2][0] - dual.vertices[i1][0],
                        dual.vertices[i2][1] - dual.vertices[i1][1]))
            halfedges.append(HalfEdge(len(halfedges), ti, (i1, i2),
                                      f_eps, w, compact))
    # pair compact halves
    by_side = {}
    for h in halfedges:
        by_side.setdefault(frozenset(h.side), []).append(h.index)
    for side, idxs in by_side.items():
        if len(idxs) == 2:
            a, b = idxs
            halfedges[a].partner = b
            halfedges[b].partner = a
    return ToricGraph(dual, r, positions, framings, halfedges)


def check_smoothness(dual):
    """Report of per-triangle areas; passes iff all equal 1/2."""
    areas = dual.triangle_areas()
    return {"areas": areas,
            "pass": all(a == Fraction(1, 2) for a in areas)}


def apply_framing(dual, toric, f):
    """Shear (alpha, beta) -> (alpha, beta + f*alpha); no vertical edge allowed."""
    verts = [(a, b + f * a) for (a, b) in dual.vertices]
    new_dual = DualGraph(verts, dual.triangles)
    positions = [(a - Fraction(f) * b, b) for (a, b) in toric.positions]
    new_toric = _assemble_toric(new_dual, toric.r, positions)
    for h in new_toric.halfedges:
        if h.framing == 0:
            raise ToricError(
                f"framing {f} leaves a vertical toric edge (dual side {h.side})")
    new_toric.check_invariants()
    return new_dual, new_toric


# ---------------------------------------------------------------------------
# s factors


def default_tree(toric):
    """All non-compact edges plus a BFS spanning set of compact edges."""
    tree = set(h.index for h in toric.noncompact_halfedges())
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop(0)
        for h in sorted(toric.halfedges_at(v), key=lambda h: h.index):
            if h.compact:
                u = toric.halfedges[h.partner].vertex
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
                    tree.add(h.index)
                    tree.add(h.partner)
    if len(seen) != toric.n_vertices:
        raise ToricError("toric graph is disconnected")
    return tree


def assign_s_factors(toric, tree=None, root_halfedge=None):
    """Fill h.s on every half-edge per the leaves-to-root recursion.

    The tree must contain every non-compact edge and span all vertices; the
    root is the infinite end of `root_halfedge` (default: the lowest-index
    non-compact half-edge).
    """
    tree = set(tree) if tree is not None else default_tree(toric)
    _validate_tree(toric, tree)
    if root_halfedge is None:
        root_halfedge = min(h.index for h in toric.noncompact_halfedges()
                            if h.index in tree)
    for h in toric.halfedges:
        h.s = None
    # walk the tree from the root's vertex
    root_v = toric.halfedges[root_halfedge].vertex
    order, parent = _tree_order(toric, tree, root_v)
    for h in toric.halfedges:
        if h.index not in tree and h.compact:
            h.s = Fraction(0)
        elif not h.compact and h.index != root_halfedge:
            h.s = Fraction(0)
    for v in reversed(order):
        ph = parent[v]  # half-edge at v toward the root (None at root vertex)
        at_v = toric.halfedges_at(v)
        if ph is None:
            ph = toric.halfedges[root_halfedge]
        for h in at_v:
            if h.compact and h.index in tree and h.s is None and h != ph:
                # child edge: the child's side was set already
                h.s = -toric.halfedges[h.partner].s
        total = sum(h.s for h in at_v if h != ph)
        ph.s = 1 - total
    _check_s(toric)
    return toric


def _validate_tree(toric, tree):
    for h in toric.noncompact_halfedges():
        if h.index not in tree:
            raise ToricError("tree must contain every non-compact edge")
    for i in tree:
        h = toric.halfedges[i]
        if h.compact and h.partner not in tree:
            raise ToricError("tree contains a half of a compact edge only")
    # spanning and acyclic over compact tree edges
    edges = {frozenset((h.vertex, toric.halfedges[h.partner].vertex))
             for h in (toric.halfedges[i] for i in tree) if h.compact}
    seen = {0}
    frontier = [0]
    used = 0
    while frontier:
        v = frontier.pop()
        for e in list(edges):
            if v in e:
                u = next(iter(e - {v}), v)
                edges.discard(e)
                used += 1
                if u not in seen:
                    seen.add(u)
                    frontier.append(u)
    if len(seen) != toric.n_vertices:
        raise ToricError("tree does not span all vertices")
    if edges:
        raise ToricError("tree has a cycle")


def _tree_order(toric, tree, root_v):
    parent = {root_v: None}
    order = [root_v]
    frontier = [root_v]
    while frontier:
        v = frontier.pop(0)
        for h in sorted(toric.halfedges_at(v), key=lambda h: h.index):
            if h.compact and h.index in tree:
                u = toric.halfedges[h.partner].vertex
                if u not in parent:
                    parent[u] = toric.halfedges[h.partner]
                    order.append(u)
                    frontier.append(u)
    return order, parent


def _check_s(toric):
    for v in range(toric.n_vertices):
        total = sum(h.s for h in toric.halfedges_at(v))
        if total != 1:
            raise ToricError(f"s factors at vertex {v} sum to {total}")
    for h in toric.halfedges:
        if h.compact and toric.halfedges[h.partner].s != -h.s:
            raise ToricError("s not antisymmetric across a compact edge")
