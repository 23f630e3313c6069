"""Finite and lattice graph machinery.

A locale is a connected symmetric simple directed graph: the spatial
substrate configurations live on.  Finite locales are materialized with
ordered vertex lists; the Euclidean lattice Z^d is kept implicit and
queried through neighbor enumeration, so boundaries, perimeters and
shift-orbit counts never need an infinite data structure.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

__all__ = [
    "Locale",
    "Lattice",
    "LatticeBox",
    "path",
    "cycle",
    "complete",
    "grid",
    "torus",
    "box",
    "load_locale",
    "boundary",
    "perimeter",
    "counting_report",
    "tempered_ratio",
    "orbit_edge_counts",
    "half_space_opposite",
]


@dataclass(frozen=True)
class Locale:
    """A finite connected symmetric simple directed graph."""

    vertices: tuple
    edges: frozenset  # ordered pairs (u, v)
    name: str = ""

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertices")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}: locales are simple")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) leaves the vertex set")
            if (v, u) not in self.edges:
                raise ValueError(f"missing opposite edge for ({u}, {v})")
        if len(self.vertices) > 1 and not self._connected():
            raise ValueError("locale must be connected")

    def _connected(self) -> bool:
        seen = {self.vertices[0]}
        queue = deque(seen)
        adj = self.adjacency()
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.vertices)

    def adjacency(self) -> dict:
        adj = {u: [] for u in self.vertices}
        for u, v in sorted(self.edges):
            adj[u].append(v)
        return adj

    def neighbors(self, u):
        return [v for (x, v) in self.edges if x == u]

    def contains(self, u) -> bool:
        return u in set(self.vertices)

    def directed_edges(self) -> list:
        """Edges in a deterministic order."""
        return sorted(self.edges)

    def distances_from(self, src) -> dict:
        dist = {src: 0}
        queue = deque([src])
        adj = self.adjacency()
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def distance(self, u, v) -> int:
        return self.distances_from(u)[v]

    def diameter(self) -> int:
        return max(max(self.distances_from(u).values()) for u in self.vertices)

    def degree(self) -> int:
        counts = {u: 0 for u in self.vertices}
        for u, _ in self.edges:
            counts[u] += 1
        return max(counts.values())


@dataclass(frozen=True)
class Lattice:
    """The Euclidean lattice Z^d, queried implicitly."""

    d: int

    def neighbors(self, u):
        out = []
        for j in range(self.d):
            for s in (1, -1):
                v = list(u)
                v[j] += s
                out.append(tuple(v))
        return out

    def contains(self, u) -> bool:
        return len(u) == self.d

    def degree(self) -> int:
        return 2 * self.d


@dataclass(frozen=True)
class LatticeBox:
    """The box [-n, n]^d inside Z^d with nearest-neighbor edges."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ValueError("need d >= 1 and n >= 0")

    def vertices(self) -> list:
        pts = [()]
        for _ in range(self.d):
            pts = [p + (k,) for p in pts for k in range(-self.n, self.n + 1)]
        return sorted(pts)

    def contains(self, u) -> bool:
        return len(u) == self.d and all(abs(c) <= self.n for c in u)

    def size(self) -> int:
        return (2 * self.n + 1) ** self.d

    def as_locale(self) -> Locale:
        verts = self.vertices()
        lat = Lattice(self.d)
        edges = frozenset(
            (u, v) for u in verts for v in lat.neighbors(u) if self.contains(v)
        )
        return Locale(vertices=tuple(verts), edges=edges, name=f"box{self.d}d_n{self.n}")


def path(k: int) -> Locale:
    """Path locale P_k on vertices 0..k-1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    edges = set()
    for i in range(k - 1):
        edges.add((i, i + 1))
        edges.add((i + 1, i))
    return Locale(vertices=tuple(range(k)), edges=frozenset(edges), name=f"p{k}")


def cycle(k: int) -> Locale:
    """Cycle locale C_k on vertices 0..k-1."""
    if k < 3:
        raise ValueError("cycle needs k >= 3")
    edges = set()
    for i in range(k):
        j = (i + 1) % k
        edges.add((i, j))
        edges.add((j, i))
    return Locale(vertices=tuple(range(k)), edges=frozenset(edges), name=f"c{k}")


def complete(k: int) -> Locale:
    """Complete locale K_k on vertices 0..k-1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    edges = frozenset((i, j) for i in range(k) for j in range(k) if i != j)
    return Locale(vertices=tuple(range(k)), edges=edges, name=f"k{k}")


def grid(shape: tuple) -> Locale:
    """Rectangular grid with the given side lengths, e.g. (2, 2)."""
    pts = [()]
    for side in shape:
        if side < 1:
            raise ValueError("grid sides must be >= 1")
        pts = [p + (k,) for p in pts for k in range(side)]
    pts = sorted(pts)
    pset = set(pts)
    lat = Lattice(len(shape))
    edges = frozenset((u, v) for u in pts for v in lat.neighbors(u) if v in pset)
    name = "box" + "x".join(str(s) for s in shape)
    return Locale(vertices=tuple(pts), edges=edges, name=name)


def torus(shape: tuple) -> Locale:
    """Product of cycles with the given side lengths (each >= 3)."""
    pts = [()]
    for side in shape:
        if side < 3:
            raise ValueError("torus sides must be >= 3")
        pts = [p + (k,) for p in pts for k in range(side)]
    pts = sorted(pts)
    edges = set()
    for u in pts:
        for j, side in enumerate(shape):
            for s in (1, -1):
                v = list(u)
                v[j] = (v[j] + s) % side
                edges.add((u, tuple(v)))
    name = "torus" + "x".join(str(s) for s in shape)
    return Locale(vertices=tuple(pts), edges=frozenset(edges), name=name)


def box(d: int, n: int) -> Locale:
    """The box [-n, n]^d as a finite locale."""
    return LatticeBox(d, n).as_locale()


def load_locale(source) -> Locale:
    """Build a finite locale from a JSON edge list.

    Format: {"vertices": [...], "edges": [[u, v], ...]}; vertices may be
    omitted (inferred from edges); opposite edges are added automatically.
    List-valued vertices are converted to tuples.
    """
    doc = json.loads(source) if isinstance(source, (str, bytes)) else source

    def norm(u):
        return tuple(u) if isinstance(u, list) else u

    edges = set()
    verts = set(norm(u) for u in doc.get("vertices", []))
    for u, v in doc["edges"]:
        u, v = norm(u), norm(v)
        edges.add((u, v))
        edges.add((v, u))
        verts.add(u)
        verts.add(v)
    return Locale(vertices=tuple(sorted(verts)), edges=frozenset(edges),
                  name=doc.get("name", "custom"))


def boundary(ambient, region) -> set:
    """Directed edges leaving the region: {e : o(e) in region, t(e) not in}.

    The ambient supplies adjacency; it may be a finite Locale, a Lattice,
    or a LatticeBox (whose ambient lattice is used).
    """
    if isinstance(ambient, LatticeBox):
        ambient = Lattice(ambient.d)
    region = set(region)
    out = set()
    for u in region:
        for v in ambient.neighbors(u):
            if v not in region:
                out.add((u, v))
    return out


def perimeter(ambient, region, ell: int) -> set:
    """Vertices of the region within graph distance ell of its complement."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if isinstance(ambient, LatticeBox):
        ambient = Lattice(ambient.d)
    region = set(region)
    # Shortest paths to the complement stay inside the region until the
    # final step, so an inward multi-source BFS suffices.
    dist = {}
    queue = deque()
    for u in region:
        if any(v not in region for v in ambient.neighbors(u)):
            dist[u] = 1
            queue.append(u)
    while queue:
        u = queue.popleft()
        if dist[u] >= ell:
            continue
        for v in ambient.neighbors(u):
            if v in region and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return {u for u, k in dist.items() if k <= ell}


def counting_report(d: int, n: int, ells=(1, 2, 3)) -> dict:
    """Counts and inequality checks for the box [-n, n]^d.

    Verifies |perim_1| <= |boundary| <= deg * |perim_1| and
    |perim_ell| <= |perim_1| * deg^ell, reporting all counts.
    """
    bx = LatticeBox(d, n)
    lat = Lattice(d)
    verts = bx.vertices()
    bnd = boundary(lat, verts)
    deg = lat.degree()
    perims = {ell: len(perimeter(lat, verts, ell)) for ell in ells}
    p1 = perims.get(1, len(perimeter(lat, verts, 1)))
    report = {
        "d": d,
        "n": n,
        "size": bx.size(),
        "size_formula": (2 * n + 1) ** d,
        "boundary": len(bnd),
        "boundary_formula": 2 * d * (2 * n + 1) ** (d - 1),
        "degree": deg,
        "perimeters": perims,
        "check_perim1_le_boundary": p1 <= len(bnd),
        "check_boundary_le_deg_perim1": len(bnd) <= deg * p1,
        "check_perim_growth": all(perims[ell] <= p1 * deg**ell for ell in perims),
    }
    return report


def tempered_ratio(d: int, n: int) -> float:
    """The enlargement ratio for Lambda_n inside Sigma_n = Lambda_2n.

    Uses the closed-form counts |Lambda_n| = (2n+1)^d,
    |bd Lambda_n| = 2d(2n+1)^(d-1), |Sigma_n| = (4n+1)^d and the diameter
    convention diam(Sigma_n) = d(4n+1); exact integers until the final
    division so n up to 10^6 stays accurate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = (2 * n + 1) ** d
    bd = 2 * d * (2 * n + 1) ** (d - 1)
    sig = (4 * n + 1) ** d
    diam = d * (4 * n + 1)
    num = bd * bd * sig * diam * diam
    den = lam * lam * (sig - lam)
    return num / den


def _edge_direction(e) -> int:
    """Index j of the axis along which the nearest-neighbor edge e points."""
    o, t = e
    diffs = [t[j] - o[j] for j in range(len(o))]
    nz = [j for j, v in enumerate(diffs) if v != 0]
    if len(nz) != 1 or abs(diffs[nz[0]]) != 1:
        raise ValueError(f"{e} is not a nearest-neighbor edge")
    return nz[0]


def orbit_edge_counts(d: int, n: int, e, etilde=None) -> dict:
    """Shift-orbit counts: translates of the box whose boundary carries e.

    Counts z in Z^d with o(e) - z inside [-n, n]^d and t(e) - z outside;
    when a second edge is given, also counts the translates carrying both.
    """
    _edge_direction(e)
    bx = LatticeBox(d, n)

    def hits(edge, z):
        o, t = edge
        om = tuple(o[j] - z[j] for j in range(d))
        tm = tuple(t[j] - z[j] for j in range(d))
        return bx.contains(om) and not bx.contains(tm)

    o = e[0]
    candidates = [tuple(o[j] - w[j] for j in range(d)) for w in bx.vertices()]
    ge = [z for z in candidates if hits(e, z)]
    report = {"count_e": len(ge), "count_formula": (2 * n + 1) ** (d - 1)}
    if etilde is not None:
        _edge_direction(etilde)
        report["count_both"] = sum(1 for z in ge if hits(etilde, z))
    return report


def half_space_opposite(e):
    """Membership test for the half-space on the side opposite to e.

    For e pointing in the +j direction this is {x : x_j <= o(e)_j}; for
    -j it is {x : x_j >= o(e)_j}.
    """
    o, t = e
    j = _edge_direction(e)
    sign = t[j] - o[j]
    if sign > 0:
        return lambda x: x[j] <= o[j]
    return lambda x: x[j] >= o[j]
