"""Configurations, transitions and the transition graph on finite locales.

Configurations over a finite locale are coded mixed-radix with the sorted
vertex list as digit order (first vertex most significant), matching the
table layout in `tables`.  Transition successors are computed vectorized
over all configuration codes, so graphs up to the enumeration budget stay
cheap to build.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import BudgetExceededError, InvalidQueryError
from .interaction import ConsvBasis, InteractionTable, conserved_basis
from .locales import Locale
from .tables import FunctionTable, exchange_code_map, pair_code_map

__all__ = [
    "DEFAULT_BUDGET",
    "Configuration",
    "TransitionGraph",
    "apply_edge",
    "apply_move",
    "exchange",
    "conserved_vector",
    "class_keys",
    "irreducibly_quantified_check",
    "IrreducibilityReport",
    "find_path",
    "is_class_measurable",
]

DEFAULT_BUDGET = 2**22


def config_vertices(locale: Locale) -> tuple:
    return tuple(sorted(locale.vertices))


def check_budget(space, locale: Locale, budget: int = DEFAULT_BUDGET) -> int:
    n = space.size ** len(locale.vertices)
    if n > budget:
        raise BudgetExceededError(
            f"|S|^|Lambda| = {n} exceeds the enumeration budget {budget}"
        )
    return n


@dataclass(frozen=True)
class Configuration:
    """A state assignment on a finite locale."""

    locale: Locale
    space: object
    states: tuple  # state index per vertex, in sorted vertex order

    def __post_init__(self):
        if len(self.states) != len(self.locale.vertices):
            raise ValueError("one state per vertex required")
        if any(not 0 <= s < self.space.size for s in self.states):
            raise ValueError("state index out of range")

    @property
    def code(self) -> int:
        code = 0
        for s in self.states:
            code = code * self.space.size + s
        return code

    @classmethod
    def from_code(cls, locale: Locale, space, code: int) -> "Configuration":
        verts = config_vertices(locale)
        digits = []
        for _ in verts:
            code, r = divmod(code, space.size)
            digits.append(r)
        return cls(locale, space, tuple(reversed(digits)))

    def state_at(self, vertex) -> int:
        return self.states[config_vertices(self.locale).index(vertex)]

    def replace(self, vertex_states: dict) -> "Configuration":
        verts = config_vertices(self.locale)
        states = list(self.states)
        for v, s in vertex_states.items():
            states[verts.index(v)] = s
        return Configuration(self.locale, self.space, tuple(states))


def apply_edge(eta: Configuration, phi: InteractionTable, e) -> Configuration:
    """The transition eta^e across a directed edge of the locale."""
    if e not in eta.locale.edges:
        raise InvalidQueryError(f"edge {e} is not in the locale")
    return apply_move(eta, phi, e[0], e[1])


def apply_move(eta: Configuration, phi: InteractionTable, x, y) -> Configuration:
    """eta^{x->y}: phi applied to the (x, y) pair regardless of adjacency."""
    if x == y:
        return eta
    s1, s2 = phi.apply(eta.state_at(x), eta.state_at(y))
    return eta.replace({x: s1, y: s2})


def exchange(eta: Configuration, x, y) -> Configuration:
    """eta^{x,y}: the unconditional swap of the two components."""
    if x == y:
        return eta
    return eta.replace({x: eta.state_at(y), y: eta.state_at(x)})


def conserved_vector(eta: Configuration, basis: ConsvBasis) -> tuple:
    """Componentwise conserved sums, exact over the rationals."""
    return tuple(
        sum((vec[s] for s in eta.states), Fraction(0)) for vec in basis.vectors
    )


class TransitionGraph:
    """All single-edge transitions on S^Lambda, as successor code arrays."""

    def __init__(self, locale: Locale, phi: InteractionTable,
                 budget: int = DEFAULT_BUDGET):
        self.locale = locale
        self.phi = phi
        self.space = phi.space
        self.vertices = config_vertices(locale)
        self.n_configs = check_budget(phi.space, locale, budget)
        self.edges = locale.directed_edges()
        fwd = pair_code_map(phi)
        codes = np.arange(self.n_configs, dtype=np.int64)
        m = self.space.size
        w = len(self.vertices)
        self.succ = {}
        for (u, v) in self.edges:
            pu = m ** (w - 1 - self.vertices.index(u))
            pv = m ** (w - 1 - self.vertices.index(v))
            du = (codes // pu) % m
            dv = (codes // pv) % m
            mapped = fwd[du * m + dv]
            self.succ[(u, v)] = codes + (mapped // m - du) * pu + (mapped % m - dv) * pv
        self._components = None

    def components(self) -> np.ndarray:
        """Component label per configuration code (smallest code in it)."""
        if self._components is None:
            labels = np.arange(self.n_configs, dtype=np.int64)
            changed = True
            while changed:
                changed = False
                for succ in self.succ.values():
                    joined = np.minimum(labels, labels[succ])
                    if not np.array_equal(joined, labels):
                        labels = joined
                        changed = True
                    # pointer-jumping keeps labels canonical
                    labels = labels[labels]
            self._components = labels
        return self._components

    def class_key_matrix(self, basis: ConsvBasis) -> np.ndarray:
        """Integer conserved vectors per configuration, (n_configs, c_phi)."""
        m = self.space.size
        w = len(self.vertices)
        codes = np.arange(self.n_configs, dtype=np.int64)
        out = np.zeros((self.n_configs, basis.dimension), dtype=np.int64)
        for i, vec in enumerate(basis.vectors):
            scale = lcm(*(f.denominator for f in vec)) if vec else 1
            ints = np.array([int(f * scale) for f in vec], dtype=np.int64)
            for pos in range(w):
                p = m ** (w - 1 - pos)
                out[:, i] += ints[(codes // p) % m]
        return out


def class_keys(graph: TransitionGraph, basis: ConsvBasis) -> np.ndarray:
    """Group id per configuration, constant exactly on conserved classes."""
    mat = graph.class_key_matrix(basis)
    _, inverse = np.unique(mat, axis=0, return_inverse=True)
    return inverse


@dataclass(frozen=True)
class IrreducibilityReport:
    locale_name: str
    ok: bool
    n_configs: int
    n_classes: int
    n_components: int
    witness: tuple | None  # (states_a, states_b) in one class, different components


def irreducibly_quantified_check(phi: InteractionTable, locale: Locale,
                                 budget: int = DEFAULT_BUDGET) -> IrreducibilityReport:
    """Partition S^Lambda by conserved class and test one component per class.

    This samples the quantification property on a single finite locale;
    a passing result certifies the locale, not the property in general.
    """
    graph = TransitionGraph(locale, phi, budget)
    basis = conserved_basis(phi)
    keys = class_keys(graph, basis)
    comps = graph.components()
    n_classes = int(keys.max()) + 1 if keys.size else 0
    witness = None
    ok = True
    for cls in range(n_classes):
        idx = np.nonzero(keys == cls)[0]
        roots = np.unique(comps[idx])
        if roots.size > 1:
            ok = False
            a = int(idx[comps[idx] == roots[0]][0])
            b = int(idx[comps[idx] == roots[1]][0])
            witness = (
                tuple(Configuration.from_code(locale, phi.space, a).states),
                tuple(Configuration.from_code(locale, phi.space, b).states),
            )
            break
    return IrreducibilityReport(
        locale_name=locale.name or "locale",
        ok=ok,
        n_configs=graph.n_configs,
        n_classes=n_classes,
        n_components=int(np.unique(comps).size),
        witness=witness,
    )


def find_path(eta: Configuration, eta2: Configuration, phi: InteractionTable,
              budget: int = DEFAULT_BUDGET):
    """Breadth-first edge sequence from eta to eta2, or None if unreachable.

    Raises InvalidQueryError when the two configurations do not share the
    same conserved vector (then no path can exist by conservation).
    """
    basis = conserved_basis(phi)
    if conserved_vector(eta, basis) != conserved_vector(eta2, basis):
        raise InvalidQueryError("conserved vectors differ")
    if eta.states == eta2.states:
        return []
    graph = TransitionGraph(eta.locale, phi, budget)
    start, goal = eta.code, eta2.code
    parent = np.full(graph.n_configs, -1, dtype=np.int64)
    parent_edge = np.full(graph.n_configs, -1, dtype=np.int64)
    parent[start] = start
    frontier = np.array([start], dtype=np.int64)
    while frontier.size and parent[goal] == -1:
        nxt = []
        for ei, e in enumerate(graph.edges):
            succ = graph.succ[e][frontier]
            new = succ[parent[succ] == -1]
            parent[new] = frontier[parent[succ] == -1]
            parent_edge[new] = ei
            nxt.append(new)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.array([], dtype=np.int64)
    if parent[goal] == -1:
        return None
    path = []
    cur = goal
    while cur != start:
        path.append(graph.edges[parent_edge[cur]])
        cur = parent[cur]
    return list(reversed(path))


def is_class_measurable(f: FunctionTable, lam, phi: InteractionTable,
                        atol: float = 1e-12) -> bool:
    """True iff f is constant given the conserved sums on lam and the rest.

    Buckets every configuration of the joint window by the exact conserved
    vector over lam together with the restriction outside lam, and checks
    constancy of f within each bucket.
    """
    basis = conserved_basis(phi)
    window = tuple(sorted(set(f.window) | set(lam)))
    g = f.embed(window)
    m = g.m
    codes = np.arange(g.values.size, dtype=np.int64)
    cols = []
    for vec in basis.vectors:
        scale = lcm(*(fr.denominator for fr in vec)) if vec else 1
        ints = np.array([int(fr * scale) for fr in vec], dtype=np.int64)
        acc = np.zeros_like(codes)
        for v in lam:
            if v in g.window:
                acc += ints[(codes // g.place(v)) % m]
        cols.append(acc)
    for v in window:
        if v not in set(lam):
            cols.append((codes // g.place(v)) % m)
    key = np.stack(cols, axis=1) if cols else np.zeros((codes.size, 1), dtype=np.int64)
    _, inverse = np.unique(key, axis=0, return_inverse=True)
    hi = np.full(int(inverse.max()) + 1, -np.inf)
    lo = np.full(int(inverse.max()) + 1, np.inf)
    np.maximum.at(hi, inverse, g.values)
    np.minimum.at(lo, inverse, g.values)
    return bool((hi - lo).max(initial=0.0) <= atol)
