"""Alternating forms on configuration transition graphs.

A form assigns a value to every transition (eta, eta^e); it is stored as
one dense table per directed edge, embedded on the full vertex window of
the locale.  Closedness is decided by assigning a potential along a
spanning tree of each transition component and checking every remaining
arc; the literal cycle-integral definition is kept as a small-scale
oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .configspace import DEFAULT_BUDGET, TransitionGraph, config_vertices
from .errors import NotClosedError
from .interaction import InteractionTable
from .locales import Locale
from .measure import (
    SiteMeasure,
    Rate,
    conditional_expectation,
    mu_norm,
    nabla_edge,
    weight_array,
    weighted_norm,
)
from .tables import FunctionTable

__all__ = [
    "Form",
    "Potential",
    "differential",
    "is_closed",
    "solve_potential",
    "project_form",
    "boundary_differential",
    "sp_norm",
    "r_norm",
    "kernel_dimension",
    "cycle_integrals_vanish",
]


@dataclass
class Form:
    """An edge-indexed family of transition value tables over one locale."""

    locale: Locale
    space: object
    tables: dict  # directed edge -> FunctionTable on the full vertex window

    def __post_init__(self):
        window = config_vertices(self.locale)
        fixed = {}
        for e in self.locale.directed_edges():
            tab = self.tables.get(e)
            if tab is None:
                tab = FunctionTable.zeros(self.space, window)
            fixed[e] = tab.embed(window)
        self.tables = fixed

    def edge_values(self, e) -> np.ndarray:
        return self.tables[e].values

    def validate(self, phi: InteractionTable, atol: float = 1e-9) -> list:
        """Alternating-axiom violations: zero on fixed configurations,
        antisymmetry across opposite edges, and agreement on coinciding
        transitions."""
        graph = TransitionGraph(self.locale, phi)
        bad = []
        for e in self.locale.directed_edges():
            vals = self.edge_values(e)
            succ = graph.succ[e]
            fixed = succ == np.arange(vals.size)
            if np.abs(vals[fixed]).max(initial=0.0) > atol:
                bad.append(("nonzero_on_fixed", e))
            rev = self.edge_values((e[1], e[0]))
            moved = ~fixed
            if np.abs(vals[moved] + rev[succ[moved]]).max(initial=0.0) > atol:
                bad.append(("antisymmetry", e))
        edges = self.locale.directed_edges()
        for i, e in enumerate(edges):
            for e2 in edges[i + 1:]:
                same = graph.succ[e] == graph.succ[e2]
                if same.any():
                    diff = self.edge_values(e)[same] - self.edge_values(e2)[same]
                    if np.abs(diff).max(initial=0.0) > atol:
                        bad.append(("coinciding_transition", e, e2))
        return bad


@dataclass
class Potential:
    """A function with prescribed differential, gauge-fixed per component."""

    table: FunctionTable
    anchors: tuple  # least configuration code of each transition component


def differential(f: FunctionTable, phi: InteractionTable, locale: Locale) -> Form:
    """The form (nabla_e f)_e over all directed edges of the locale."""
    window = config_vertices(locale)
    tabs = {}
    for e in locale.directed_edges():
        tabs[e] = nabla_edge(f.embed(window), phi, e)
    return Form(locale=locale, space=f.space, tables=tabs)


def _tree_potential(form: Form, phi: InteractionTable, budget: int):
    graph = TransitionGraph(form.locale, phi, budget)
    n = graph.n_configs
    comps = graph.components()
    pot = np.zeros(n)
    visited = np.zeros(n, dtype=bool)
    roots = np.unique(comps)
    visited[roots] = True
    frontier = roots
    while frontier.size:
        nxt = []
        for e in graph.edges:
            succ = graph.succ[e][frontier]
            fresh = ~visited[succ]
            new = succ[fresh]
            pot[new] = pot[frontier[fresh]] + form.edge_values(e)[frontier[fresh]]
            visited[new] = True
            nxt.append(new)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.array([], dtype=np.int64)
    return graph, pot, roots


def _consistency_residual(form: Form, graph: TransitionGraph, pot: np.ndarray) -> float:
    worst = 0.0
    codes = np.arange(graph.n_configs)
    for e in graph.edges:
        succ = graph.succ[e]
        vals = form.edge_values(e)
        moved = succ != codes
        if moved.any():
            res = np.abs(pot[succ[moved]] - pot[moved] - vals[moved]).max()
            worst = max(worst, float(res))
        if (~moved).any():
            worst = max(worst, float(np.abs(vals[~moved]).max(initial=0.0)))
    return worst


def is_closed(form: Form, phi: InteractionTable, tol: float = 1e-9,
              budget: int = DEFAULT_BUDGET) -> bool:
    """Spanning-tree closedness: every non-tree arc must agree with the
    tree potential; equivalent to all cycle integrals vanishing."""
    graph, pot, _ = _tree_potential(form, phi, budget)
    return _consistency_residual(form, graph, pot) <= tol


def solve_potential(form: Form, phi: InteractionTable, tol: float = 1e-9,
                    budget: int = DEFAULT_BUDGET) -> Potential:
    """Recover f with differential equal to the form.

    The potential is fixed to 0 at the least configuration code of each
    transition component, making the output deterministic; a consistency
    failure beyond the tolerance raises NotClosedError.
    """
    graph, pot, roots = _tree_potential(form, phi, budget)
    worst = _consistency_residual(form, graph, pot)
    if worst > tol:
        raise NotClosedError(f"consistency residual {worst:.3e} exceeds {tol:.1e}")
    table = FunctionTable(form.space, config_vertices(form.locale), pot)
    return Potential(table=table, anchors=tuple(int(r) for r in roots))


def project_form(form: Form, sub: Locale, nu: SiteMeasure) -> Form:
    """Conditional expectation of every edge table onto a sub-locale.

    For the product measure this maps forms to forms and commutes with
    the differential on the sub-locale's edges.
    """
    if not set(sub.vertices) <= set(form.locale.vertices):
        raise ValueError("projection target must be a sub-locale")
    window = config_vertices(sub)
    tabs = {}
    for e in sub.directed_edges():
        if e not in form.tables:
            raise ValueError(f"edge {e} missing from the source form")
        tabs[e] = conditional_expectation(form.tables[e], window, nu).embed(window)
    return Form(locale=sub, space=form.space, tables=tabs)


def boundary_differential(f: FunctionTable, lam, phi: InteractionTable,
                          sigma: Locale, nu: SiteMeasure) -> Form:
    """The discrepancy between differentiating and projecting.

    Projects f onto lam, then subtracts the within-lam differential from
    the ambient one; the result is supported on edges crossing the
    boundary of lam in either orientation.
    """
    lam = set(lam)
    if not lam <= set(sigma.vertices):
        raise ValueError("lam must be contained in the ambient locale")
    g = conditional_expectation(f, tuple(sorted(lam)), nu)
    window = config_vertices(sigma)
    tabs = {}
    for e in sigma.directed_edges():
        if e[0] in lam and e[1] in lam:
            continue  # ambient and restricted differentials agree here
        tabs[e] = nabla_edge(g.embed(window), phi, e)
    return Form(locale=sigma, space=f.space, tables=tabs)


def sp_norm(form: Form, nu: SiteMeasure, rate: Rate | None = None) -> float:
    """sup over edges of the edgewise (weighted) L2 norm."""
    worst = 0.0
    for e in form.locale.directed_edges():
        if rate is None:
            worst = max(worst, mu_norm(form.tables[e], nu))
        else:
            worst = max(worst, weighted_norm(form.tables[e], rate, e, nu))
    return worst


def r_norm(form: Form, nu: SiteMeasure, rate: Rate | None = None,
           edges=None) -> float:
    """Root-sum-square of edgewise norms over the given edges (default all)."""
    edges = form.locale.directed_edges() if edges is None else list(edges)
    total = 0.0
    for e in edges:
        if rate is None:
            total += mu_norm(form.tables[e], nu) ** 2
        else:
            total += weighted_norm(form.tables[e], rate, e, nu) ** 2
    return float(np.sqrt(total))


def kernel_dimension(phi: InteractionTable, locale: Locale,
                     budget: int = DEFAULT_BUDGET) -> int:
    """dim Ker of the differential: one per transition component."""
    graph = TransitionGraph(locale, phi, budget)
    return int(np.unique(graph.components()).size)


def cycle_integrals_vanish(form: Form, phi: InteractionTable, tol: float = 1e-9,
                           budget: int = DEFAULT_BUDGET) -> bool:
    """Literal integration over a fundamental cycle basis.

    Builds a breadth-first tree per component, then for every remaining
    arc walks the explicit closed path tree-down, across, tree-up and sums
    the stored transition values along it.  Exponentially many cycles are
    spanned by these, so this is the small-scale oracle for closedness.
    """
    graph = TransitionGraph(form.locale, phi, budget)
    n = graph.n_configs
    comps = graph.components()
    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = {}
    roots = np.unique(comps)
    order = []
    visited = np.zeros(n, dtype=bool)
    visited[roots] = True
    frontier = list(roots)
    tree_arcs = set()
    while frontier:
        nxt = []
        for cur in frontier:
            for e in graph.edges:
                succ = int(graph.succ[e][cur])
                if succ != cur and not visited[succ]:
                    visited[succ] = True
                    parent[succ] = cur
                    parent_edge[succ] = e
                    tree_arcs.add((cur, succ))
                    nxt.append(succ)
        order.extend(nxt)
        frontier = nxt

    def path_to_root(code):
        arcs = []
        while parent[code] != -1 and parent[code] != code:
            e = parent_edge[code]
            prev = int(parent[code])
            arcs.append((prev, e))  # arc prev -> code via e
            code = prev
        return arcs

    def arc_value(cfg, e):
        return float(form.edge_values(e)[cfg])

    codes = np.arange(n)
    for e in graph.edges:
        succ = graph.succ[e]
        moved = np.nonzero(succ != codes)[0]
        for cfg in moved:
            nxt = int(succ[cfg])
            if (int(cfg), nxt) in tree_arcs:
                continue
            # closed path: root -> cfg, cfg -> nxt, nxt -> root
            total = 0.0
            down = list(reversed(path_to_root(int(cfg))))
            for (src, te) in down:
                total += arc_value(src, te)
            total += arc_value(int(cfg), e)
            for (src, te) in path_to_root(nxt):
                # traverse the tree arc backwards via the opposite edge
                dst = int(graph.succ[te][src])
                total += arc_value(dst, (te[1], te[0]))
            if abs(total) > tol:
                return False
    return True
