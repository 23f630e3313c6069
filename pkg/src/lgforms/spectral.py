"""Spectral gaps and numerical verification of the toolkit's inequality
constants.

The gap of a finite locale is the smallest Rayleigh quotient of the
single-edge Dirichlet form over the orthogonal complement of the
differential kernel.  Transitions never leave a conserved class, so the
eigenproblem splits into one dense block per class; the unfactored dense
solve is kept in the tests as the brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .configspace import TransitionGraph, class_keys, irreducibly_quantified_check
from .errors import DegenerateDenominatorError
from .forms import boundary_differential, differential, sp_norm
from .interaction import InteractionTable, conserved_basis
from .locales import Locale, complete
from .measure import (
    SiteMeasure,
    Rate,
    c_phi_nu,
    conditional_expectation,
    mu_norm,
    nabla_edge,
    nabla_move,
    weight_array,
)
from .tables import FunctionTable

__all__ = [
    "SPECTRAL_BUDGET",
    "GapReport",
    "InequalityReport",
    "spectral_gap",
    "uniform_gap_scan",
    "estimate_ctilde",
    "moving_particle_constant",
    "boundary_estimate_constant",
    "verify_mpl",
    "verify_boundary_estimate",
    "verify_sigma_gap_bound",
    "verify_dagger_bound",
    "project_off_kernel",
]

SPECTRAL_BUDGET = 2**14


@dataclass
class GapReport:
    locale_name: str
    gap: float
    size: int
    normalized: float
    residual: float
    degenerate: bool = False
    minimizer: FunctionTable | None = None


@dataclass
class InequalityReport:
    name: str
    constants: dict = field(default_factory=dict)
    worst_ratio: float = 0.0
    trials: int = 0
    passed: bool = False

    def finalize(self, slack: float = 1e-9) -> "InequalityReport":
        self.passed = self.worst_ratio <= 1.0 + slack
        return self


def _ratio(lhs: float, rhs: float) -> float:
    if rhs <= 1e-300:
        return 0.0 if lhs <= 1e-20 else math.inf
    return lhs / rhs


def spectral_gap(locale: Locale, phi: InteractionTable, nu: SiteMeasure,
                 rate: Rate | None = None,
                 budget: int = SPECTRAL_BUDGET) -> GapReport:
    """Largest C with quotient-norm(f)^2 <= C^-1 * Dirichlet(f) on K0.

    Assembled per conserved class: the Dirichlet form and the kernel both
    split over classes, so the minimum Rayleigh quotient is the minimum of
    the per-class dense symmetric eigenproblems.  A trivial K0 (every
    configuration alone in its component-complement) reports +inf.
    """
    graph = TransitionGraph(locale, phi, budget)
    basis = conserved_basis(phi)
    keys = class_keys(graph, basis)
    comps = graph.components()
    window = tuple(sorted(locale.vertices))
    w = weight_array(phi.space, window, nu)
    rate_vals = {}
    for e in graph.edges:
        if rate is None:
            rate_vals[e] = None
        else:
            rate_vals[e] = rate.table(e).embed(window).values

    best = math.inf
    best_vec = None
    residual = 0.0
    codes = np.arange(graph.n_configs)
    for cls in range(int(keys.max()) + 1 if keys.size else 0):
        idx = np.nonzero(keys == cls)[0]
        roots = np.unique(comps[idx])
        k = idx.size
        if k - roots.size == 0:
            continue  # kernel fills the whole class block
        local = {int(c): i for i, c in enumerate(idx)}
        L = np.zeros((k, k))
        for e in graph.edges:
            succ = graph.succ[e][idx]
            moved = succ != idx
            if not moved.any():
                continue
            li = np.arange(k)[moved]
            ls = np.array([local[int(c)] for c in succ[moved]])
            wt = w[idx[moved]]
            if rate_vals[e] is not None:
                wt = wt * rate_vals[e][idx[moved]]
            np.add.at(L, (li, li), wt)
            np.add.at(L, (ls, ls), wt)
            np.add.at(L, (li, ls), -wt)
            np.add.at(L, (ls, li), -wt)
        mu_local = w[idx]
        scale = 1.0 / np.sqrt(mu_local)
        A = L * scale[:, None] * scale[None, :]
        A = 0.5 * (A + A.T)
        cons = np.zeros((roots.size, k))
        for ri, r in enumerate(roots):
            cons[ri] = np.where(comps[idx] == r, np.sqrt(mu_local), 0.0)
        Q = scipy.linalg.null_space(cons)
        B = Q.T @ A @ Q
        B = 0.5 * (B + B.T)
        vals, vecs = scipy.linalg.eigh(B)
        lam = float(vals[0])
        if lam < best:
            best = lam
            v = vecs[:, 0]
            residual = float(np.linalg.norm(B @ v - lam * v))
            full = np.zeros(graph.n_configs)
            full[idx] = scale * (Q @ v)
            best_vec = FunctionTable(phi.space, window, full)

    degenerate = best_vec is None
    gap = math.inf if degenerate else best
    size = len(locale.vertices)
    return GapReport(
        locale_name=locale.name or "locale",
        gap=gap,
        size=size,
        normalized=gap / size if not degenerate else math.inf,
        residual=residual,
        degenerate=degenerate,
        minimizer=best_vec,
    )


def uniform_gap_scan(phi: InteractionTable, nu: SiteMeasure, n_list,
                     budget: int = SPECTRAL_BUDGET) -> list:
    """Normalized gaps on complete locales, with a running minimum.

    Rows where some conserved class is disconnected are flagged
    not_irreducibly_quantified and excluded from the minimum; the scan is
    numerical evidence over the tested sizes only.
    """
    rows = []
    running = math.inf
    for n in n_list:
        loc = complete(n)
        check = irreducibly_quantified_check(phi, loc, budget)
        if not check.ok:
            rows.append({"n": n, "status": "not_irreducibly_quantified",
                         "gap": None, "normalized": None, "running_min": running})
            continue
        rep = spectral_gap(loc, phi, nu, budget=budget)
        if not rep.degenerate:
            running = min(running, rep.normalized)
        rows.append({"n": n, "status": "ok" if not rep.degenerate else "degenerate",
                     "gap": rep.gap, "normalized": rep.normalized,
                     "running_min": running})
    return rows


def _move_quadratic(phi: InteractionTable, nu: SiteMeasure, exchange: bool) -> np.ndarray:
    """Matrix of f -> E[(f(eta') - f(eta))^2] on the two-site window."""
    m = phi.space.size
    n = m * m
    w = nu.weights
    L = np.zeros((n, n))
    for i1 in range(m):
        for i2 in range(m):
            j1, j2 = (i2, i1) if exchange else phi.apply(i1, i2)
            src = i1 * m + i2
            dst = j1 * m + j2
            if src == dst:
                continue
            wt = w[i1] * w[i2]
            L[src, src] += wt
            L[dst, dst] += wt
            L[src, dst] -= wt
            L[dst, src] -= wt
    return L


def estimate_ctilde(phi: InteractionTable, nu: SiteMeasure,
                    tol: float = 1e-12) -> float:
    """Worst exchange-to-move Dirichlet ratio on the two-site locale.

    Solved as a generalized eigenproblem on the range of the move form; a
    function annihilated by the move form but not by the exchange form
    witnesses a quantification failure and raises.
    """
    A = _move_quadratic(phi, nu, exchange=True)
    B = _move_quadratic(phi, nu, exchange=False)
    vals, vecs = scipy.linalg.eigh(B)
    top = float(vals[-1])
    if top <= tol:
        if float(np.abs(A).max()) <= tol:
            return 0.0
        raise DegenerateDenominatorError(
            "move form vanishes identically but the exchange form does not")
    mask = vals > tol * top
    null = vecs[:, ~mask]
    if null.size:
        leak = float(np.abs(null.T @ A @ null).max())
        if leak > tol * max(1.0, float(np.abs(A).max())):
            raise DegenerateDenominatorError(
                "exchange form does not vanish on the kernel of the move form")
    V = vecs[:, mask]
    gen = scipy.linalg.eigh(V.T @ A @ V, V.T @ B @ V, eigvals_only=True)
    return float(max(gen[-1], 0.0))


def moving_particle_constant(phi: InteractionTable, nu: SiteMeasure) -> float:
    """6 * max(1, exchange-to-move ratio)."""
    return 6.0 * max(1.0, estimate_ctilde(phi, nu))


def boundary_estimate_constant(phi: InteractionTable, nu: SiteMeasure) -> float:
    """3 * (C_phi_nu |S|^2 + |S|)."""
    m = phi.space.size
    return 3.0 * (c_phi_nu(phi, nu) * m * m + m)


def _centered_random(space, window, nu, rng) -> FunctionTable:
    f = FunctionTable.random(space, window, rng)
    w = weight_array(space, window, nu)
    return FunctionTable(space, window, f.values - float(f.values @ w))


def project_off_kernel(f: FunctionTable, graph: TransitionGraph,
                       nu: SiteMeasure) -> FunctionTable:
    """Orthogonal projection onto the complement of the differential kernel.

    Subtracts the measure-weighted mean over each transition component.
    """
    window = tuple(sorted(graph.locale.vertices))
    g = f.embed(window)
    comps = graph.components()
    _, ids = np.unique(comps, return_inverse=True)
    w = weight_array(f.space, window, nu)
    sums = np.bincount(ids, weights=w * g.values)
    mass = np.bincount(ids, weights=w)
    return FunctionTable(f.space, window, g.values - (sums / mass)[ids])


def verify_mpl(locale: Locale, phi: InteractionTable, nu: SiteMeasure,
               trials: int = 100, seed: int = 0) -> InequalityReport:
    """Long-range move energy against the worst single-edge differential.

    For every vertex pair the squared move norm must be bounded by the
    moving-particle constant times diameter^2 times the sup edge norm.
    """
    rng = np.random.default_rng(seed)
    cmp_const = moving_particle_constant(phi, nu)
    diam = locale.diameter()
    window = tuple(sorted(locale.vertices))
    worst = 0.0
    for _ in range(trials):
        f = _centered_random(phi.space, window, nu, rng)
        sp2 = max(
            mu_norm(nabla_edge(f, phi, e), nu) ** 2 for e in locale.directed_edges()
        )
        rhs = cmp_const * diam * diam * sp2
        for x in locale.vertices:
            for y in locale.vertices:
                lhs = mu_norm(nabla_move(f, phi, x, y), nu) ** 2
                worst = max(worst, _ratio(lhs, rhs))
    return InequalityReport(
        name="moving_particle",
        constants={"C_MP": cmp_const, "diam": diam},
        worst_ratio=worst,
        trials=trials,
    ).finalize()


def verify_boundary_estimate(lam, sigma: Locale, phi: InteractionTable,
                             nu: SiteMeasure, trials: int = 100,
                             seed: int = 0) -> InequalityReport:
    """Edge differentials of a projection against bulk move energies.

    Checks both orientations of every edge crossing the boundary of lam
    inside the ambient locale.
    """
    rng = np.random.default_rng(seed)
    lam = set(lam)
    cbe = boundary_estimate_constant(phi, nu)
    outside = [v for v in sigma.vertices if v not in lam]
    cross = [e for e in sigma.directed_edges() if e[0] in lam and e[1] not in lam]
    if not cross:
        raise ValueError("lam has no boundary edge inside the ambient locale")
    window = tuple(sorted(sigma.vertices))
    worst = 0.0
    for _ in range(trials):
        h = _centered_random(phi.space, window, nu, rng)
        g = conditional_expectation(h, tuple(sorted(lam)), nu)
        h2 = mu_norm(h, nu) ** 2
        for e in cross:
            o, t = e
            lhs = mu_norm(nabla_edge(g, phi, e), nu) ** 2
            rhs = (cbe / len(outside)) * (
                h2 + sum(mu_norm(nabla_move(h, phi, o, y), nu) ** 2 for y in outside)
            )
            worst = max(worst, _ratio(lhs, rhs))
            lhs_bar = mu_norm(nabla_edge(g, phi, (t, o)), nu) ** 2
            rhs_bar = (cbe / len(outside)) * (
                h2 + sum(mu_norm(nabla_move(h, phi, x, t), nu) ** 2 for x in outside)
            )
            worst = max(worst, _ratio(lhs_bar, rhs_bar))
    return InequalityReport(
        name="boundary_estimate",
        constants={"C_BE": cbe},
        worst_ratio=worst,
        trials=trials,
    ).finalize()


def uniform_gap_constant(phi: InteractionTable, nu: SiteMeasure, max_size: int,
                         budget: int = SPECTRAL_BUDGET) -> float:
    """Running minimum of normalized complete-locale gaps up to max_size."""
    rows = uniform_gap_scan(phi, nu, range(2, max_size + 1), budget)
    mins = [r["running_min"] for r in rows if r["running_min"] is not None]
    c_sg = mins[-1] if mins else math.inf
    if not math.isfinite(c_sg):
        raise ValueError("no finite normalized gap over the scanned sizes")
    return float(c_sg)


def verify_sigma_gap_bound(sigma: Locale, phi: InteractionTable, nu: SiteMeasure,
                           trials: int = 100, seed: int = 0,
                           c_sg: float | None = None,
                           budget: int = SPECTRAL_BUDGET) -> InequalityReport:
    """Quotient norm against size * diameter^2 * sup edge differential."""
    rng = np.random.default_rng(seed)
    if c_sg is None:
        c_sg = uniform_gap_constant(phi, nu, len(sigma.vertices), budget)
    cmp_const = moving_particle_constant(phi, nu)
    graph = TransitionGraph(sigma, phi)
    diam = sigma.diameter()
    size = len(sigma.vertices)
    window = tuple(sorted(sigma.vertices))
    worst = 0.0
    for _ in range(trials):
        h = _centered_random(phi.space, window, nu, rng)
        lhs = mu_norm(project_off_kernel(h, graph, nu), nu) ** 2
        sp2 = max(
            mu_norm(nabla_edge(h, phi, e), nu) ** 2 for e in sigma.directed_edges()
        )
        rhs = (1.0 / c_sg) * cmp_const * size * diam * diam * sp2
        worst = max(worst, _ratio(lhs, rhs))
    return InequalityReport(
        name="sigma_gap_bound",
        constants={"C_SG": c_sg, "C_MP": cmp_const},
        worst_ratio=worst,
        trials=trials,
    ).finalize()


def verify_dagger_bound(lam, sigma: Locale, phi: InteractionTable,
                        nu: SiteMeasure, trials: int = 100, seed: int = 0,
                        c_sg: float | None = None,
                        budget: int = SPECTRAL_BUDGET) -> InequalityReport:
    """Boundary differential of kernel-orthogonal functions.

    sup-norm of the boundary differential against
    C * (|Sigma| / |Sigma - lam|) * diam^2 * sup-norm of the ambient
    differential, with C combining the boundary, moving-particle and gap
    constants.
    """
    rng = np.random.default_rng(seed)
    lam = set(lam)
    if c_sg is None:
        c_sg = uniform_gap_constant(phi, nu, len(sigma.vertices), budget)
    cbe = boundary_estimate_constant(phi, nu)
    cmp_const = moving_particle_constant(phi, nu)
    c_full = cbe * cmp_const * (1.0 / c_sg + 1.0)
    graph = TransitionGraph(sigma, phi)
    diam = sigma.diameter()
    size = len(sigma.vertices)
    n_out = len([v for v in sigma.vertices if v not in lam])
    if n_out == 0:
        raise ValueError("lam must be a proper subset of the ambient locale")
    window = tuple(sorted(sigma.vertices))
    worst = 0.0
    for _ in range(trials):
        h0 = _centered_random(phi.space, window, nu, rng)
        h = project_off_kernel(h0, graph, nu)
        dagger = boundary_differential(h, lam, phi, sigma, nu)
        lhs = sp_norm(dagger, nu) ** 2
        sp2 = sp_norm(differential(h, phi, sigma), nu) ** 2
        rhs = c_full * (size / n_out) * diam * diam * sp2
        worst = max(worst, _ratio(lhs, rhs))
    return InequalityReport(
        name="dagger_bound",
        constants={"C": c_full, "C_BE": cbe, "C_MP": cmp_const, "C_SG": c_sg},
        worst_ratio=worst,
        trials=trials,
    ).finalize()
