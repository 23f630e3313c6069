"""Shift-invariant forms on Z^d and the finite-window decomposition solver.

A shift-invariant form is stored through one representative table per
positive direction, at the edge from the origin to the unit vector; every
other edge value is a translate, and reverse edges follow from the
alternating rule.  The solver splits such a form, in the least-squares
sense over exact finite expectations, into the differential of a summed
local potential plus unique conserved-current components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.linalg

from .configspace import DEFAULT_BUDGET, TransitionGraph
from .errors import BudgetExceededError, IllConditionedError, InvalidQueryError
from .forms import Form, is_closed, solve_potential
from .interaction import ConsvBasis, InteractionTable
from .locales import LatticeBox, box
from .measure import (
    ExpansionPieces,
    SiteMeasure,
    conditional_expectation,
    expand_mu,
    expectation,
    mu_norm,
    nabla_edge,
    weight_array,
)
from .spectral import (
    boundary_estimate_constant,
    moving_particle_constant,
    project_off_kernel,
    uniform_gap_constant,
)
from .tables import FunctionTable, pair_code_map, pair_successor_codes

__all__ = [
    "ShiftInvariantForm",
    "CurrentBasisElement",
    "DecompositionResult",
    "PsiSequenceStep",
    "unit",
    "origin",
    "current_table",
    "current_form",
    "gamma_differential",
    "synthesize_form",
    "project_to_box",
    "is_closed_shift_invariant",
    "decompose",
    "delta_map",
    "psi_sequence",
    "locality_probe",
]


def origin(d: int) -> tuple:
    return (0,) * d


def unit(j: int, d: int) -> tuple:
    if not 0 <= j < d:
        raise ValueError("direction out of range")
    return tuple(1 if k == j else 0 for k in range(d))


@dataclass
class ShiftInvariantForm:
    """A translation-invariant form given by per-direction representatives.

    reps[j] is the table of the edge (0, 1_j); the value on any edge in
    the +j direction is the corresponding translate, and on reverse edges
    the negated value after the transition.  Representatives must vanish
    on configurations fixed by their edge transition.
    """

    d: int
    space: object
    phi: InteractionTable
    reps: dict  # j -> FunctionTable with lattice-tuple window
    closed: bool = False

    def __post_init__(self):
        for j in range(self.d):
            if j not in self.reps:
                self.reps[j] = FunctionTable.zeros(self.space, (origin(self.d), unit(j, self.d)))
        fwd = pair_code_map(self.phi)
        for j, tab in self.reps.items():
            o, t = origin(self.d), unit(j, self.d)
            ext = tab.embed(tuple(sorted(set(tab.window) | {o, t})))
            succ = pair_successor_codes(self.space, ext.window, o, t, fwd)
            fixed = succ == np.arange(succ.size)
            worst = np.abs(ext.values[fixed]).max(initial=0.0)
            if worst > 1e-9:
                raise ValueError(
                    f"direction {j} representative is nonzero on a fixed "
                    f"configuration (max {worst:.3e})")
            self.reps[j] = ext

    def edge_table(self, e) -> FunctionTable:
        """Value table of an arbitrary nearest-neighbor directed edge."""
        o, t = e
        diffs = [t[k] - o[k] for k in range(self.d)]
        j = next(k for k, v in enumerate(diffs) if v != 0)
        if diffs[j] == 1:
            return self.reps[j].translate(o)
        # reverse edge: negate the forward value after the transition
        base = self.reps[j].translate(t)
        ext = base.embed(tuple(sorted(set(base.window) | {o, t})))
        after = ext.precompose_pair(o, t, pair_code_map(self.phi))
        succ = pair_successor_codes(self.space, ext.window, o, t,
                                    pair_code_map(self.phi))
        vals = -after.values
        vals[succ == np.arange(succ.size)] = 0.0
        return FunctionTable(self.space, ext.window, vals)

    def representative_edges(self) -> list:
        out = []
        for j in range(self.d):
            o, t = origin(self.d), unit(j, self.d)
            out.append((o, t))
            out.append((t, o))
        return out

    def sp_norm(self, nu: SiteMeasure) -> float:
        """sup over the edge orbits of the edgewise norm."""
        return max(mu_norm(self.edge_table(e), nu) for e in self.representative_edges())

    def r_norm(self, nu: SiteMeasure) -> float:
        """Root-sum-square over one representative per edge orbit."""
        total = sum(mu_norm(self.edge_table(e), nu) ** 2
                    for e in self.representative_edges())
        return float(math.sqrt(total))

    def __add__(self, other: "ShiftInvariantForm") -> "ShiftInvariantForm":
        reps = {j: self.reps[j] + other.reps[j] for j in range(self.d)}
        return ShiftInvariantForm(self.d, self.space, self.phi, reps,
                                  closed=self.closed and other.closed)

    def scale(self, c: float) -> "ShiftInvariantForm":
        return ShiftInvariantForm(self.d, self.space, self.phi,
                                  {j: self.reps[j] * c for j in range(self.d)},
                                  closed=self.closed)


@dataclass(frozen=True)
class CurrentBasisElement:
    """The two-site flux of one conserved quantity across one direction."""

    i: int
    j: int
    table: FunctionTable


def current_table(xi, phi: InteractionTable, j: int, d: int) -> FunctionTable:
    """Flux of the conserved quantity across the representative edge.

    Value on eta is xi at the terminus after the transition minus before:
    exactly what the interaction transports across the bond.
    """
    m = phi.space.size
    o, t = origin(d), unit(j, d)
    vals = np.empty(m * m)
    xs = [float(x) for x in xi]
    for a in range(m):
        for b in range(m):
            _, b2 = phi.apply(a, b)
            vals[a * m + b] = xs[b2] - xs[b]
    # o precedes t lexicographically, so (o, t) is already the sorted window
    return FunctionTable(phi.space, (o, t), vals)


def current_form(xi, phi: InteractionTable, j: int, d: int) -> ShiftInvariantForm:
    """The conserved-current form: the flux table in direction j, zero on
    perpendicular directions; closed and shift-invariant by construction."""
    reps = {j: current_table(xi, phi, j, d)}
    return ShiftInvariantForm(d=d, space=phi.space, phi=phi, reps=reps, closed=True)


def _gamma_shifts(window, d: int, j: int) -> list:
    """Shifts x whose translated window meets the representative edge."""
    o, t = origin(d), unit(j, d)
    shifts = set()
    for w in window:
        shifts.add(tuple(o[k] - w[k] for k in range(d)))
        shifts.add(tuple(t[k] - w[k] for k in range(d)))
    return sorted(shifts)


def gamma_differential(f: FunctionTable, phi: InteractionTable, j: int,
                       d: int) -> FunctionTable:
    """Edge component of the differential of the summed translates of f.

    Only finitely many translates interact with the representative edge,
    so the sum is a local function on the union of their windows.
    """
    if not f.window:
        return FunctionTable.zeros(phi.space, (origin(d), unit(j, d)))
    e = (origin(d), unit(j, d))
    total = None
    for x in _gamma_shifts(f.window, d, j):
        term = nabla_edge(f.translate(x), phi, e)
        total = term if total is None else total + term
    return total


def synthesize_form(phi: InteractionTable, basis: ConsvBasis, d: int,
                    f0: FunctionTable | None = None,
                    a: np.ndarray | None = None) -> ShiftInvariantForm:
    """Build the closed invariant form with exact part f0 and current matrix a."""
    reps = {}
    for j in range(d):
        tab = FunctionTable.zeros(phi.space, (origin(d), unit(j, d)))
        if f0 is not None and f0.window:
            tab = tab + gamma_differential(f0, phi, j, d)
        if a is not None:
            for i in range(basis.dimension):
                coef = float(a[i][j])
                if coef != 0.0:
                    tab = tab + coef * current_table(basis.vectors[i], phi, j, d)
        reps[j] = tab
    return ShiftInvariantForm(d=d, space=phi.space, phi=phi, reps=reps, closed=True)


def project_to_box(omega: ShiftInvariantForm, box_locale, nu: SiteMeasure) -> Form:
    """Assemble the form on a box by translation, then project onto it.

    Every edge table is the representative translate conditioned onto the
    box window; requires the box to be able to contain each representative
    window around some interior edge.
    """
    verts = set(box_locale.vertices)
    window = tuple(sorted(verts))
    for j in range(omega.d):
        if not _box_translations(omega.reps[j].window, window, omega.d):
            raise InvalidQueryError(f"direction {j} window exceeds the box")
    tabs = {}
    for e in box_locale.directed_edges():
        tab = omega.edge_table(e)
        tabs[e] = conditional_expectation(tab, window, nu).embed(window)
    return Form(locale=box_locale, space=omega.space, tables=tabs)


def _box_translations(window, box_window, d: int) -> list:
    lo = [min(v[k] for v in box_window) for k in range(d)]
    hi = [max(v[k] for v in box_window) for k in range(d)]
    wlo = [min(v[k] for v in window) for k in range(d)]
    whi = [max(v[k] for v in window) for k in range(d)]
    ranges = [range(lo[k] - wlo[k], hi[k] - whi[k] + 1) for k in range(d)]
    return [tuple(x) for x in product(*ranges)]


def is_closed_shift_invariant(omega: ShiftInvariantForm, phi: InteractionTable,
                              nu: SiteMeasure, max_box: int = 2,
                              tol: float = 1e-9,
                              budget: int = DEFAULT_BUDGET) -> bool:
    """Closedness of every box projection up to the given box radius."""
    tested = 0
    for n in range(1, max_box + 1):
        loc = box(omega.d, n)
        if omega.space.size ** len(loc.vertices) > budget:
            break
        try:
            proj = project_to_box(omega, loc, nu)
        except InvalidQueryError:
            continue
        tested += 1
        if not is_closed(proj, phi, tol, budget):
            return False
    if tested == 0:
        raise BudgetExceededError(
            "no box up to max_box both fits the windows and meets the budget")
    return True


# -- the decomposition solver --------------------------------------------------


def anchored_windows(d: int, radius: int) -> list:
    """Translation-class representatives of windows of diameter <= radius.

    Each window contains the origin as its lexicographic minimum; the
    diameter is the graph (L1) distance.  One representative per
    translation class keeps the potential parametrization free of shift
    redundancy.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    o = origin(d)
    candidates = []
    for delta in product(range(-radius, radius + 1), repeat=d):
        p = tuple(delta)
        if p > o and sum(abs(c) for c in p) <= radius:
            candidates.append(p)
    candidates.sort()

    def dist(a, b):
        return sum(abs(x - y) for x, y in zip(a, b))

    windows = []

    def grow(chosen, rest):
        windows.append((o,) + tuple(chosen))
        for idx, p in enumerate(rest):
            if all(dist(p, q) <= radius for q in chosen):
                grow(chosen + [p], rest[idx + 1:])

    grow([], candidates)
    return sorted(windows, key=lambda w: (len(w), w))


def _exact_support_basis(space, window) -> list:
    """Indicator basis of the functions vanishing at the base state."""
    m = space.size
    base = space.base_state
    non_base = [s for s in range(m) if s != base]
    out = []
    for assign in product(non_base, repeat=len(window)):
        code = 0
        for s in assign:
            code = code * m + s
        vals = np.zeros(m ** len(window))
        vals[code] = 1.0
        out.append(FunctionTable(space, window, vals))
    return out


class _PieceVector:
    """A function in mu-expanded form: window -> flat value array."""

    __slots__ = ("pieces",)

    def __init__(self):
        self.pieces = {}

    def add_table(self, tab: FunctionTable, nu: SiteMeasure, coef: float = 1.0):
        for key, piece in expand_mu(tab, nu).pieces.items():
            vals = coef * piece.values
            if key in self.pieces:
                self.pieces[key] = self.pieces[key] + vals
            else:
                self.pieces[key] = vals

    def norm_sq(self, space, nu) -> float:
        total = 0.0
        for key, vals in self.pieces.items():
            w = weight_array(space, tuple(sorted(key)), nu)
            total += float((vals * vals) @ w)
        return total


def _design_columns(phi, nu, basis, d, radius):
    """Per-direction mu-piece columns for the potential and current terms."""
    space = phi.space
    windows = anchored_windows(d, radius)
    params = []
    for win in windows:
        params.extend(_exact_support_basis(space, win))
    n_params = len(params)
    c_phi = basis.dimension
    columns = {j: [] for j in range(d)}
    for j in range(d):
        e = (origin(d), unit(j, d))
        for b in params:
            col = _PieceVector()
            for x in _gamma_shifts(b.window, d, j):
                col.add_table(nabla_edge(b.translate(x), phi, e), nu)
            columns[j].append(col)
        for i in range(c_phi):
            col = _PieceVector()
            col.add_table(current_table(basis.vectors[i], phi, j, d), nu)
            columns[j].append(col)
    return params, n_params, columns


def _gram_blocks(columns_j, indices, space, nu, size):
    """Gram matrix and per-window stacks for one direction block."""
    by_window = {}
    for ci, col in zip(indices, columns_j):
        for key, vals in col.pieces.items():
            by_window.setdefault(key, []).append((ci, vals))
    G = np.zeros((size, size))
    stacks = {}
    for key, entries in by_window.items():
        idx = np.array([ci for ci, _ in entries])
        B = np.stack([vals for _, vals in entries])
        w = weight_array(space, tuple(sorted(key)), nu)
        G[np.ix_(idx, idx)] += (B * w) @ B.T
        stacks[key] = (idx, B, w)
    return G, stacks


@dataclass
class DecompositionResult:
    """Output of the decomposition: current coefficients, the exact-part
    potential (as anchored pieces and, when small enough, one table), and
    per-direction residual norms."""

    a: np.ndarray
    residuals: list
    f_pieces: list  # (window, FunctionTable) pairs with nonzero coefficients
    gauge_note: str
    rank: int
    n_params: int
    space: object = None
    _f_table: FunctionTable | None = field(default=None, repr=False)

    @property
    def f(self) -> FunctionTable:
        if self._f_table is None:
            raise BudgetExceededError(
                "the potential union window exceeds the materialization "
                "budget; use f_pieces")
        return self._f_table


def decompose(omega: ShiftInvariantForm, phi: InteractionTable,
              basis: ConsvBasis, radius: int, nu: SiteMeasure,
              rcond: float = 1e-10,
              budget: int = DEFAULT_BUDGET,
              _cache: dict | None = None) -> DecompositionResult:
    """Least-squares split of a closed invariant form into an exact part
    plus conserved currents.

    Minimizes, per positive direction, the exact squared norm of the
    representative minus the potential differential minus the current
    combination.  The potential ranges over all anchored exact-support
    pieces of diameter up to the radius; the minimum-norm coefficient
    vector fixes the gauge, and only the current matrix and residuals are
    gauge-independent outputs.  Near-null directions touching the current
    coefficients raise IllConditionedError.
    """
    d, space = omega.d, omega.space
    c_phi = basis.dimension
    cache_key = ("design", d, radius)
    if _cache is not None and cache_key in _cache:
        params, n_params, columns = _cache[cache_key]
    else:
        params, n_params, columns = _design_columns(phi, nu, basis, d, radius)
        if _cache is not None:
            _cache[cache_key] = (params, n_params, columns)

    size = n_params + c_phi * d

    def a_index(i, j):
        return n_params + i * d + j

    G = np.zeros((size, size))
    per_dir = []
    gram_key = ("gram", d, radius)
    if _cache is not None and gram_key in _cache:
        G, per_dir = _cache[gram_key]
    else:
        for j in range(d):
            indices = list(range(n_params)) + [a_index(i, j) for i in range(c_phi)]
            Gj, stacks = _gram_blocks(columns[j], indices, space, nu, size)
            G += Gj
            per_dir.append((Gj, stacks))
        if _cache is not None:
            _cache[gram_key] = (G, per_dir)

    rhs = np.zeros(size)
    targets = []
    for j in range(d):
        target = _PieceVector()
        target.add_table(omega.reps[j], nu)
        targets.append(target)
        _, stacks = per_dir[j]
        for key, (idx, B, w) in stacks.items():
            if key in target.pieces:
                rhs[idx] += (B * w) @ target.pieces[key]

    vals, vecs = scipy.linalg.eigh(G)
    top = float(vals[-1]) if size else 0.0
    keep = vals > rcond * max(top, 1.0)
    null_vecs = vecs[:, ~keep]
    if null_vecs.size:
        leak = np.abs(null_vecs[n_params:, :]).max(initial=0.0)
        if leak > 1e-8:
            raise IllConditionedError(
                "a near-null direction mixes the current coefficients; "
                f"max current component {leak:.3e}")
    V = vecs[:, keep]
    z = V @ ((V.T @ rhs) / vals[keep])

    residuals = []
    for j in range(d):
        # residual assembled piecewise to avoid cancellation between the
        # large quadratic-form terms
        _, stacks = per_dir[j]
        leftovers = dict(targets[j].pieces)
        r2 = 0.0
        for key, (idx, B, w) in stacks.items():
            r = leftovers.pop(key, np.zeros(B.shape[1])) - z[idx] @ B
            r2 += float((r * r) @ w)
        for key, vals in leftovers.items():
            w = weight_array(space, tuple(sorted(key)), nu)
            r2 += float((vals * vals) @ w)
        residuals.append(math.sqrt(max(r2, 0.0)))

    a = np.array([[z[a_index(i, j)] for j in range(d)] for i in range(c_phi)])

    f_pieces = []
    union = set()
    for coef, b in zip(z[:n_params], params):
        if abs(coef) > 1e-12:
            f_pieces.append((b.window, coef * b))
            union |= set(b.window)
    f_table = None
    if space.size ** len(union) <= budget:
        total = FunctionTable.zeros(space, tuple(sorted(union)))
        for _, tab in f_pieces:
            total = total + tab
        f_table = total - expectation(total, nu)

    return DecompositionResult(
        a=a,
        residuals=residuals,
        f_pieces=f_pieces,
        gauge_note=("minimum-norm over anchored exact-support piece "
                    "coefficients; flat potential directions resolved by "
                    "the pseudoinverse"),
        rank=int(keep.sum()),
        n_params=n_params,
        space=space,
        _f_table=f_table,
    )


def delta_map(f: FunctionTable, d: int) -> list:
    """Per direction, the difference between f and its unit translate."""
    out = []
    for j in range(d):
        out.append(f - f.translate(unit(j, d)))
    return out


@dataclass
class PsiSequenceStep:
    n: int
    lam_window: tuple
    sigma_window: tuple
    potential: FunctionTable       # kernel-orthogonal potential on the enlargement
    psi_summand: FunctionTable     # projection of the potential onto the core box
    psi_differential: ShiftInvariantForm
    omega_n: ShiftInvariantForm
    omega_dagger: ShiftInvariantForm
    identity_residual: float
    dagger_sup_norm: float
    bound_value: float
    bound_ok: bool
    constants: dict


def psi_sequence(omega: ShiftInvariantForm, phi: InteractionTable,
                 nu: SiteMeasure, n: int,
                 budget: int = DEFAULT_BUDGET,
                 c_sg: float | None = None) -> PsiSequenceStep:
    """One step of the averaged-potential construction in one dimension.

    Solves the potential of the form on the enlargement [-2n, 2n],
    projects it off the differential kernel, and splits the differential
    of the averaged core projection into the interior part and the
    boundary part; their sum reproduces the differential exactly, and the
    boundary part obeys the combined boundary/moving-particle/gap bound.
    """
    if omega.d != 1:
        raise InvalidQueryError("the averaged construction is implemented for d = 1")
    d = 1
    sigma_loc = box(1, 2 * n)
    if omega.space.size ** len(sigma_loc.vertices) > budget:
        raise BudgetExceededError("enlargement exceeds the configuration budget")
    lam_verts = tuple(sorted(LatticeBox(1, n).vertices()))
    sigma_verts = tuple(sorted(sigma_loc.vertices))

    proj = project_to_box(omega, sigma_loc, nu)
    pot = solve_potential(proj, phi)
    graph = TransitionGraph(sigma_loc, phi, budget)
    f_n = project_off_kernel(pot.table, graph, nu)
    g = conditional_expectation(f_n, lam_verts, nu)

    e1 = ((0,), (1,))
    weight = 1.0 / (2 * n + 1)

    def shifted_nabla(k):
        return nabla_edge(g, phi, ((k,), (k + 1,))).translate((-k,))

    interior = None
    for k in range(-n, n):
        term = shifted_nabla(k)
        interior = term if interior is None else interior + term
    interior = weight * interior
    dagger_rep = weight * (shifted_nabla(n) + shifted_nabla(-n - 1))

    psi_rep = None
    for z in range(-n, n + 2):
        term = nabla_edge(g.translate((z,)), phi, e1)
        psi_rep = term if psi_rep is None else psi_rep + term
    psi_rep = weight * psi_rep

    both = psi_rep - (interior + dagger_rep)
    identity_residual = both.max_abs()

    omega_n = ShiftInvariantForm(d, omega.space, phi, {0: interior})
    omega_dagger = ShiftInvariantForm(d, omega.space, phi, {0: dagger_rep})

    if c_sg is None:
        c_sg = uniform_gap_constant(phi, nu, len(sigma_verts))
    c_be = boundary_estimate_constant(phi, nu)
    c_mp = moving_particle_constant(phi, nu)
    c_full = c_be * c_mp * (1.0 / c_sg + 1.0)
    lam_size = 2 * n + 1
    sigma_size = 4 * n + 1
    diam_sigma = sigma_size - 1
    boundary_count = 2  # the two edges leaving [-n, n] in one dimension
    sup_sq = omega.sp_norm(nu) ** 2
    bound = (c_full * (boundary_count**2 / lam_size**2)
             * (sigma_size / (sigma_size - lam_size))
             * diam_sigma**2 * sup_sq)
    dagger_sup = omega_dagger.sp_norm(nu)

    return PsiSequenceStep(
        n=n,
        lam_window=lam_verts,
        sigma_window=sigma_verts,
        potential=f_n,
        psi_summand=g,
        psi_differential=ShiftInvariantForm(d, omega.space, phi, {0: psi_rep}),
        omega_n=omega_n,
        omega_dagger=omega_dagger,
        identity_residual=float(identity_residual),
        dagger_sup_norm=float(dagger_sup),
        bound_value=float(bound),
        bound_ok=dagger_sup**2 <= bound + 1e-12,
        constants={"C": c_full, "C_BE": c_be, "C_MP": c_mp, "C_SG": c_sg},
    )


def locality_probe(g: FunctionTable, lam, lam2, phi: InteractionTable,
                   atol: float = 1e-10) -> bool:
    """True iff no transition within the second region changes g.

    The two regions must be disjoint; g must live on their union.  This is
    the finite-window hypothesis under which a function is forced to be
    measurable on the first region alone.
    """
    lam, lam2 = set(lam), set(lam2)
    if lam & lam2:
        raise InvalidQueryError("regions must be disjoint")
    if not set(g.window) <= (lam | lam2):
        raise InvalidQueryError("probe function must live on the union window")
    d = len(next(iter(lam2)))
    for u in sorted(lam2):
        for j in range(d):
            v = tuple(u[k] + (1 if k == j else 0) for k in range(d))
            if v in lam2:
                if nabla_edge(g, phi, (u, v)).max_abs() > atol:
                    return False
                if nabla_edge(g, phi, (v, u)).max_abs() > atol:
                    return False
    return True
