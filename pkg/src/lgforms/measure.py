"""Product measures, conditional expectations, exact-support expansions,
renormalization, norms, rates and the associated bound constants.

Every expectation here is an exact weighted sum over the dependency window
of the integrand; the product structure of the measure makes locality
exact, so tolerances in callers reflect float roundoff only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import InvalidQueryError
from .interaction import InteractionTable, StateSpace
from .tables import FunctionTable, pair_code_map

__all__ = [
    "SiteMeasure",
    "uniform_measure",
    "geometric_measure",
    "load_measure",
    "weight_array",
    "expectation",
    "mu_dot",
    "mu_norm",
    "conditional_expectation",
    "ExpansionPieces",
    "expand_mu",
    "expand_base",
    "renormalize",
    "renormalize_inverse",
    "c_phi_nu",
    "Rate",
    "trivial_rate",
    "canonical_rate",
    "is_reversible",
    "rate_bounds",
    "weighted_norm",
    "nabla_edge",
    "nabla_move",
    "nabla_exchange",
]


@dataclass(frozen=True)
class SiteMeasure:
    """A strictly positive probability measure on the state set."""

    space: StateSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != self.space.size:
            raise ValueError("one weight per state required")
        if (w <= 0).any():
            raise ValueError("site measure must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("site weights must sum to 1")
        object.__setattr__(self, "weights", w)


def uniform_measure(space: StateSpace) -> SiteMeasure:
    m = space.size
    return SiteMeasure(space, np.full(m, 1.0 / m))


def geometric_measure(space: StateSpace, rho: float) -> SiteMeasure:
    """Weights proportional to rho^k over the state list order.

    rho = 1 gives the uniform measure.  The normalizer is the finite
    geometric sum over the actual state set.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    w = rho ** np.arange(space.size, dtype=float)
    return SiteMeasure(space, w / w.sum())


def load_measure(spec, space: StateSpace) -> SiteMeasure:
    """Parse 'uniform', 'geometric:RHO' or {'weights': [...]}."""
    if isinstance(spec, dict):
        return SiteMeasure(space, np.asarray(spec["weights"], dtype=float))
    if spec == "uniform":
        return uniform_measure(space)
    if isinstance(spec, str) and spec.startswith("geometric:"):
        return geometric_measure(space, float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown measure spec {spec!r}")


def weight_array(space: StateSpace, window, nu: SiteMeasure) -> np.ndarray:
    """Product weights over a window, flattened in table code order."""
    if not window:
        return np.array([1.0])
    return reduce(np.multiply.outer, [nu.weights] * len(window)).reshape(-1)


def expectation(f: FunctionTable, nu: SiteMeasure) -> float:
    return float(f.values @ weight_array(f.space, f.window, nu))


def conditional_expectation(f: FunctionTable, lam, nu: SiteMeasure) -> FunctionTable:
    """Average out the coordinates of f outside lam.

    The result is returned on the tight window (intersection of lam with
    the stored window); as a function on S^lam it is the conditional
    expectation for the product measure.
    """
    removed = [v for v in f.window if v not in set(lam)]
    return f.sum_out(removed, nu.weights)


def mu_dot(f: FunctionTable, g: FunctionTable, nu: SiteMeasure) -> float:
    """<f, g> under the product measure.

    Coordinates outside the common window are independent, so both factors
    reduce to their conditional expectations on the window intersection.
    """
    common = tuple(v for v in f.window if v in set(g.window))
    fa = conditional_expectation(f, common, nu).embed(common)
    ga = conditional_expectation(g, common, nu).embed(common)
    return float((fa.values * ga.values) @ weight_array(f.space, common, nu))


def mu_norm(f: FunctionTable, nu: SiteMeasure) -> float:
    w = weight_array(f.space, f.window, nu)
    return float(np.sqrt((f.values * f.values) @ w))


# -- differentials on tables --------------------------------------------------


def nabla_edge(f: FunctionTable, phi: InteractionTable, e) -> FunctionTable:
    """f(eta^e) - f(eta) for a directed edge e = (o, t)."""
    o, t = e
    moved = f.embed(tuple(sorted(set(f.window) | {o, t})))
    return moved.precompose_pair(o, t, pair_code_map(phi)) - moved


def nabla_move(f: FunctionTable, phi: InteractionTable, x, y) -> FunctionTable:
    """f(eta^{x->y}) - f(eta); x = y gives the zero table."""
    if x == y:
        return FunctionTable.zeros(f.space, f.window)
    return nabla_edge(f, phi, (x, y))


def nabla_exchange(f: FunctionTable, x, y) -> FunctionTable:
    """f(eta^{x,y}) - f(eta) for the unconditional swap."""
    if x == y:
        return FunctionTable.zeros(f.space, f.window)
    from .tables import exchange_code_map

    moved = f.embed(tuple(sorted(set(f.window) | {x, y})))
    return moved.precompose_pair(x, y, exchange_code_map(f.space)) - moved


# -- exact-support expansions --------------------------------------------------


@dataclass
class ExpansionPieces:
    """A function decomposed into pieces with exact finite supports.

    flavor 'mu': pieces annihilated by projections onto windows not
    containing their support.  flavor 'base': pieces vanishing whenever a
    coordinate of their support sits at the base state.
    """

    space: StateSpace
    flavor: str
    pieces: dict = field(default_factory=dict)  # frozenset -> FunctionTable

    def piece(self, window) -> FunctionTable:
        key = frozenset(window)
        if key in self.pieces:
            return self.pieces[key]
        return FunctionTable.zeros(self.space, tuple(window))

    def windows(self) -> list:
        return sorted(self.pieces, key=lambda s: (len(s), sorted(s)))

    def reconstruct(self, window=None) -> FunctionTable:
        """Sum of all pieces, embedded on the union window."""
        if window is None:
            window = sorted(set().union(*self.pieces) if self.pieces else set())
        total = FunctionTable.zeros(self.space, tuple(window))
        for tab in self.pieces.values():
            total = total + tab
        return total


def _split_expand(f: FunctionTable, verts, keep, out, annihilate):
    """Recursive one-coordinate splitting f = (annihilated part) + (rest).

    Splitting per vertex factorizes the expansion: the piece supported on
    a window is obtained by annihilating every vertex outside it and
    keeping the complementary part inside it, which costs a small constant
    factor over the table size instead of a full subset double sum.
    """
    if not verts:
        key = frozenset(keep)
        out[key] = out[key] + f if key in out else f
        return
    v, rest = verts[0], verts[1:]
    low = annihilate(f, v)
    _split_expand(low, rest, keep, out, annihilate)
    _split_expand(f - low.embed(f.window), rest, keep + (v,), out, annihilate)


def expand_mu(f: FunctionTable, nu: SiteMeasure) -> ExpansionPieces:
    """Unique expansion into conditional-expectation-exact pieces.

    The empty piece is the mean and each nonempty piece is annihilated by
    projection onto any window not containing it; the sum over all pieces
    reconstructs every conditional restriction of f.
    """
    out: dict = {}
    _split_expand(f, f.window, (), out,
                  lambda g, v: g.sum_out((v,), nu.weights))
    out = {k: v for k, v in out.items() if v.max_abs() > 0.0 or not k}
    if frozenset() not in out:
        out[frozenset()] = FunctionTable.constant(f.space, 0.0)
    return ExpansionPieces(space=f.space, flavor="mu", pieces=out)


def expand_base(f: FunctionTable, base_state: int | None = None) -> ExpansionPieces:
    """Unique expansion into pieces that vanish at the base state.

    The empty piece is the value on the all-base configuration; every
    other piece vanishes whenever a coordinate of its window sits at the
    base state.
    """
    base = f.space.base_state if base_state is None else base_state
    out: dict = {}
    _split_expand(f, f.window, (), out,
                  lambda g, v: g.plug({v: base}))
    out = {k: v for k, v in out.items() if v.max_abs() > 0.0 or not k}
    if frozenset() not in out:
        out[frozenset()] = FunctionTable.constant(f.space, 0.0)
    return ExpansionPieces(space=f.space, flavor="base", pieces=out)


def _require_normalized(pieces: ExpansionPieces):
    empty = pieces.piece(())
    if empty.max_abs() > 1e-12:
        raise InvalidQueryError("expansion must be normalized (empty piece zero)")


def renormalize(pieces: ExpansionPieces, nu: SiteMeasure) -> ExpansionPieces:
    """Regroup a normalized base-flavor expansion into the mu flavor.

    Each base piece is re-expanded against the measure and the nonempty
    sub-pieces are accumulated per window.
    """
    if pieces.flavor != "base":
        raise InvalidQueryError("renormalize expects a base-flavor expansion")
    _require_normalized(pieces)
    out: dict = {}
    for tab in pieces.pieces.values():
        for key, sub in expand_mu(tab, nu).pieces.items():
            if not key:
                continue
            out[key] = out[key] + sub if key in out else sub
    out = {k: v for k, v in out.items() if v.max_abs() > 0.0}
    return ExpansionPieces(space=pieces.space, flavor="mu", pieces=out)


def renormalize_inverse(pieces: ExpansionPieces, base_state: int | None = None) -> ExpansionPieces:
    """Regroup a normalized mu-flavor expansion into the base flavor."""
    if pieces.flavor != "mu":
        raise InvalidQueryError("renormalize_inverse expects a mu-flavor expansion")
    _require_normalized(pieces)
    out: dict = {}
    for tab in pieces.pieces.values():
        for key, sub in expand_base(tab, base_state).pieces.items():
            if not key:
                continue
            out[key] = out[key] + sub if key in out else sub
    out = {k: v for k, v in out.items() if v.max_abs() > 0.0}
    return ExpansionPieces(space=pieces.space, flavor="base", pieces=out)


# -- bound constants and rates --------------------------------------------------


def c_phi_nu(phi: InteractionTable, nu: SiteMeasure) -> float:
    """Worst two-site weight distortion of the interaction.

    sup over state pairs of the larger of the product-weight ratio and its
    reciprocal; always >= 1, and exactly 1 when the interaction permutes
    the product weights.
    """
    m = phi.space.size
    w = nu.weights
    worst = 1.0
    for i1 in range(m):
        for i2 in range(m):
            j1, j2 = phi.apply(i1, i2)
            ratio = (w[j1] * w[j2]) / (w[i1] * w[i2])
            worst = max(worst, ratio, 1.0 / ratio)
    return float(worst)


@dataclass(frozen=True)
class Rate:
    """A strictly positive local rate table per directed edge."""

    space: StateSpace
    tables: dict  # edge -> FunctionTable

    def __post_init__(self):
        for e, tab in self.tables.items():
            if (tab.values <= 0).any():
                raise ValueError(f"rate must be strictly positive on {e}")

    def table(self, e) -> FunctionTable:
        return self.tables[e]


def trivial_rate(locale, space: StateSpace) -> Rate:
    tabs = {e: FunctionTable.constant(space, 1.0) for e in locale.directed_edges()}
    return Rate(space=space, tables=tabs)


def canonical_rate(nu: SiteMeasure, phi: InteractionTable, locale) -> Rate:
    """The square-root weight-ratio rate, reversible for the product measure.

    On a genuine transition the rate is sqrt of the two-site weight ratio
    after/before; on fixed configurations the reversed-edge transition is
    used instead, which makes the fixed-point symmetry hold by
    construction.
    """
    m = phi.space.size
    w = nu.weights
    fwd = pair_code_map(phi)
    bwd = pair_code_map(phi, reversed_edge=True)
    tabs = {}
    for e in locale.directed_edges():
        o, t = e
        window = tuple(sorted((o, t)))
        vals = np.empty(m * m)
        for io in range(m):
            for it in range(m):
                pair = io * m + it
                target = fwd[pair] if fwd[pair] != pair else bwd[pair]
                jo, jt = divmod(int(target), m)
                vals[pair] = np.sqrt((w[jo] * w[jt]) / (w[io] * w[it]))
        # vals is indexed by (eta_o, eta_t); transpose if the sorted window
        # puts t before o.
        if window != (o, t):
            vals = vals.reshape(m, m).T.reshape(-1)
        tabs[e] = FunctionTable(phi.space, window, vals)
    return Rate(space=phi.space, tables=tabs)


def _joint_window(rate: Rate, e) -> tuple:
    o, t = e
    w = set(rate.table(e).window) | set(rate.table((t, o)).window) | {o, t}
    return tuple(sorted(w))


def is_reversible(rate: Rate, nu: SiteMeasure, phi: InteractionTable, locale,
                  rtol: float = 1e-10) -> bool:
    """Check mu(eta) r_e(eta) = mu(eta^e) r_ebar(eta^e) on every edge."""
    fwd = pair_code_map(phi)
    for e in locale.directed_edges():
        o, t = e
        window = _joint_window(rate, e)
        re = rate.table(e).embed(window)
        reb = rate.table((t, o)).embed(window)
        w = weight_array(phi.space, window, nu)
        lhs = w * re.values
        reb_after = reb.precompose_pair(o, t, fwd)
        # mu(eta^e) via the successor codes of the identity embedding
        idx = FunctionTable(phi.space, window, np.arange(w.size, dtype=float))
        succ = idx.precompose_pair(o, t, fwd).values.astype(np.int64)
        rhs = w[succ] * reb_after.values
        scale = max(lhs.max(), rhs.max())
        if np.abs(lhs - rhs).max() > rtol * scale:
            return False
    return True


def rate_bounds(rate: Rate, nu: SiteMeasure, phi: InteractionTable, e) -> dict:
    """The rate bound M and the transition bound A for the edge e.

    M compares the rate against 1 in sup norm; A is the worst detailed
    balance distortion, evaluated on the joint support window (for the
    product measure, smaller windows only average the pointwise ratios, so
    the joint-window supremum dominates).
    """
    o, t = e
    vals = rate.table(e).values
    m_bound = float(max(vals.max(), (1.0 / vals).max()))
    window = _joint_window(rate, e)
    fwd = pair_code_map(phi)
    re = rate.table(e).embed(window)
    reb = rate.table((t, o)).embed(window)
    w = weight_array(phi.space, window, nu)
    idx = FunctionTable(phi.space, window, np.arange(w.size, dtype=float))
    succ = idx.precompose_pair(o, t, fwd).values.astype(np.int64)
    ratio = (w * re.values) / (w[succ] * reb.precompose_pair(o, t, fwd).values)
    a_bound = float(max(ratio.max(), (1.0 / ratio).max()))
    return {"M": m_bound, "A": a_bound}


def weighted_norm(f: FunctionTable, rate: Rate, e, nu: SiteMeasure) -> float:
    """sqrt E[r_e f^2], the edge-weighted norm."""
    g = f * f * rate.table(e)
    return float(np.sqrt(max(expectation(g, nu), 0.0)))
