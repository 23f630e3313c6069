"""Interaction tables, conserved-quantity spaces and the simplicity test.

An interaction is a map phi on pairs of local states describing what a
transition across a directed edge does to the two endpoint states.  The
axiom is that applying the reversed map after a genuine change restores
the original pair.  Conserved quantities are per-state rational functions,
zero at the base state, whose pairwise sum is invariant under phi; they
are computed exactly over the rationals so that the dimension c_phi is
never subject to floating-point rank misdetection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

__all__ = [
    "StateSpace",
    "InteractionTable",
    "ConsvBasis",
    "ValidationReport",
    "validate_interaction",
    "conserved_basis",
    "is_simple",
    "sep",
    "gep",
    "identity_interaction",
    "load_interaction",
    "dump_interaction",
]


@dataclass(frozen=True)
class StateSpace:
    """Ordered finite set of state labels with a designated base state."""

    states: tuple
    base_state: int = 0

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValueError("state space must be nonempty")
        if len(set(self.states)) != len(self.states):
            raise ValueError("state labels must be distinct")
        if not 0 <= self.base_state < len(self.states):
            raise ValueError("base_state index out of range")

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, label) -> int:
        return self.states.index(label)


@dataclass(frozen=True)
class InteractionTable:
    """An interaction: a total map on S x S, stored over state indices."""

    space: StateSpace
    table: tuple  # table[i1 * |S| + i2] = (j1, j2)

    def __post_init__(self):
        m = self.space.size
        if len(self.table) != m * m:
            raise ValueError("interaction map must be total on S x S")
        for pair in self.table:
            i1, i2 = pair
            if not (0 <= i1 < m and 0 <= i2 < m):
                raise ValueError(f"state index out of range in {pair}")

    def apply(self, i1: int, i2: int) -> tuple[int, int]:
        """phi(s1, s2) on state indices."""
        return self.table[i1 * self.space.size + i2]

    def apply_reversed(self, i1: int, i2: int) -> tuple[int, int]:
        """phi-bar(s1, s2) = iota . phi . iota, the reversed-edge map."""
        j2, j1 = self.apply(i2, i1)
        return (j1, j2)


@dataclass(frozen=True)
class ConsvBasis:
    """Rational basis of the space of conserved quantities."""

    space: StateSpace
    vectors: tuple  # tuple of tuples of Fraction, one value per state

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def as_floats(self) -> list[list[float]]:
        """Real-valued view of the rational basis."""
        return [[float(v) for v in vec] for vec in self.vectors]


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple = field(default_factory=tuple)


def validate_interaction(phi: InteractionTable) -> ValidationReport:
    """Check the involution axiom on all non-fixed pairs.

    A pair (s1, s2) with phi(s1, s2) != (s1, s2) violates the axiom when
    phi-bar(phi(s1, s2)) != (s1, s2).  Violations are reported as data,
    not raised.
    """
    m = phi.space.size
    bad = []
    for i1 in range(m):
        for i2 in range(m):
            out = phi.apply(i1, i2)
            if out == (i1, i2):
                continue
            if phi.apply_reversed(*out) != (i1, i2):
                bad.append((phi.space.states[i1], phi.space.states[i2]))
    return ValidationReport(valid=not bad, violations=tuple(bad))


def _rref(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form over Fraction; returns (rref_rows, pivot_cols).

    Pivots are chosen scanning columns in state-list order, which makes the
    output deterministic for a given constraint ordering.
    """
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def conservation_constraints(phi: InteractionTable) -> list[list[Fraction]]:
    """Rows of the linear system cutting out Consv(S) inside Q^S.

    One row for the base-state normalization, one row per non-fixed pair
    (identity pairs contribute the zero constraint and are skipped).
    """
    m = phi.space.size
    rows = []
    base = [Fraction(0)] * m
    base[phi.space.base_state] = Fraction(1)
    rows.append(base)
    for i1 in range(m):
        for i2 in range(m):
            j1, j2 = phi.apply(i1, i2)
            if (j1, j2) == (i1, i2):
                continue
            row = [Fraction(0)] * m
            row[j1] += 1
            row[j2] += 1
            row[i1] -= 1
            row[i2] -= 1
            if any(x != 0 for x in row):
                rows.append(row)
    return rows


def conserved_basis(phi: InteractionTable) -> ConsvBasis:
    """Exact rational null-space basis of the conservation constraints.

    The basis is derived from the reduced echelon form with pivots in
    state-list order: one vector per free column, carrying 1 at its free
    column and the solved pivot entries elsewhere.
    """
    m = phi.space.size
    rows = conservation_constraints(phi)
    rref, pivots = _rref(rows, m)
    free = [c for c in range(m) if c not in pivots]
    vectors = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -rref[ri][fc]
        vectors.append(tuple(vec))
    return ConsvBasis(space=phi.space, vectors=tuple(vectors))


def _fraction_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(gcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


def is_simple(phi: InteractionTable) -> bool:
    """True iff c_phi = 1 and the monoid generated by xi(S) is N or Z.

    With mixed signs among the nonzero values the monoid is the cyclic
    group generated by their gcd.  With one sign it is a numerical
    semigroup, free on one generator exactly when the gcd itself occurs
    among the values.  Both criteria are invariant under rescaling, so the
    basis normalization does not matter.
    """
    basis = conserved_basis(phi)
    if basis.dimension != 1:
        return False
    values = [v for v in basis.vectors[0] if v != 0]
    if not values:
        return False
    g = values[0]
    for v in values[1:]:
        g = _fraction_gcd(g, v)
    g = abs(g)
    if any(v > 0 for v in values) and any(v < 0 for v in values):
        return True  # group g*Z, isomorphic to Z
    return g in (abs(v) for v in values)  # semigroup g*N needs g itself


def sep(kappa: int) -> InteractionTable:
    """Multi-species exclusion: phi exchanges the two components.

    S = {0, ..., kappa} with base state 0; c_phi = kappa.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    space = StateSpace(states=tuple(range(kappa + 1)))
    m = kappa + 1
    table = tuple((i2, i1) for i1 in range(m) for i2 in range(m))
    return InteractionTable(space=space, table=table)


def gep(kappa: int) -> InteractionTable:
    """Generalized exclusion: one unit moves along the edge when it can.

    S = {0, ..., kappa} with base state 0; c_phi = 1.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    space = StateSpace(states=tuple(range(kappa + 1)))
    m = kappa + 1

    def rule(i1, i2):
        if i1 > 0 and i2 < kappa:
            return (i1 - 1, i2 + 1)
        return (i1, i2)

    table = tuple(rule(i1, i2) for i1 in range(m) for i2 in range(m))
    return InteractionTable(space=space, table=table)


def identity_interaction(n_states: int) -> InteractionTable:
    """The trivial interaction fixing every pair; nothing ever moves."""
    space = StateSpace(states=tuple(range(n_states)))
    table = tuple((i1, i2) for i1 in range(n_states) for i2 in range(n_states))
    return InteractionTable(space=space, table=table)


def load_interaction(source) -> InteractionTable:
    """Build an InteractionTable from a JSON document.

    Format: {"states": [...], "base": 0, "map": {"s1,s2": "t1,t2", ...}}.
    Map keys/values render state labels with str(); pairs omitted from the
    map default to the identity.  Labels must not contain ','.
    """
    if isinstance(source, (str, bytes)):
        doc = json.loads(source)
    else:
        doc = source
    states = tuple(doc["states"])
    space = StateSpace(states=states, base_state=int(doc.get("base", 0)))
    by_label = {str(s): i for i, s in enumerate(states)}
    m = len(states)
    table = [(i1, i2) for i1 in range(m) for i2 in range(m)]
    for key, val in doc.get("map", {}).items():
        s1, s2 = (by_label[p] for p in key.split(","))
        t1, t2 = (by_label[p] for p in str(val).split(","))
        table[s1 * m + s2] = (t1, t2)
    return InteractionTable(space=space, table=tuple(table))


def dump_interaction(phi: InteractionTable) -> dict:
    """JSON-serializable document for an interaction (non-identity entries)."""
    states = phi.space.states
    m = len(states)
    mp = {}
    for i1 in range(m):
        for i2 in range(m):
            j1, j2 = phi.apply(i1, i2)
            if (j1, j2) != (i1, i2):
                mp[f"{states[i1]},{states[i2]}"] = f"{states[j1]},{states[j2]}"
    return {"states": list(states), "base": phi.space.base_state, "map": mp}
