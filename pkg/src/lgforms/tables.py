"""Dense tables for real-valued functions on finite configuration windows.

A FunctionTable stores f on S^W for a finite window W as a flat array in
mixed-radix order: the window is kept sorted and the first vertex is the
most significant digit, so reshaping to (|S|, ..., |S|) puts one axis per
vertex.  All heavier operations (plugging states, precomposing with a
pair interaction, summing out coordinates) are vectorized over codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interaction import InteractionTable, StateSpace

__all__ = [
    "FunctionTable",
    "pair_successor_codes",
    "pair_code_map",
    "exchange_code_map",
    "translate_window",
]


def _sorted_window(window) -> tuple:
    w = tuple(sorted(window))
    if len(set(w)) != len(w):
        raise ValueError("window has repeated vertices")
    return w


@dataclass(frozen=True)
class FunctionTable:
    """A real function on S^W, W a finite sorted vertex window."""

    space: StateSpace
    window: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "window", _sorted_window(self.window))
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size != self.space.size ** len(self.window):
            raise ValueError(
                f"expected {self.space.size ** len(self.window)} values, got {vals.size}"
            )
        object.__setattr__(self, "values", vals)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def constant(cls, space: StateSpace, value: float) -> "FunctionTable":
        return cls(space, (), np.array([float(value)]))

    @classmethod
    def zeros(cls, space: StateSpace, window) -> "FunctionTable":
        window = _sorted_window(window)
        return cls(space, window, np.zeros(space.size ** len(window)))

    @classmethod
    def random(cls, space: StateSpace, window, rng) -> "FunctionTable":
        window = _sorted_window(window)
        return cls(space, window, rng.standard_normal(space.size ** len(window)))

    @classmethod
    def coordinate(cls, space: StateSpace, vertex, state_values) -> "FunctionTable":
        """The function eta -> state_values[eta_vertex] on a 1-site window."""
        vals = np.asarray([float(state_values[i]) for i in range(space.size)])
        return cls(space, (vertex,), vals)

    # -- indexing ------------------------------------------------------------

    @property
    def m(self) -> int:
        return self.space.size

    def tensor(self) -> np.ndarray:
        return self.values.reshape((self.m,) * len(self.window))

    def place(self, vertex) -> int:
        """Digit weight of the vertex: m^(w-1-axis)."""
        axis = self.window.index(vertex)
        return self.m ** (len(self.window) - 1 - axis)

    def code_of(self, assignment: dict) -> int:
        code = 0
        for v in self.window:
            code = code * self.m + assignment[v]
        return code

    def value_at(self, assignment: dict) -> float:
        return float(self.values[self.code_of(assignment)])

    def digits(self, vertex) -> np.ndarray:
        """State index at the vertex, for every configuration code."""
        p = self.place(vertex)
        return (np.arange(self.values.size) // p) % self.m

    # -- algebra -------------------------------------------------------------

    def _binary(self, other: "FunctionTable", op) -> "FunctionTable":
        window = tuple(sorted(set(self.window) | set(other.window)))
        a = self.embed(window)
        b = other.embed(window)
        return FunctionTable(self.space, window, op(a.values, b.values))

    def __add__(self, other):
        if isinstance(other, FunctionTable):
            return self._binary(other, np.add)
        return FunctionTable(self.space, self.window, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, FunctionTable):
            return self._binary(other, np.subtract)
        return FunctionTable(self.space, self.window, self.values - float(other))

    def __mul__(self, other):
        if isinstance(other, FunctionTable):
            return self._binary(other, np.multiply)
        return FunctionTable(self.space, self.window, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return FunctionTable(self.space, self.window, -self.values)

    # -- window surgery -------------------------------------------------------

    def embed(self, window) -> "FunctionTable":
        """View on a superset window (broadcast over the new vertices)."""
        window = _sorted_window(window)
        if window == self.window:
            return self
        mine = set(self.window)
        if not mine <= set(window):
            raise ValueError("embed target must contain the current window")
        t = self.tensor()
        for i, v in enumerate(window):
            if v not in mine:
                t = np.expand_dims(t, axis=i)
        t = np.broadcast_to(t, (self.m,) * len(window))
        return FunctionTable(self.space, window, np.ascontiguousarray(t).reshape(-1))

    def plug(self, assignment: dict) -> "FunctionTable":
        """Fix the given vertices at the given state indices."""
        t = self.tensor()
        keep = []
        for i, v in enumerate(self.window):
            if v in assignment:
                t = np.take(t, assignment[v], axis=len(keep))
            else:
                keep.append(v)
        return FunctionTable(self.space, tuple(keep), np.asarray(t).reshape(-1))

    def sum_out(self, vertices, weights: np.ndarray) -> "FunctionTable":
        """Weighted sum over the listed vertices (one weight per state)."""
        t = self.tensor()
        removed = set(vertices) & set(self.window)
        axes = sorted((self.window.index(v) for v in removed), reverse=True)
        for ax in axes:
            t = np.tensordot(t, weights, axes=([ax], [0]))
        kept = tuple(v for v in self.window if v not in removed)
        return FunctionTable(self.space, kept, np.asarray(t).reshape(-1))

    def precompose_pair(self, u, v, pair_map: np.ndarray) -> "FunctionTable":
        """Return eta -> f(eta') where (eta'_u, eta'_v) = pair_map[(eta_u, eta_v)].

        pair_map is a flat array over pair codes i1*m + i2.  The window is
        extended to contain u and v first.
        """
        if u == v:
            return self
        base = self.embed(tuple(sorted(set(self.window) | {u, v})))
        succ = pair_successor_codes(self.space, base.window, u, v, pair_map)
        return FunctionTable(self.space, base.window, base.values[succ])

    def translate(self, x) -> "FunctionTable":
        """Shift a lattice-window table by x (vertices are int tuples)."""
        window = translate_window(self.window, x)
        return FunctionTable(self.space, window, self.values)

    def trim(self, atol: float = 0.0) -> "FunctionTable":
        """Drop vertices on which the stored values do not depend."""
        t = self.tensor()
        keep = []
        for i, v in enumerate(self.window):
            sl = t.take(0, axis=len(keep))
            if np.abs(t - np.expand_dims(sl, axis=len(keep))).max(initial=0.0) <= atol:
                t = sl
            else:
                keep.append(v)
        return FunctionTable(self.space, tuple(keep), np.asarray(t).reshape(-1))

    def max_abs(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))


def pair_successor_codes(space: StateSpace, window, u, v,
                         pair_map: np.ndarray) -> np.ndarray:
    """Configuration code after applying the pair map at (u, v).

    The window must be sorted and contain both vertices.
    """
    window = tuple(window)
    m = space.size
    w = len(window)
    pu = m ** (w - 1 - window.index(u))
    pv = m ** (w - 1 - window.index(v))
    codes = np.arange(m**w, dtype=np.int64)
    du = (codes // pu) % m
    dv = (codes // pv) % m
    mapped = pair_map[du * m + dv]
    return codes + (mapped // m - du) * pu + (mapped % m - dv) * pv


def pair_code_map(phi: InteractionTable, reversed_edge: bool = False) -> np.ndarray:
    """The interaction as a flat map on pair codes i1*m + i2.

    With reversed_edge=True the map is phi-bar = iota . phi . iota, which
    is what a transition along the opposite edge applies to the pair read
    in the original (origin, terminus) order.
    """
    m = phi.space.size
    out = np.empty(m * m, dtype=np.int64)
    for i1 in range(m):
        for i2 in range(m):
            if reversed_edge:
                j1, j2 = phi.apply_reversed(i1, i2)
            else:
                j1, j2 = phi.apply(i1, i2)
            out[i1 * m + i2] = j1 * m + j2
    return out


def exchange_code_map(space: StateSpace) -> np.ndarray:
    """The unconditional swap on pair codes."""
    m = space.size
    out = np.empty(m * m, dtype=np.int64)
    for i1 in range(m):
        for i2 in range(m):
            out[i1 * m + i2] = i2 * m + i1
    return out


def translate_window(window, x) -> tuple:
    """Shift every lattice vertex of the window by x."""
    return tuple(tuple(c + d for c, d in zip(v, x)) for v in window)
