from fractions import Fraction

import numpy as np
import pytest

from lgforms.interaction import (
    InteractionTable,
    StateSpace,
    conservation_constraints,
    conserved_basis,
    dump_interaction,
    gep,
    identity_interaction,
    is_simple,
    load_interaction,
    sep,
    validate_interaction,
)

from oracles import kernel_dimension_by_elimination


def test_validate_swap_is_valid(sep2):
    assert validate_interaction(sep2).valid


def test_validate_identity_is_valid(identity2):
    rep = validate_interaction(identity2)
    assert rep.valid and rep.violations == ()


def test_validate_collapse_map_reports_violation():
    space = StateSpace((0, 1))
    # phi(s1, s2) = (s2, s2)
    table = tuple((i2, i2) for i1 in range(2) for i2 in range(2))
    rep = validate_interaction(InteractionTable(space, table))
    assert not rep.valid
    assert (0, 1) in rep.violations


@pytest.mark.parametrize("kappa", [1, 2, 3, 4])
def test_sep_dimension_and_indicator_basis(kappa):
    basis = conserved_basis(sep(kappa))
    assert basis.dimension == kappa
    for i, vec in enumerate(basis.vectors, start=1):
        expected = tuple(Fraction(1) if s == i else Fraction(0)
                         for s in range(kappa + 1))
        assert vec == expected


@pytest.mark.parametrize("kappa", [2, 3, 4])
def test_gep_dimension_one_proportional_to_s(kappa):
    basis = conserved_basis(gep(kappa))
    assert basis.dimension == 1
    vec = basis.vectors[0]
    assert vec[0] == 0
    ratios = {vec[s] / s for s in range(1, kappa + 1)}
    assert len(ratios) == 1 and ratios.pop() != 0


def test_identity_dimension_counts_nonbase_states():
    assert conserved_basis(identity_interaction(4)).dimension == 3


def test_basis_vectors_are_conserved_exactly(sep2, gep3):
    for phi in (sep2, gep3):
        basis = conserved_basis(phi)
        m = phi.space.size
        for vec in basis.vectors:
            assert vec[phi.space.base_state] == 0
            for i1 in range(m):
                for i2 in range(m):
                    j1, j2 = phi.apply(i1, i2)
                    assert vec[j1] + vec[j2] == vec[i1] + vec[i2]


def test_dimension_invariant_under_relabeling(rng, gep2, sep2):
    for phi in (gep2, sep2):
        m = phi.space.size
        perm = list(rng.permutation(m))
        inv = [perm.index(i) for i in range(m)]
        table = []
        for a in range(m):
            for b in range(m):
                j1, j2 = phi.apply(inv[a], inv[b])
                table.append((perm[j1], perm[j2]))
        conj = InteractionTable(
            StateSpace(tuple(range(m)), base_state=perm[phi.space.base_state]),
            tuple(table))
        assert validate_interaction(conj).valid
        assert conserved_basis(conj).dimension == conserved_basis(phi).dimension


def test_kernel_dimension_matches_shuffled_elimination(rng, sep2, gep3, identity2):
    for phi in (sep2, gep3, identity2):
        rows = conservation_constraints(phi)
        order = list(rng.permutation(len(rows)))
        dim = kernel_dimension_by_elimination(rows, phi.space.size, order)
        assert conserved_basis(phi).dimension == dim


def test_is_simple_gep3():
    assert is_simple(gep(3))


def test_is_simple_sep2_false(sep2):
    assert not is_simple(sep2)


def test_is_simple_identity_two_states(identity2):
    assert is_simple(identity2)


def test_json_round_trip(gep2):
    doc = dump_interaction(gep2)
    back = load_interaction(doc)
    assert back.table == gep2.table
    assert back.space.states == gep2.space.states


def test_json_defaults_to_identity():
    phi = load_interaction({"states": [0, 1], "base": 0, "map": {}})
    assert phi.apply(0, 1) == (0, 1)
    assert validate_interaction(phi).valid
