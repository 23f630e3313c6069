import json

import pytest

from lgforms.locales import (
    Lattice,
    LatticeBox,
    boundary,
    box,
    complete,
    counting_report,
    cycle,
    grid,
    half_space_opposite,
    load_locale,
    orbit_edge_counts,
    path,
    perimeter,
    tempered_ratio,
    torus,
)


def test_boundary_of_box_matches_formula():
    for d, n in [(1, 3), (2, 1), (2, 2), (3, 1)]:
        bx = LatticeBox(d, n)
        bnd = boundary(Lattice(d), bx.vertices())
        assert len(bnd) == 2 * d * (2 * n + 1) ** (d - 1)


def test_boundary_of_full_finite_locale_is_empty():
    loc = path(4)
    assert boundary(loc, loc.vertices) == set()


def test_boundary_single_site_d1():
    assert boundary(Lattice(1), [(0,)]) == {((0,), (1,)), ((0,), (-1,))}


def test_perimeter_endpoints_d1():
    verts = [(k,) for k in range(-2, 3)]
    assert perimeter(Lattice(1), verts, 1) == {(-2,), (2,)}


def test_perimeter_ring_d2():
    verts = LatticeBox(2, 2).vertices()
    ring = perimeter(Lattice(2), verts, 1)
    assert len(ring) == 16
    assert (0, 0) not in ring


def test_perimeter_saturates_to_whole_region():
    verts = LatticeBox(1, 2).vertices()
    assert perimeter(Lattice(1), verts, 10) == set(verts)


def test_counting_report_d1_n3():
    r = counting_report(1, 3)
    assert r["size"] == 7 and r["boundary"] == 2 and r["perimeters"][1] == 2
    assert r["degree"] == 2
    assert r["check_perim1_le_boundary"] and r["check_boundary_le_deg_perim1"]
    assert r["check_perim_growth"]


def test_counting_report_d2_n1():
    r = counting_report(2, 1)
    assert r["size"] == 9 and r["boundary"] == 12 and r["perimeters"][1] == 8


@pytest.mark.parametrize("d,n", [(1, 5), (2, 3), (3, 2)])
def test_counting_report_formulas_and_inequalities(d, n):
    r = counting_report(d, n)
    assert r["size"] == (2 * n + 1) ** d == r["size_formula"]
    assert r["boundary"] == r["boundary_formula"]
    assert r["check_perim1_le_boundary"]
    assert r["check_boundary_le_deg_perim1"]
    assert r["check_perim_growth"]


def test_perimeter_fraction_vanishes_with_n():
    for ell in (1, 2, 3):
        fracs = [counting_report(2, n, (ell,))["perimeters"][ell]
                 / counting_report(2, n)["size"] for n in (2, 4, 8)]
        assert fracs[0] > fracs[1] > fracs[2]


def test_tempered_ratio_limits():
    assert abs(tempered_ratio(1, 10**6) - 32.0) / 32.0 < 1e-3
    assert abs(tempered_ratio(2, 10**6) - 4096.0 / 12.0) / (4096.0 / 12.0) < 1e-3


def test_tempered_ratio_small_n_positive():
    val = tempered_ratio(1, 1)
    assert val > 0
    assert abs(val - (4.0 / 9.0) * (5.0 / 2.0) * 25.0) < 1e-12


def test_tempered_ratio_bounded_over_n():
    vals = [tempered_ratio(2, n) for n in range(1, 200)]
    assert max(vals) < 600  # stays bounded, approaching the limit from one side


def test_orbit_count_matches_formula():
    for d, n in [(1, 4), (2, 2), (2, 5)]:
        e = ((0,) * d, (1,) + (0,) * (d - 1))
        rep = orbit_edge_counts(d, n, e)
        assert rep["count_e"] == (2 * n + 1) ** (d - 1) == rep["count_formula"]


def test_orbit_parallel_same_direction_empty():
    e = ((0, 0), (1, 0))
    et = ((4, 4), (5, 4))
    assert orbit_edge_counts(2, 2, e, et)["count_both"] == 0


def test_orbit_two_edge_ratio_decays():
    e = ((0, 0), (1, 0))
    et = ((-1, 3), (-1, 2))  # perpendicular edge in the opposite half-space
    assert half_space_opposite(e)((-1, 3))
    ratios = []
    for n in range(4, 21, 4):
        rep = orbit_edge_counts(2, n, e, et)
        ratios.append(rep["count_both"] / rep["count_e"])
        assert rep["count_both"] <= (2 * n + 1) ** 0  # (2n+1)^(d-2) freedom
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] <= 1.0 / (2 * 20 + 1)


def test_generators_shapes():
    assert len(path(5).vertices) == 5
    assert len(complete(4).edges) == 12
    assert len(cycle(6).edges) == 12
    assert len(grid((2, 2)).vertices) == 4
    assert len(box(2, 1).vertices) == 9
    assert len(torus((3, 3)).vertices) == 9
    assert torus((3, 3)).degree() == 4


def test_locale_validation_rejects_asymmetric():
    # the JSON loader closes edges symmetrically, so this is fine
    assert (1, 0) in load_locale({"vertices": [0, 1], "edges": [[0, 1]]}).edges
    # direct construction without the opposite edge must fail
    from lgforms.locales import Locale

    with pytest.raises(ValueError):
        Locale(vertices=(0, 1), edges=frozenset({(0, 1)}))


def test_load_locale_json_edge_list():
    doc = json.dumps({"edges": [[0, 1], [1, 2]], "name": "chain"})
    loc = load_locale(doc)
    assert loc.vertices == (0, 1, 2)
    assert (2, 1) in loc.edges
    assert loc.diameter() == 2
