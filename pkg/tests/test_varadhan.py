import numpy as np
import pytest

from lgforms.errors import InvalidQueryError
from lgforms.forms import is_closed, solve_potential
from lgforms.interaction import conserved_basis, gep, sep
from lgforms.locales import box
from lgforms.measure import (
    expectation,
    geometric_measure,
    mu_norm,
    nabla_edge,
    uniform_measure,
)
from lgforms.tables import FunctionTable
from lgforms.varadhan import (
    ShiftInvariantForm,
    current_form,
    current_table,
    decompose,
    delta_map,
    gamma_differential,
    is_closed_shift_invariant,
    locality_probe,
    origin,
    project_to_box,
    psi_sequence,
    synthesize_form,
    unit,
)


def xi_floats(phi):
    return [float(x) for x in conserved_basis(phi).vectors[0]]


def test_current_table_gep_counts_transferred_units(gep2):
    tab = current_table([0.0, 1.0, 2.0], gep2, 0, 1)  # xi(s) = s
    assert abs(tab.value_at({(0,): 2, (1,): 0}) - 1.0) < 1e-12
    assert abs(tab.value_at({(0,): 0, (1,): 1})) < 1e-12  # blocked


def test_current_table_sep_signs(sep1):
    tab = current_table([0.0, 1.0], sep1, 0, 1)
    assert abs(tab.value_at({(0,): 1, (1,): 0}) - 1.0) < 1e-12
    assert abs(tab.value_at({(0,): 0, (1,): 1}) + 1.0) < 1e-12
    assert abs(tab.value_at({(0,): 0, (1,): 0})) < 1e-12
    assert abs(tab.value_at({(0,): 1, (1,): 1})) < 1e-12


def test_current_form_perpendicular_directions_vanish(sep1):
    form = current_form([0.0, 1.0], sep1, 1, 2)
    assert form.reps[0].max_abs() == 0.0
    assert form.reps[1].max_abs() > 0.0


def test_gamma_differential_of_constant_vanishes(sep1):
    out = gamma_differential(FunctionTable.constant(sep1.space, 2.0), sep1, 0, 1)
    assert out.max_abs() < 1e-14


def test_gamma_differential_of_conserved_coordinate_vanishes(gep2):
    f = FunctionTable.coordinate(gep2.space, (0,), xi_floats(gep2))
    out = gamma_differential(f, gep2, 0, 1)
    assert out.max_abs() < 1e-12


def test_gamma_differential_product_matches_explicit_sum(sep1):
    # eta_0 * eta_1 under the swap: build the finite sum of translates by hand
    space = sep1.space
    vals = np.array([0.0, 0.0, 0.0, 1.0])
    f = FunctionTable(space, ((0,), (1,)), vals)
    out = gamma_differential(f, sep1, 0, 1)
    expected = None
    for k in (-1, 0, 1):
        term = nabla_edge(f.translate((k,)), sep1, ((0,), (1,)))
        expected = term if expected is None else expected + term
    assert (out - expected).max_abs() < 1e-14
    assert set(out.trim().window) <= {(-1,), (0,), (1,), (2,)}


def test_project_current_to_box_is_closed(gep2):
    nu = geometric_measure(gep2.space, 0.5)
    form = current_form(xi_floats(gep2), gep2, 0, 1)
    proj = project_to_box(form, box(1, 1), nu)
    assert proj.validate(gep2) == []
    assert is_closed(proj, gep2)


def test_project_gamma_to_box_closed_and_exact(rng, sep2):
    nu = uniform_measure(sep2.space)
    f0 = FunctionTable.random(sep2.space, ((0,), (1,)), rng)
    form = synthesize_form(sep2, conserved_basis(sep2), d=1, f0=f0)
    proj = project_to_box(form, box(1, 2), nu)
    assert is_closed(proj, sep2)
    solve_potential(proj, sep2)  # must not raise


def test_project_zero_form(sep1):
    nu = uniform_measure(sep1.space)
    zero = ShiftInvariantForm(1, sep1.space, sep1,
                              {0: FunctionTable.zeros(sep1.space, ((0,), (1,)))})
    proj = project_to_box(zero, box(1, 1), nu)
    assert all(np.abs(proj.edge_values(e)).max() == 0
               for e in proj.locale.directed_edges())


def test_project_rejects_too_small_box(rng, sep1):
    nu = uniform_measure(sep1.space)
    wide = FunctionTable.random(sep1.space, tuple((k,) for k in range(-3, 4)), rng)
    # symmetrize so it is a valid representative: zero on fixed configs
    form = synthesize_form(sep1, conserved_basis(sep1), d=1,
                           f0=FunctionTable.random(sep1.space,
                                                   tuple((k,) for k in range(0, 4)),
                                                   rng))
    with pytest.raises(InvalidQueryError):
        project_to_box(form, box(1, 1), nu)


def test_is_closed_shift_invariant_accepts_currents_and_gammas(rng, gep2):
    nu = geometric_measure(gep2.space, 0.5)
    basis = conserved_basis(gep2)
    current = current_form(xi_floats(gep2), gep2, 0, 1)
    assert is_closed_shift_invariant(current, gep2, nu, max_box=2)
    f0 = FunctionTable.random(gep2.space, ((0,), (1,)), rng)
    gamma = synthesize_form(gep2, basis, d=1, f0=f0)
    assert is_closed_shift_invariant(gamma, gep2, nu, max_box=2)


def test_is_closed_shift_invariant_rejects_perturbed_current(gep2):
    nu = geometric_measure(gep2.space, 0.5)
    tab = current_table([0.0, 1.0, 2.0], gep2, 0, 1)
    vals = tab.values.copy()
    # perturb one genuinely moving configuration value
    idx = int(np.nonzero(np.abs(vals) > 0.5)[0][0])
    vals[idx] += 0.3
    bad = ShiftInvariantForm(1, gep2.space, gep2,
                             {0: FunctionTable(gep2.space, tab.window, vals)})
    assert not is_closed_shift_invariant(bad, gep2, nu, max_box=2)


def test_representative_must_vanish_on_fixed_configs(gep2):
    vals = np.ones(9)
    with pytest.raises(ValueError):
        ShiftInvariantForm(1, gep2.space, gep2,
                           {0: FunctionTable(gep2.space, ((0,), (1,)), vals)})


def test_shift_invariant_norm_equivalence(rng, gep2):
    nu = geometric_measure(gep2.space, 0.5)
    f0 = FunctionTable.random(gep2.space, ((0,), (1,)), rng)
    form = synthesize_form(gep2, conserved_basis(gep2), d=1, f0=f0,
                           a=np.array([[0.4]]))
    sp = form.sp_norm(nu)
    rn = form.r_norm(nu)
    n_orbits = 2  # two directed edge orbits in one dimension
    assert sp**2 <= rn**2 + 1e-12
    assert rn**2 <= n_orbits * sp**2 + 1e-12


def test_decompose_pure_current(gep2):
    nu = geometric_measure(gep2.space, 0.5)
    basis = conserved_basis(gep2)
    form = current_form(basis.vectors[0], gep2, 0, 1)
    res = decompose(form, gep2, basis, radius=1, nu=nu)
    assert abs(res.a[0, 0] - 1.0) < 1e-10
    assert max(res.residuals) < 1e-10
    assert res.f.max_abs() < 1e-8


def test_decompose_pure_gamma(rng, sep2):
    nu = uniform_measure(sep2.space)
    basis = conserved_basis(sep2)
    f0 = FunctionTable.random(sep2.space, ((0, 0), (1, 0)), rng)
    form = synthesize_form(sep2, basis, d=2, f0=f0)
    res = decompose(form, sep2, basis, radius=1, nu=nu)
    assert np.abs(res.a).max() < 1e-8
    assert max(res.residuals) < 1e-10


def test_decompose_zero_form(sep1):
    nu = uniform_measure(sep1.space)
    basis = conserved_basis(sep1)
    zero = ShiftInvariantForm(1, sep1.space, sep1,
                              {0: FunctionTable.zeros(sep1.space, ((0,), (1,)))})
    res = decompose(zero, sep1, basis, radius=1, nu=nu)
    assert np.abs(res.a).max() < 1e-12
    assert max(res.residuals) < 1e-12
    assert res.f.max_abs() < 1e-12


def test_decompose_mixed_recovery_and_stability(rng, gep2):
    nu = geometric_measure(gep2.space, 0.5)
    basis = conserved_basis(gep2)
    f0 = FunctionTable.random(gep2.space, ((0,), (1,)), rng)
    a0 = np.array([[0.7]])
    form = synthesize_form(gep2, basis, d=1, f0=f0, a=a0)
    cache = {}
    res1 = decompose(form, gep2, basis, radius=1, nu=nu, _cache=cache)
    res2 = decompose(form, gep2, basis, radius=2, nu=nu, _cache=cache)
    assert np.abs(res1.a - a0).max() < 1e-8
    assert np.abs(res2.a - res1.a).max() < 1e-8
    assert max(res1.residuals) < 1e-10


def test_decompose_result_f_reproduces_exact_part(rng, gep2):
    # the recovered potential, summed over translates, matches the target
    nu = geometric_measure(gep2.space, 0.5)
    basis = conserved_basis(gep2)
    f0 = FunctionTable.random(gep2.space, ((0,), (1,)), rng)
    form = synthesize_form(gep2, basis, d=1, f0=f0)
    res = decompose(form, gep2, basis, radius=1, nu=nu)
    rebuilt = gamma_differential(res.f, gep2, 0, 1)
    assert (rebuilt - form.reps[0]).max_abs() < 1e-8


def test_decompose_gauge_mean_zero(rng, gep2):
    nu = geometric_measure(gep2.space, 0.5)
    basis = conserved_basis(gep2)
    f0 = FunctionTable.random(gep2.space, ((0,), (1,)), rng)
    form = synthesize_form(gep2, basis, d=1, f0=f0, a=np.array([[0.3]]))
    res = decompose(form, gep2, basis, radius=1, nu=nu)
    assert abs(expectation(res.f, nu)) < 1e-10


def test_delta_map_constant_gives_zero(sep1):
    f = FunctionTable.constant(sep1.space, 1.5)
    out = delta_map(f, 1)
    assert len(out) == 1 and out[0].max_abs() < 1e-15


def test_delta_map_zero(sep1):
    f = FunctionTable.zeros(sep1.space, ((0,), (1,)))
    assert all(t.max_abs() == 0 for t in delta_map(f, 1))


def test_delta_map_position_weighted_sum_gives_conserved_window(gep2):
    # f = sum_x x * xi(eta_x) over a finite window; away from the window
    # edges the difference is the plain conserved sum
    xs = xi_floats(gep2)
    window = [(-1,), (0,), (1,)]
    f = FunctionTable.zeros(gep2.space, tuple(window))
    for (x,) in window:
        f = f + float(x) * FunctionTable.coordinate(gep2.space, (x,), xs)
    out = delta_map(f, 1)[0]
    # plug base at the two boundary sites of the enlarged window
    interior = out.plug({(-1,): gep2.space.base_state, (2,): gep2.space.base_state})
    expected = (FunctionTable.coordinate(gep2.space, (0,), xs)
                + FunctionTable.coordinate(gep2.space, (1,), xs))
    assert (interior - expected).max_abs() < 1e-12


def test_psi_identity_and_bound(rng, sep1):
    nu = uniform_measure(sep1.space)
    basis = conserved_basis(sep1)
    f0 = FunctionTable.random(sep1.space, ((0,), (1,)), rng)
    form = synthesize_form(sep1, basis, d=1, f0=f0, a=np.array([[0.6]]))
    for n in (1, 2):
        step = psi_sequence(form, sep1, nu, n, c_sg=4.0)
        assert step.identity_residual < 1e-10
        assert step.bound_ok


def test_psi_zero_form_gives_zero_parts(sep1):
    nu = uniform_measure(sep1.space)
    zero = ShiftInvariantForm(1, sep1.space, sep1,
                              {0: FunctionTable.zeros(sep1.space, ((0,), (1,)))})
    step = psi_sequence(zero, sep1, nu, 1, c_sg=4.0)
    assert step.omega_n.reps[0].max_abs() < 1e-12
    assert step.omega_dagger.reps[0].max_abs() < 1e-12
    assert step.dagger_sup_norm < 1e-12


def test_psi_interior_part_approaches_input(rng, sep1):
    nu = uniform_measure(sep1.space)
    basis = conserved_basis(sep1)
    f0 = FunctionTable.random(sep1.space, ((0,), (1,)), rng)
    form = synthesize_form(sep1, basis, d=1, f0=f0)
    diffs = []
    for n in (1, 2, 3):
        step = psi_sequence(form, sep1, nu, n, c_sg=4.0)
        diffs.append(mu_norm(step.omega_n.reps[0] - form.reps[0], nu))
    assert diffs[0] > diffs[1] > diffs[2]


def test_locality_probe_measurable_function(rng, sep2):
    lam = [(0,), (1,)]
    lam2 = [(-2,), (-1,)]
    g = FunctionTable.random(sep2.space, tuple(lam), rng)
    assert locality_probe(g, lam, lam2, sep2)


def test_locality_probe_detects_outside_dependence(sep2):
    lam = [(0,), (1,)]
    lam2 = [(-2,), (-1,)]
    g = FunctionTable.coordinate(sep2.space, (-1,), [0.0, 1.0, 2.0])
    assert not locality_probe(g, lam, lam2, sep2)


def test_locality_probe_class_measurable_passes(gep2):
    # conserved sum over the probe region is blind to its internal moves
    lam = [(0,), (1,)]
    lam2 = [(-2,), (-1,)]
    xs = xi_floats(gep2)
    g = (FunctionTable.coordinate(gep2.space, (-2,), xs)
         + FunctionTable.coordinate(gep2.space, (-1,), xs))
    assert locality_probe(g, lam, lam2, gep2)


def test_locality_probe_rejects_overlapping_regions(sep2, rng):
    g = FunctionTable.random(sep2.space, ((0,),), rng)
    with pytest.raises(InvalidQueryError):
        locality_probe(g, [(0,)], [(0,), (1,)], sep2)
