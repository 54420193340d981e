import numpy as np
import pytest

from radnls.errors import GridMismatchError, SpectralConditionError
from radnls.grid import GridSpec, RadialField, inner_product, lp_norm
from radnls.hamiltonian import (PotentialSpec, project_continuous,
                                propagate_linear, solve_ground_eigenpair)

from conftest import WELLS, random_field


def test_potential_validation():
    with pytest.raises(ValueError):
        PotentialSpec("square_well", 1.0, 1.0)
    with pytest.raises(ValueError):
        PotentialSpec("gaussian_well", -1.0, 1.0)
    p = PotentialSpec("exponential_well", 2.0, 1.0)
    g = GridSpec(4, 30.0, 128)
    v = p.on_grid(g)
    assert np.all(v < 0) and v[0] == pytest.approx(-2.0 * np.exp(-g.r[0]))


@pytest.mark.parametrize("dim", [4, 5])
def test_ground_eigenpair_contracts(dim, grid4, grid5, spectral4, spectral5):
    sd = {4: spectral4, 5: spectral5}[dim]
    assert sd.e0 < 0
    assert abs(inner_product(sd.psi0, sd.psi0) - 1.0) < 1e-12
    assert np.all(sd.psi0.values.real > 0)
    assert np.all(sd.psi0.values.imag == 0)
    assert sd.residual < 1e-8
    # uniqueness certificate: second eigenvalue effectively nonnegative
    assert sd.second_eigenvalue >= -1e-6 * abs(sd.e0)


def test_deeper_well_binds_tighter(grid4):
    e_shallow = solve_ground_eigenpair(PotentialSpec("gaussian_well", 4.0, 1.5),
                                       grid4).e0
    e_deep = solve_ground_eigenpair(PotentialSpec("gaussian_well", 8.0, 1.5),
                                    grid4).e0
    assert e_deep < e_shallow < 0


def test_no_bound_state_error(grid4):
    with pytest.raises(SpectralConditionError):
        solve_ground_eigenpair(PotentialSpec("gaussian_well", 1.0, 1.0), grid4)


def test_two_bound_states_error(grid4):
    with pytest.raises(SpectralConditionError):
        solve_ground_eigenpair(PotentialSpec("gaussian_well", 40.0, 2.0), grid4)


def test_projection_properties(spectral4, grid4):
    f = random_field(grid4, seed=11)
    pc_psi0 = project_continuous(spectral4, spectral4.psi0)
    assert lp_norm(pc_psi0, 2) < 1e-12
    pf = project_continuous(spectral4, f)
    ppf = project_continuous(spectral4, pf)
    assert lp_norm(RadialField(grid4, ppf.values - pf.values), 2) < 1e-12 * lp_norm(f, 2)
    assert abs(inner_product(spectral4.psi0, pf)) < 1e-12 * lp_norm(f, 2)


def test_projection_grid_mismatch(spectral4):
    other = RadialField.zeros(GridSpec(4, 60.0, 600))
    with pytest.raises(GridMismatchError):
        project_continuous(spectral4, other)


def test_h_self_adjoint_on_random_fields(spectral4, grid4):
    f = random_field(grid4, seed=12)
    quad = inner_product(f, spectral4.apply_h(f))
    assert abs(quad.imag) < 1e-10 * abs(quad.real)


def test_eigenmode_phase_rotation(spectral4):
    # one step sends the eigenvector to e^{-i E0 dt} psi0 with O(dt^3) local
    # error (|E0|^3 dt^3 / 12 for the midpoint rational approximation)
    errs = []
    for dt in (0.02, 0.01):
        out = propagate_linear(spectral4, spectral4.psi0, dt, 1)
        expect = np.exp(-1j * spectral4.e0 * dt) * spectral4.psi0.values
        errs.append(lp_norm(RadialField(spectral4.grid, out.values - expect), 2))
    assert errs[0] < abs(spectral4.e0) ** 3 * 0.02 ** 3 / 10
    assert errs[1] == pytest.approx(errs[0] / 8, rel=0.05)


def test_linear_mass_conservation_long_run(spectral4, grid4):
    f = random_field(grid4, seed=13)
    out = propagate_linear(spectral4, f, 0.02, 10_000)
    assert abs(lp_norm(out, 2) / lp_norm(f, 2) - 1) < 1e-12


def test_time_reversibility(spectral4, grid4):
    f = random_field(grid4, seed=14)
    fwd = propagate_linear(spectral4, f, 0.02, 200)
    back = propagate_linear(spectral4, fwd, -0.02, 200)
    assert lp_norm(RadialField(grid4, back.values - f.values), 2) \
        < 1e-10 * lp_norm(f, 2)


def test_projection_commutes_with_propagation(spectral4, grid4):
    f = random_field(grid4, seed=15)
    a = project_continuous(spectral4, propagate_linear(spectral4, f, 0.01, 100))
    b = propagate_linear(spectral4, project_continuous(spectral4, f), 0.01, 100)
    err = lp_norm(RadialField(grid4, a.values - b.values), 2)
    assert err < 1e-9 * lp_norm(f, 2)   # < 1e-9 per unit time


def test_linear_energy_conservation(spectral4, grid4):
    from radnls.evolution import energy
    f = random_field(grid4, seed=16)
    e0 = energy(f, spectral4.potential, None)
    out = propagate_linear(spectral4, f, 0.01, 1000)
    e1 = energy(out, spectral4.potential, None)
    assert abs(e1 - e0) < 1e-10 * abs(e0)
