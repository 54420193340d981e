import numpy as np
import pytest

from radnls.errors import WindowError
from radnls.evolution import sample_localized_fields
from radnls.grid import RadialField, inner_product, lp_norm
from radnls.hamiltonian import project_continuous, propagate_linear
from radnls.nonlinearity import NonlinearitySpec
from radnls.propagator import (LinearizationPath, omega_apply,
                               probe_t_short_time, standard_probe_plan,
                               t_operator_apply, t_tilde_apply)


@pytest.fixture(scope="module")
def path4(branch4):
    return LinearizationPath(branch4, "frozen", a0=0.3)


def probe_field(branch, seed=0, amp=1.0):
    f = project_continuous(branch.spectral,
                           sample_localized_fields(branch.grid, 1, 15.0,
                                                   width=2.0, seed=seed)[0])
    return RadialField(branch.grid, amp * f.values / lp_norm(f, 2))


def test_frozen_path_range_check(branch4):
    with pytest.raises(WindowError):
        LinearizationPath(branch4, "frozen", a0=2 * branch4.extent)


def test_zero_coupling_reduces_to_linear_flow(branch4):
    path0 = LinearizationPath(branch4, "frozen", a0=0.0)
    v = probe_field(branch4, seed=1)
    z = omega_apply(path0, 0.0, 1.0, v, dt=0.01)
    lin = propagate_linear(branch4.spectral, project_continuous(branch4.spectral, v),
                           0.01, 100)
    err = lp_norm(RadialField(branch4.grid, z.values - lin.values), 2)
    assert err < 1e-12
    w = t_operator_apply(path0, 0.0, 1.0, v, dt=0.01)
    assert lp_norm(w, 2) < 1e-12


def test_omega_semigroup_property(path4, branch4):
    v = probe_field(branch4, seed=2)
    z_direct = omega_apply(path4, 0.0, 2.0, v, dt=0.01)
    z_mid = omega_apply(path4, 0.0, 0.75, v, dt=0.01)
    z_comp = omega_apply(path4, 0.75, 2.0, z_mid, dt=0.01)
    err = lp_norm(RadialField(branch4.grid, z_direct.values - z_comp.values), 2)
    assert err < 1e-8


def test_omega_real_linearity(path4, branch4):
    v1, v2 = probe_field(branch4, seed=3), probe_field(branch4, seed=4)
    c1, c2 = 0.7, -1.3   # real coefficients only: Dg is not complex-linear
    combo = RadialField(branch4.grid, c1 * v1.values + c2 * v2.values)
    lhs = omega_apply(path4, 0.0, 0.5, combo, dt=0.01)
    z1 = omega_apply(path4, 0.0, 0.5, v1, dt=0.01)
    z2 = omega_apply(path4, 0.0, 0.5, v2, dt=0.01)
    rhs = c1 * z1.values + c2 * z2.values
    assert lp_norm(RadialField(branch4.grid, lhs.values - rhs), 2) < 1e-11


def test_omega_not_complex_linear(path4, branch4):
    # multiplying the data by i does not factor through (real-linear only)
    v = probe_field(branch4, seed=5)
    z_iv = omega_apply(path4, 0.0, 1.0, RadialField(branch4.grid, 1j * v.values),
                       dt=0.01)
    z_v = omega_apply(path4, 0.0, 1.0, v, dt=0.01)
    diff = lp_norm(RadialField(branch4.grid, z_iv.values - 1j * z_v.values), 2)
    assert diff > 1e-6


def test_omega_backward_inverts_forward(path4, branch4):
    v = probe_field(branch4, seed=6)
    fwd = omega_apply(path4, 0.0, 1.0, v, dt=0.01)
    back = omega_apply(path4, 1.0, 0.0, fwd, dt=0.01)
    pv = project_continuous(branch4.spectral, v)
    err = lp_norm(RadialField(branch4.grid, back.values - pv.values), 2)
    assert err < 1e-9


def test_t_operator_zero_cases(path4, branch4):
    v = probe_field(branch4, seed=7)
    assert lp_norm(t_operator_apply(path4, 0.0, 0.0, v, dt=0.01), 2) == 0.0


def test_psi0_component_stays_zero(path4, branch4):
    v = probe_field(branch4, seed=8)
    z = omega_apply(path4, 0.0, 3.0, v, dt=0.01)
    drift = abs(inner_product(branch4.spectral.psi0, z))
    assert drift < 1e-6 * lp_norm(v, 2)


def test_t_tilde_zero_cases(path4, branch4):
    v = probe_field(branch4, seed=9)
    assert lp_norm(t_tilde_apply(path4, 0.0, 0.0, v, dt=0.01), 2) == 0.0
    path0 = LinearizationPath(branch4, "frozen", a0=0.0)
    assert lp_norm(t_tilde_apply(path0, 0.0, 1.0, v, dt=0.01), 2) < 1e-14


def test_t_tilde_semigroup_pull_through(path4, branch4):
    # beyond the unit tau-interval, T~(t,s) = e^{-iH(t-s-1)} T~(s+1,s)
    v = probe_field(branch4, seed=10)
    direct = t_tilde_apply(path4, 0.0, 2.5, v, dt=0.005)
    at_one = t_tilde_apply(path4, 0.0, 1.0, v, dt=0.005)
    pulled = propagate_linear(branch4.spectral, at_one, 0.005, 300)
    err = lp_norm(RadialField(branch4.grid, direct.values - pulled.values), 2)
    assert err < 1e-10 * max(lp_norm(direct, 2), 1e-30)


def test_t_tilde_first_order_in_coupling(path4, branch4):
    # T~ approximates T at leading order in the coupling: both are small and
    # their difference is higher order
    v = probe_field(branch4, seed=11)
    t_full = t_operator_apply(path4, 0.0, 0.6, v, dt=0.005)
    t_born = t_tilde_apply(path4, 0.0, 0.6, v, dt=0.005)
    n_full = lp_norm(t_full, 2)
    n_diff = lp_norm(RadialField(branch4.grid,
                                 t_full.values - t_born.values), 2)
    assert n_diff < 0.7 * n_full


def test_probe_plan_validates_ranges():
    with pytest.raises(Exception):
        standard_probe_plan(4, 2.5, p1=5.0, q2=6.0)   # p1 beyond 2N/(N-2)
    with pytest.raises(Exception):
        standard_probe_plan(4, 2.5, p1=3.2, q2=3.0)   # q2 below 2N/(N-2)
    plan = standard_probe_plan(4, 2.5, 3.2, 6.0)
    assert {p["operator"] for p in plan} == {"omega", "t"}


def test_shadowing_path_follows_trace(branch4):
    times = np.linspace(0.0, 5.0, 200)
    amps = 0.3 * np.exp(-1j * branch4.e_nodes[0] * times)
    path = LinearizationPath(branch4, "shadowing", times=times, amplitudes=amps)
    a_mid = path.amplitude(2.5)
    assert abs(a_mid) == pytest.approx(0.3, rel=1e-3)
    with pytest.raises(WindowError):
        path.amplitude(7.0)
    c = path.coefficients(1.234)
    assert c.g_u.shape == (branch4.grid.m,)


def test_short_time_probe_returns_trace(path4):
    tr = probe_t_short_time(path4, 0.0, p=6.0, taus=[0.05, 0.1, 0.2],
                            samples=2, dt=0.01, seed=1)
    assert tr.times.size == 3
    assert np.all(tr.values > 0)
