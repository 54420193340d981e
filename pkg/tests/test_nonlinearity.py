import math

import numpy as np
import pytest

from radnls.errors import InvalidBoundStateError, InvalidExponentError
from radnls.grid import GridSpec, RadialField, lp_norm
from radnls.nonlinearity import (NonlinearitySpec, alpha_bounds,
                                 calibrate_f2_constant, check_h2_prime,
                                 dg_apply, f2_apply, f2_difference_envelope)


def test_alpha_bounds_values():
    lo4, hi4 = alpha_bounds(4)
    assert lo4 == pytest.approx((-2 + math.sqrt(68)) / 8)
    assert lo4 == pytest.approx(0.780776, abs=1e-6)
    assert hi4 == 2.0
    lo5, hi5 = alpha_bounds(5)
    assert lo5 == pytest.approx((-3 + math.sqrt(89)) / 10)
    assert lo5 == pytest.approx(0.643398, abs=1e-6)
    assert hi5 == pytest.approx(4.0 / 3.0)
    assert lo4 > lo5
    with pytest.raises(InvalidExponentError):
        alpha_bounds(3)


def test_spec_validates_powers():
    NonlinearitySpec(((1.0, 1.2),), 4)
    with pytest.raises(InvalidExponentError) as err:
        NonlinearitySpec(((1.0, 0.5),), 4)
    assert "admissible" in str(err.value)
    with pytest.raises(InvalidExponentError):
        NonlinearitySpec(((1.0, 2.0),), 4)   # endpoint excluded
    # test stubs outside the admissible range need the explicit opt-out
    NonlinearitySpec(((1.0, 0.5),), 4, check_bounds=False)


def test_g_apply_basic():
    g = NonlinearitySpec(((1.0, 1.0),), 4, check_bounds=False)
    assert g.apply(0.0) == 0.0
    assert g.apply(2.0) == pytest.approx(4.0)


def test_g_gauge_and_conjugation_symmetry():
    g = NonlinearitySpec(((0.8, 1.2), (-0.3, 1.7)), 4)
    rng = np.random.default_rng(0)
    z = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
    th = rng.uniform(0, 2 * np.pi, 1000)
    rot = np.exp(1j * th)
    assert np.max(np.abs(g.apply(rot * z) - rot * g.apply(z))) < 1e-14 * np.max(np.abs(z))
    assert np.max(np.abs(g.apply(np.conj(z)) - np.conj(g.apply(z)))) == 0.0


def _positive_profile(grid):
    return RadialField(grid, 0.4 * np.exp(-grid.r ** 2 / 4))


def test_dg_apply_real_and_gauge_directions():
    grid = GridSpec(4, 20.0, 400)
    g = NonlinearitySpec(((1.0, 1.2),), 4)
    psi = _positive_profile(grid)
    p = psi.values.real
    out = dg_apply(g, psi, psi)
    assert np.allclose(out.values, g.derivative(p) * p, rtol=1e-13)
    out_i = dg_apply(g, psi, RadialField(grid, 1j * p))
    assert np.allclose(out_i.values, 1j * g.apply(p), rtol=1e-13)


def test_dg_apply_rejects_bad_profile():
    grid = GridSpec(4, 20.0, 64)
    g = NonlinearitySpec(((1.0, 1.2),), 4)
    with pytest.raises(InvalidBoundStateError):
        dg_apply(g, RadialField(grid, -np.ones(grid.m)), RadialField.zeros(grid))
    with pytest.raises(InvalidBoundStateError):
        dg_apply(g, RadialField(grid, 1j * np.ones(grid.m)), RadialField.zeros(grid))


def test_dg_matches_directional_derivative():
    grid = GridSpec(4, 20.0, 400)
    g = NonlinearitySpec(((1.0, 1.2), (0.5, 1.6)), 4)
    psi = _positive_profile(grid)
    rng = np.random.default_rng(1)
    beta = RadialField(grid, (rng.standard_normal(grid.m)
                              + 1j * rng.standard_normal(grid.m))
                       * np.exp(-grid.r ** 2 / 9))
    lin = dg_apply(g, psi, beta).values
    errs = []
    for eps in (1e-3, 1e-4):
        fd = (g.apply(psi.values + eps * beta.values) - g.apply(psi.values)) / eps
        errs.append(lp_norm(RadialField(grid, fd - lin), 2))
    assert errs[0] < 0.05
    assert errs[1] < 0.15 * errs[0]  # O(eps) directional error


def test_dg_rotated_state():
    grid = GridSpec(4, 20.0, 200)
    g = NonlinearitySpec(((1.0, 1.2),), 4)
    psi = _positive_profile(grid)
    rng = np.random.default_rng(2)
    beta = RadialField(grid, rng.standard_normal(grid.m)
                       + 1j * rng.standard_normal(grid.m))
    th = 0.7
    rotated = dg_apply(g, psi, beta, theta=th).values
    plain = dg_apply(g, psi, RadialField(grid, np.exp(-1j * th) * beta.values)).values
    assert np.allclose(rotated, np.exp(1j * th) * plain, rtol=1e-13)


def test_f2_closure_identity():
    grid = GridSpec(4, 20.0, 300)
    g = NonlinearitySpec(((1.0, 1.2), (-0.4, 1.8)), 4)
    psi = _positive_profile(grid)
    rng = np.random.default_rng(3)
    r = RadialField(grid, 0.3 * (rng.standard_normal(grid.m)
                                 + 1j * rng.standard_normal(grid.m)))
    total = (f2_apply(g, psi, r).values + dg_apply(g, psi, r).values
             + g.apply(psi.values.real))
    direct = g.apply(psi.values.real + r.values)
    assert np.max(np.abs(total - direct)) < 1e-14


def test_f2_zero_perturbation():
    grid = GridSpec(4, 20.0, 64)
    g = NonlinearitySpec(((1.0, 1.2),), 4)
    out = f2_apply(g, _positive_profile(grid), RadialField.zeros(grid))
    assert lp_norm(out, 2) == 0.0


def test_f2_superlinear_smallness():
    grid = GridSpec(4, 20.0, 300)
    alpha1 = 0.9
    g = NonlinearitySpec(((1.0, alpha1),), 4)
    psi = _positive_profile(grid)
    rng = np.random.default_rng(4)
    r = RadialField(grid, (rng.standard_normal(grid.m)
                           + 1j * rng.standard_normal(grid.m))
                    * np.exp(-grid.r ** 2 / 9))
    ratios = []
    for eps in (0.1, 0.05, 0.025, 0.0125):
        scaled = RadialField(grid, eps * r.values)
        ratios.append(lp_norm(f2_apply(g, psi, scaled), 2) / eps)
    drop = 2.0 ** min(alpha1, 1.0)
    for a, b in zip(ratios, ratios[1:]):
        assert b < a / (drop * 0.9)
    assert ratios[-1] < 0.2 * ratios[0]


def test_f2_difference_bound_calibrated_then_holds_on_refinement():
    g = NonlinearitySpec(((1.0, 0.9), (0.5, 1.9)), 4)
    coarse = GridSpec(4, 20.0, 200)
    psi_c = _positive_profile(coarse)
    c_cal = calibrate_f2_constant(g, psi_c, samples=24, scale=0.5, seed=7)
    fine = GridSpec(4, 20.0, 400)
    psi_f = _positive_profile(fine)
    rng = np.random.default_rng(8)
    for _ in range(24):
        u1 = 0.5 * (rng.standard_normal(fine.m) + 1j * rng.standard_normal(fine.m))
        u2 = 0.5 * (rng.standard_normal(fine.m) + 1j * rng.standard_normal(fine.m))
        lhs = np.abs(f2_apply(g, psi_f, RadialField(fine, u1)).values
                     - f2_apply(g, psi_f, RadialField(fine, u2)).values)
        env = f2_difference_envelope(g, psi_f, u1, u2)
        ok = env > 1e-12
        assert np.all(lhs[ok] <= c_cal * env[ok] + 1e-12)


def test_f2_envelope_cross_terms_only_above_one():
    grid = GridSpec(4, 20.0, 64)
    psi = _positive_profile(grid)
    u1 = np.full(grid.m, 0.1 + 0.0j)
    u2 = np.zeros(grid.m, dtype=complex)
    g_low = NonlinearitySpec(((1.0, 0.9),), 4)
    env_low = f2_difference_envelope(g_low, psi, u1, u2)
    # alpha <= 1: only the |u|^alpha |u1-u2| terms appear (twice, since a
    # single power plays both the low and high role)
    expected = 2 * (np.abs(u1) ** 0.9) * np.abs(u1)
    assert np.allclose(env_low, expected)
    g_high = NonlinearitySpec(((1.0, 0.9), (1.0, 1.9)), 4)
    env_high = f2_difference_envelope(g_high, psi, u1, u2)
    # alpha2 > 1 adds exactly the |psi|^{alpha2 - 1}(|u1|+|u2|)|u1-u2| term
    p = psi.values.real
    manual = (np.abs(u1) ** 0.9 + np.abs(u1) ** 1.9) * np.abs(u1) \
        + p ** 0.9 * np.abs(u1) * np.abs(u1)
    assert np.allclose(env_high, manual)


def test_check_h2_prime_linear_stub():
    # alpha = 0 stub (outside the admissible range): g' is constant, all
    # derivative norms of g'(psi) vanish identically
    grid = GridSpec(4, 30.0, 400)
    g = NonlinearitySpec(((1.0, 0.0),), 4, check_bounds=False)
    psi = _positive_profile(grid)
    rep = check_h2_prime(g, psi)
    assert rep.finite
    assert rep.norms_gprime["grad_l2"] == pytest.approx(0.0, abs=1e-12)
    assert rep.norms_gprime["lap_l2"] == pytest.approx(0.0, abs=1e-9)
    assert rep.norms_gprime["d3_l2"] == pytest.approx(0.0, abs=1e-9)


def test_check_h2_prime_rough_power(spectral4):
    # the non-C^2-at-zero example power 5/6 on a computed bound state
    g = NonlinearitySpec(((1.0, 5.0 / 6.0),), 4)
    rep = check_h2_prime(g, spectral4.psi0)
    assert rep.finite
    for norms in (rep.norms_gprime, rep.norms_slope):
        for v in norms.values():
            assert np.isfinite(v) and v >= 0


def test_check_h2_prime_refinement_stable():
    from radnls.hamiltonian import PotentialSpec, solve_ground_eigenpair
    g = NonlinearitySpec(((1.0, 5.0 / 6.0),), 4)
    pot = PotentialSpec("gaussian_well", 5.0, 1.5)
    vals = []
    for m in (600, 1200):
        sd = solve_ground_eigenpair(pot, GridSpec(4, 60.0, m))
        rep = check_h2_prime(g, sd.psi0)
        vals.append(rep.norms_gprime)
    for key in ("l2", "grad_l2", "lap_l2", "d3_l2"):
        a, b = vals[0][key], vals[1][key]
        assert abs(a - b) <= 0.05 * max(a, b)
