import numpy as np
import pytest

from radnls.errors import (BranchRangeError, ContinuationError,
                           InvalidExponentError)
from radnls.grid import RadialField, inner_product, lp_norm
from radnls.manifold import BoundStateBranch, continue_branch
from radnls.nonlinearity import NonlinearitySpec


def test_trivial_node(branch4, spectral4):
    p0 = branch4.point(0)
    assert p0.a == 0.0
    assert p0.e == spectral4.e0
    assert lp_norm(p0.psi, 2) == 0.0


def test_node_invariants(branch4, spectral4):
    psi0 = spectral4.psi0
    for i in (1, len(branch4) // 2, len(branch4) - 1):
        pt = branch4.point(i)
        assert abs(inner_product(psi0, pt.h)) < 1e-10
        assert inner_product(psi0, pt.psi).real == pytest.approx(pt.a, abs=1e-10)
        assert np.all(pt.psi.values.real > 0)
        assert pt.newton_residual < 1e-10
        assert branch4.pde_residual(pt.psi, pt.e) < 1e-10


def test_energy_shift_sign_tracks_nonlinearity(branch4, focusing_branch4, spectral4):
    # defocusing (lam > 0) raises E along the branch; focusing lowers it
    assert branch4.e_nodes[-1] > spectral4.e0
    assert focusing_branch4.e_nodes[-1] < spectral4.e0


def test_h_vanishes_superlinearly(branch4):
    n = len(branch4) - 1
    ratio_full = lp_norm(branch4.point(n).h, 2) / branch4.a_nodes[n]
    k = max(1, n // 8)
    ratio_eighth = lp_norm(branch4.point(k).h, 2) / branch4.a_nodes[k]
    assert ratio_eighth < 0.5 * ratio_full


def test_eval_at_node_exact(branch4):
    i = len(branch4) // 2
    psi, e = branch4.eval(branch4.a_nodes[i])
    assert np.allclose(psi.values.real, branch4.psi_nodes[i], atol=1e-14)
    assert e == pytest.approx(branch4.e_nodes[i], abs=1e-14)


def test_eval_gauge_equivariance(branch4):
    a = 0.37 * np.exp(1.1j)
    psi_rot, e_rot = branch4.eval(a)
    psi_plain, e_plain = branch4.eval(abs(a))
    assert e_rot == e_plain
    assert np.allclose(psi_rot.values,
                       np.exp(1.1j) * psi_plain.values, atol=1e-12)


def test_energy_depends_on_modulus_only(branch4):
    _, e_pos = branch4.eval(0.3)
    _, e_neg = branch4.eval(-0.3)
    assert e_pos == e_neg


def test_eval_out_of_range(branch4):
    with pytest.raises(BranchRangeError):
        branch4.eval(branch4.extent * 1.5)


def test_interpolated_pde_residual(branch4):
    rng = np.random.default_rng(4)
    worst = 0.0
    for a in rng.uniform(0.0, branch4.extent, 20):
        psi, e = branch4.eval(a)
        worst = max(worst, branch4.pde_residual(psi, e))
    assert worst < 1e-9   # 10x the node tolerance


def test_dh_gauge_direction_exact(branch4):
    a = 0.3
    res = branch4.dh_apply(a, 1j * a)
    hval = branch4.h_values(a)
    assert np.allclose(res.field.values, 1j * hval, atol=1e-13)
    assert not res.degenerate


def test_dh_zero_amplitude_degenerate(branch4):
    res = branch4.dh_apply(0.0, 1.0)
    assert res.degenerate
    assert lp_norm(res.field, 2) == 0.0


def test_dh_endpoint_flag(branch4):
    res = branch4.dh_apply(branch4.extent, 1.0)
    assert res.one_sided


def test_dh_matches_finite_difference(branch4):
    a, eps = 0.3, 1e-4
    lin = branch4.dh_apply(a, 1.0).field.values
    fd = (branch4.h_values(a + eps) - branch4.h_values(a - eps)) / (2 * eps)
    err = lp_norm(RadialField(branch4.grid, fd - lin), 2)
    assert err < 1e-6


def test_dh_complex_rotation_consistency(branch4):
    a = 0.3 * np.exp(0.6j)
    delta = 0.2 - 0.1j
    res = branch4.dh_apply(a, delta)
    plain = branch4.dh_apply(abs(a), np.exp(-0.6j) * delta)
    assert np.allclose(res.field.values,
                       np.exp(0.6j) * plain.field.values, atol=1e-13)


def test_exponential_decay_constants(branch4):
    i = len(branch4) // 2
    e_val = branch4.e_nodes[i]
    rep = branch4.check_exponential_decay(i, rate=-e_val / 2)
    assert rep["ok"]
    assert rep["c_upper"] >= 1.0
    assert rep["c_lower"] > 0.0
    with pytest.raises(InvalidExponentError):
        branch4.check_exponential_decay(i, rate=-2 * e_val)


def test_exponential_decay_rate_to_zero_limit(branch4):
    i = len(branch4) // 2
    c_small = branch4.check_exponential_decay(i, rate=1e-8)["c_upper"]
    assert c_small == pytest.approx(1.0, rel=1e-3)


def test_smallness_measure(branch4):
    assert branch4.check_smallness(0, sigma=2.5) == 0.0
    vals = [branch4.check_smallness(i, sigma=2.5)
            for i in (1, len(branch4) // 2, len(branch4) - 1)]
    assert vals[0] < vals[1] < vals[2]
    sup = branch4.check_smallness(len(branch4) - 1, sigma=0.0)
    assert sup == pytest.approx(lp_norm(branch4.point(len(branch4) - 1).psi,
                                        np.inf))


def test_c1_sampling_stability(branch4):
    # E(a) and ||h(a)||_2 admit difference quotients stable under halving the
    # sampling step (the branch is C^1 in a away from 0)
    a = branch4.a_nodes
    e = branch4.e_nodes
    hn = np.array([lp_norm(branch4.point(i).h, 2) for i in range(len(branch4))])
    idx = np.arange(4, len(branch4) - 4, 4)
    for series in (e, hn):
        d1 = (series[idx + 1] - series[idx - 1]) / (a[idx + 1] - a[idx - 1])
        d2 = (series[idx + 2] - series[idx - 2]) / (a[idx + 2] - a[idx - 2])
        scale = max(1.0, np.max(np.abs(d1)))
        assert np.max(np.abs(d1 - d2)) < 1e-2 * scale


def test_branch_roundtrip(tmp_path, branch4):
    path = tmp_path / "branch.npz"
    branch4.save(path)
    loaded = BoundStateBranch.load(path)
    assert np.array_equal(loaded.a_nodes, branch4.a_nodes)
    assert np.array_equal(loaded.psi_nodes, branch4.psi_nodes)
    assert loaded.g.terms == branch4.g.terms
    psi_a, e_a = loaded.eval(0.21)
    psi_b, e_b = branch4.eval(0.21)
    assert e_a == e_b
    assert np.array_equal(psi_a.values, psi_b.values)


def test_branch_load_validates(tmp_path, branch4):
    path = tmp_path / "branch.npz"
    branch4.save(path)
    import numpy as np_
    with np_.load(path) as z:
        data = dict(z)
    data["a"] = data["a"] + 0.01   # break <psi0, psi> = a
    np_.savez(path, **data)
    with pytest.raises(ContinuationError):
        BoundStateBranch.load(path)


def test_continuation_failure_reports_last_good(spectral4):
    wild = NonlinearitySpec(((-60.0, 1.2),), 4)
    with pytest.raises((ContinuationError, Exception)) as err:
        continue_branch(spectral4, wild, a_max=2.5, steps=12, max_iter=6)
    if isinstance(err.value, ContinuationError):
        assert err.value.last_good_a is not None
