import json
import math

import numpy as np
import pytest

import superlens as sl


def test_ideal_lens_scaling_is_flat():
    cfg = sl.PhysicalConfig()
    cfg.rho = cfg.kappa = -1.0
    cfg.b = 2 * cfg.a
    for n in [(0, 0), (3, -2), (12, 12)]:
        assert abs(abs(sl.scaling_factor(n, cfg)) * 2 * cfg.omega - 1) < 1e-12


def test_pivotal_identity():
    cfg = sl.PhysicalConfig()
    g = 0.3 - 0.2j
    u1 = sl.first_order_top((2, 1), g, cfg)
    assert abs(sl.scaling_factor((2, 1), cfg) * u1 - g) < 1e-12


def test_linear_round_trip():
    cfg = sl.PhysicalConfig()
    I = 21
    g = sl.profile_spectrum(sl.profile1(), I // 2, 63)
    data = sl.synthesize(sl.synthesize_linear_data(g, cfg), I // 2, I, I)
    rc = sl.recon_coefficients(sl.dft2(data), cfg)
    c = I // 2
    window = slice(c - 3, c + 4)
    np.testing.assert_allclose(rc.f_delta[window, window], cfg.epsilon * g[window, window], atol=1e-10 * cfg.epsilon)
    x = np.arange(I) / I
    truth = np.array([[cfg.epsilon * sl.profile1()(a, b) for b in x] for a in x])
    np.testing.assert_allclose(rc.reconstruct(3, I, I).real, truth, atol=1e-10 * cfg.epsilon)


def test_forward_flat_surface():
    cfg = sl.PhysicalConfig()
    d = sl.Discretization()
    d.I, d.N_f, d.M = 9, 2, 64
    sol = sl.solve_forward(sl.SurfaceProfile.flat(), cfg, d)
    assert sol.top.shape == (5, 5)
    assert abs(sol.top[2, 2] - sl.u0_top(cfg)) < 1e-8
    assert np.abs(sol.top_field - sl.u0_top(cfg)).max() < 1e-8


def test_noise_and_snr():
    u = np.full((15, 15), 0.01 + 0.0j)
    m = sl.add_noise(u, 0.005, 7)
    again = sl.add_noise(u, 0.005, 7)
    assert np.array_equal(m.delta, again.delta)
    assert math.isclose(m.snr, sl.snr_of(u, m.delta))
    assert math.isclose(sl.add_noise_at_snr(u, 9.3, 1).snr, 9.3, rel_tol=1e-12)
    with pytest.raises(sl.ZeroNoise):
        sl.snr_of(u, np.zeros_like(u))


def test_cutoff_and_errors():
    assert sl.choose_cutoff([5.0, 3.0, 2.0, 0.5, 0.0], 1.0, 1.0) == (3, True)
    with pytest.raises(sl.InvalidConfig):
        sl.resolve_config({"not_a_key": "1"})
    assert issubclass(sl.InvalidConfig, sl.InvariantError)
    assert issubclass(sl.NoConvergence, sl.NumericalError)
    cfg = sl.PhysicalConfig()
    cfg.epsilon = 0.5
    with pytest.raises(sl.ProfileTooTall):
        sl.solve_forward(sl.profile1(), cfg, sl.Discretization.fast())


def test_noise_stats_command(tmp_path):
    out = json.loads(sl.cmd_noise_stats(0.01, 3, 11, 150, str(tmp_path / "ns")))
    assert out["modes"] == 121
    assert (tmp_path / "ns" / "noise_stats.csv").exists()
