import numpy as np
import pytest

from tiltcell.antenna import AntennaPattern
from tiltcell.channel import (assemble_network_channel, decompose_mmse,
                              draw_fading, draw_mmse_pair, mmse_variances,
                              path_gain, path_gain_table, pathloss,
                              pathloss_clamp_count, power_from_edge_snr,
                              reset_pathloss_clamp_count)
from tiltcell.geometry import NetworkLayout


@pytest.fixture(scope="module")
def layout():
    return NetworkLayout.make()


def test_pathloss_power_law():
    assert pathloss(1.0) == 1.0
    assert pathloss(10.0) == pytest.approx(10.0 ** -3.76, rel=1e-14)
    assert pathloss(50.0, exponent=2.0, d_ref=5.0) == pytest.approx(1e-2)


def test_pathloss_clamp_counter():
    reset_pathloss_clamp_count()
    base = pathloss_clamp_count()
    assert pathloss(0.2) == 1.0  # clamped to d_ref
    assert pathloss_clamp_count() == base + 1
    pathloss(np.array([0.1, 0.5, 2.0]))
    assert pathloss_clamp_count() == base + 3
    reset_pathloss_clamp_count()
    assert pathloss_clamp_count() == 0


def test_power_from_edge_snr(layout):
    p = power_from_edge_snr(layout)
    d_edge = np.hypot(150.0, 30.5)
    # receive SNR at the far vertex is exactly 10 dB
    assert p * pathloss(d_edge) == pytest.approx(10.0, rel=1e-14)
    assert p == pytest.approx(1641272203.4424657, rel=1e-12)
    assert power_from_edge_snr(layout, edge_snr_db=20.0) == \
        pytest.approx(10.0 * p, rel=1e-14)


def test_path_gain_table_stacks_single_links(layout):
    rng = np.random.default_rng(4)
    pts = rng.uniform(-100.0, 100.0, size=(20, 2))
    pattern = AntennaPattern()
    tilts = np.array([5.0, 10.0, 15.0])
    table = path_gain_table(pts, layout, tilts, pattern)
    assert table.shape == (20, 3)
    for b in range(3):
        np.testing.assert_allclose(
            table[:, b], path_gain(pts, b, layout, tilts[b], pattern),
            rtol=1e-14)
    # scalar tilt broadcasts to all cells
    np.testing.assert_allclose(
        path_gain_table(pts, layout, 7.0, pattern),
        path_gain_table(pts, layout, np.full(3, 7.0), pattern), rtol=1e-15)


def test_path_gain_drops_with_distance_at_boresight(layout):
    # along the boresight ray of BS 0 at matching tilt, farther is weaker
    d = np.linspace(40.0, 150.0, 12)
    pts = np.stack([150.0 - d, np.zeros_like(d)], axis=1)
    tilt = np.degrees(np.arctan2(30.5, 100.0))
    g = path_gain(pts, 0, layout, tilt, AntennaPattern(isotropic=True))
    assert np.all(np.diff(g) < 0.0)


def test_mmse_variances():
    kappa2, sigma2 = mmse_variances(np.array([0.0, 1e-9, 1e-3]), 3, 1e9)
    np.testing.assert_allclose(kappa2 + sigma2, 1.0, rtol=1e-14)
    assert sigma2[0] == 1.0  # no signal, estimate carries nothing
    np.testing.assert_allclose(sigma2[1], 1.0 / (1.0 + 3.0), rtol=1e-12)
    assert sigma2[2] == pytest.approx(1.0 / (1.0 + 3e6), rel=1e-12)


def test_draw_fading_statistics():
    rng = np.random.default_rng(8)
    z = draw_fading(rng, (20000,))
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.03)
    assert np.abs(np.mean(z)) < 0.02
    assert np.abs(np.mean(z ** 2)) < 0.02  # circular symmetry


def test_draw_mmse_pair_variances():
    rng = np.random.default_rng(9)
    alpha, n_bs, power = 2e-7, 3, 1e7
    h_hat, err = draw_mmse_pair(rng, alpha, n_bs, power, (40000,))
    kappa2, sigma2 = mmse_variances(alpha, n_bs, power)
    assert np.mean(np.abs(h_hat) ** 2) == pytest.approx(kappa2, rel=0.03)
    assert np.mean(np.abs(err) ** 2) == pytest.approx(sigma2, rel=0.03)
    assert np.mean(np.abs(h_hat + err) ** 2) == pytest.approx(1.0, rel=0.03)


def test_decompose_mmse_is_exact_split():
    rng = np.random.default_rng(10)
    alpha, n_bs, power = 5e-8, 3, 1e8
    h = draw_fading(rng, (30000,))
    h_hat, err, kappa2, sigma2 = decompose_mmse(h, alpha, n_bs, power, rng)
    np.testing.assert_allclose(h_hat + err, h, rtol=0.0, atol=1e-15)
    assert kappa2 + sigma2 == pytest.approx(1.0, rel=1e-14)
    assert np.mean(np.abs(h_hat) ** 2) == pytest.approx(kappa2, rel=0.03)
    # estimate and error are uncorrelated
    assert np.abs(np.mean(h_hat * err.conj())) < 3.0 / np.sqrt(30000.0)


def test_assemble_network_channel():
    rng = np.random.default_rng(12)
    blocks = draw_fading(rng, (5, 3, 4))
    alpha = np.array([4.0, 1.0, 0.25])
    agg = assemble_network_channel(blocks, alpha)
    assert agg.shape == (5, 12)
    np.testing.assert_allclose(agg[:, :4], 2.0 * blocks[:, 0, :], rtol=1e-15)
    np.testing.assert_allclose(agg[:, 8:], 0.5 * blocks[:, 2, :], rtol=1e-15)
