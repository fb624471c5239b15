import numpy as np
import pytest

from tiltcell.antenna import AntennaPattern, gain_dbi, gain_linear, wrap_angle


def test_wrap_angle():
    np.testing.assert_allclose(wrap_angle([190.0, -190.0, 360.0, 180.0,
                                           -180.0, 0.0]),
                               [-170.0, 170.0, 0.0, 180.0, 180.0, 0.0])


def test_boresight_gain_is_zero_dbi():
    assert gain_dbi(120.0, 120.0, 7.0, 7.0) == 0.0


def test_half_beamwidth_is_3db():
    p = AntennaPattern()
    assert gain_dbi(p.phi_3db / 2.0, 0.0, 5.0, 5.0) == pytest.approx(-3.0)
    assert gain_dbi(0.0, 0.0, 5.0 + p.theta_3db / 2.0, 5.0) == \
        pytest.approx(-3.0)


def test_sidelobe_floors():
    # far off boresight both attenuations clip
    assert gain_dbi(180.0, 0.0, 90.0, 5.0) == pytest.approx(-45.0)
    # vertical-only clip: theta 20 deg past the tilt
    assert gain_dbi(0.0, 0.0, 25.0, 5.0) == pytest.approx(-20.0)


def test_matches_direct_formula():
    rng = np.random.default_rng(2)
    p = AntennaPattern()
    phi = rng.uniform(-180.0, 180.0, 300)
    psi = rng.uniform(0.0, 360.0, 300)
    theta = rng.uniform(0.0, 90.0, 300)
    beta = rng.uniform(0.0, 45.0, 300)
    d = np.mod(phi - psi + 180.0, 360.0) - 180.0
    d = np.where(d == -180.0, 180.0, d)
    want = -(np.minimum(12.0 * (d / 65.0) ** 2, 25.0)
             + np.minimum(12.0 * ((theta - beta) / 6.0) ** 2, 20.0))
    np.testing.assert_allclose(gain_dbi(phi, psi, theta, beta, p), want,
                               atol=1e-12)


def test_azimuth_symmetry():
    off = np.linspace(0.0, 180.0, 50)
    np.testing.assert_allclose(gain_dbi(30.0 + off, 30.0, 9.0, 9.0),
                               gain_dbi(30.0 - off, 30.0, 9.0, 9.0),
                               atol=1e-12)


def test_isotropic_pattern():
    p = AntennaPattern(isotropic=True)
    g = gain_dbi(np.array([0.0, 90.0]), 45.0, np.array([10.0, 80.0]), 5.0, p)
    np.testing.assert_array_equal(g, 0.0)
    assert g.shape == (2,)
    np.testing.assert_array_equal(
        gain_linear(123.0, 0.0, 44.0, 1.0, p), 1.0)


def test_gain_linear_is_db_conversion():
    g_db = gain_dbi(40.0, 0.0, 12.0, 4.0)
    assert gain_linear(40.0, 0.0, 12.0, 4.0) == pytest.approx(
        10.0 ** (g_db / 10.0), rel=1e-14)


def test_pattern_validation():
    with pytest.raises(ValueError):
        AntennaPattern(phi_3db=0.0)
    with pytest.raises(ValueError):
        AntennaPattern(sll_el_db=-1.0)
    # isotropic patterns skip the geometry checks
    AntennaPattern(phi_3db=0.0, isotropic=True)
