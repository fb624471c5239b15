import numpy as np
import pytest

from tiltcell.analytic_rates import cst_conditional_rate, nmt_conditional_rate
from tiltcell.antenna import AntennaPattern
from tiltcell.channel import path_gain_table, power_from_edge_snr
from tiltcell.geometry import NetworkLayout
from tiltcell.montecarlo import ergodic_rate_mc, sinr_cst, sinr_nmt


@pytest.fixture(scope="module")
def layout():
    return NetworkLayout.make()


@pytest.fixture(scope="module")
def iso():
    return AntennaPattern(isotropic=True)


def test_sinr_cst_hand_built_realization():
    # axis-aligned two-cell toy: every product reduces to one coordinate
    h_rows = np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex)
    err_row = np.array([0.5, 0.5], dtype=complex)
    w0 = np.eye(2, dtype=complex)
    w1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sinr = sinr_cst(h_rows, err_row, np.array([0.1, 0.01]),
                    [w0, w1], [np.array([4.0, 9.0]), np.array([1.0, 2.0])],
                    serving=0, k_index=0)
    # sig = 0.1*4*1, mri = 0.1*(9*0.25), ici = 0.01*(1*4 + 2*0)
    assert sinr == pytest.approx(0.4 / (1.0 + 0.225 + 0.04), rel=1e-12)


def test_sinr_nmt_hand_built_realization():
    h = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    err = np.array([0.0, 0.5, 0.0, 0.0], dtype=complex)
    w = np.zeros((4, 2), dtype=complex)
    w[0, 0] = 1.0
    w[1, 1] = 1.0
    sinr = sinr_nmt(h, err, w, np.array([4.0, 1.0]), k_index=0)
    # sig = 4*1, mri = 1*0.25
    assert sinr == pytest.approx(4.0 / 1.25, rel=1e-12)


def test_ergodic_rate_mc_validation(layout, iso):
    with pytest.raises(ValueError):
        ergodic_rate_mc("bad", [50.0, 0.0], layout, iso, 0.0, 10, 1, 0)
    with pytest.raises(ValueError):
        ergodic_rate_mc("cst", [50.0, 0.0], layout, iso, 0.0, 0, 1, 0)
    with pytest.raises(ValueError):
        ergodic_rate_mc("cst", [50.0, 0.0], layout, iso, 0.0, 10, 1, 0,
                        users_per_cell=9, n_t=8)


def test_ergodic_rate_mc_reproducible(layout, iso):
    kw = dict(n_fadings=50, n_drops=2, seed=(42, 7), users_per_cell=3)
    a = ergodic_rate_mc("cst", [80.0, 10.0], layout, iso, 0.0, **kw)
    b = ergodic_rate_mc("cst", [80.0, 10.0], layout, iso, 0.0, **kw)
    assert a == b
    c = ergodic_rate_mc("cst", [80.0, 10.0], layout, iso, 0.0, n_fadings=50,
                        n_drops=2, seed=(42, 8), users_per_cell=3)
    assert c.mean != a.mean
    assert a.stderr is not None and a.stderr > 0.0
    assert (a.n_fadings, a.n_drops) == (50, 2)


def test_ergodic_rate_mc_stderr_scaling(layout, iso):
    small = ergodic_rate_mc("cst", [70.0, -20.0], layout, iso, 0.0, 500, 1,
                            seed=1, users_per_cell=4)
    big = ergodic_rate_mc("cst", [70.0, -20.0], layout, iso, 0.0, 8000, 1,
                          seed=1, users_per_cell=4)
    assert big.stderr == pytest.approx(small.stderr / 4.0, rel=0.4)


def test_cst_mc_matches_exact_single_user_model(layout, iso):
    """With one user per cell every Gamma term of the closed form is exact
    (no own-cell leakage, exponential cross-cell quadratic forms), so the
    two routes must agree within Monte Carlo noise."""
    power = power_from_edge_snr(layout)
    point = np.array([88.0, 12.0])
    est = ergodic_rate_mc("cst", point, layout, iso, 0.0, 6000, 1, seed=3,
                          users_per_cell=1, power=power)
    alpha = path_gain_table(point, layout, 0.0, iso)[0]
    want = cst_conditional_rate(alpha, np.ones(3, dtype=int), 0, 8, power)
    assert est.mean == pytest.approx(want, rel=0.03)


def test_nmt_mc_close_to_gamma_model(layout, iso):
    power = power_from_edge_snr(layout)
    point = np.array([60.0, 25.0])
    est = ergodic_rate_mc("nmt", point, layout, iso, 0.0, 1500, 10, seed=4,
                          users_per_cell=1, power=power)
    alpha = path_gain_table(point, layout, 0.0, iso)[0]
    want = nmt_conditional_rate(alpha, 3, 8, power)
    assert est.mean == pytest.approx(want, rel=0.10)
