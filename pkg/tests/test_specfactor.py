import numpy as np
import pytest

from arma_predict import battery
from arma_predict._numerics import opnorm
from arma_predict.errors import GridTooCoarse, NoConvergence, ResidualTooLarge
from arma_predict.model import PoleData, check_condition_C, decompose_inverse
from arma_predict.specfactor import (
    circle_grid,
    extract_sharp_poledata,
    factorize_sharp,
    sharp_from_poledata,
    verify_pole_correspondence,
    wilson,
)


def _ct(a):
    return np.conj(np.swapaxes(a, -1, -2))


def test_univariate_factor_is_h():
    h = battery.ma1(0.5)
    sf = factorize_sharp(h, 256)
    assert sf.identical_to_h
    np.testing.assert_array_equal(sf.samples, h(circle_grid(256)))


def test_univariate_poledata_equals_h_data(ma1):
    np.testing.assert_allclose(ma1.pd_sharp.poles, ma1.pd.poles, atol=1e-14)
    np.testing.assert_allclose(ma1.pd_sharp.rho[0], ma1.pd.rho[0], atol=1e-12)
    np.testing.assert_allclose(ma1.pd_sharp.rho0, ma1.pd.rho0, atol=1e-12)


def test_example_factor_reproduces_density(bivariate):
    z = circle_grid(512)
    hz = bivariate.h(z)
    w = hz @ _ct(hz)
    hs = bivariate.pd_sharp.inverse(z)
    assert np.max(opnorm(_ct(hs) @ hs - w)) <= 1e-9


def test_example_factor_matches_closed_form_up_to_unitary(bivariate):
    z = np.array([0.0, 0.3, -0.5j, 0.7 + 0.1j, np.exp(0.4j)])
    closed = battery.lower_triangular_sharp(0.4)(z)
    ours = bivariate.pd_sharp.inverse(z)
    u = ours @ np.linalg.inv(closed)
    np.testing.assert_allclose(u, np.broadcast_to(u[0], u.shape), atol=1e-10)
    np.testing.assert_allclose(u[0] @ u[0].conj().T, np.eye(2), atol=1e-10)


def test_example_sharp_residue_norm(bivariate):
    p = 0.4
    r = 1 / np.sqrt(1 - p**2 + p**4)
    expected = r * np.hypot(1.0, 1 - p**2)
    assert abs(opnorm(bivariate.pd_sharp.rho[0][0]) - expected) <= 1e-8


def test_gauge_makes_value_at_zero_positive(models):
    for name in ("lower_triangular", "random_2", "random_4"):
        h0 = models[name].sf.taylor[0]
        np.testing.assert_allclose(h0, h0.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(0.5 * (h0 + h0.conj().T))) > 0


def test_sharp_factor_is_outer(models):
    for m in models.values():
        assert check_condition_C(m.pd_sharp, tol=1e-3).passed, m.name


def test_fit_residuals_small(models):
    for m in models.values():
        if m.d > 1:
            assert m.sf.fit_residual <= 1e-9, m.name


def test_wilson_iteration_limit():
    h = battery.lower_triangular(0.4)
    z = circle_grid(256)
    hz = h(z)
    with pytest.raises(NoConvergence):
        wilson(hz @ _ct(hz), tol=1e-14, max_iter=1)


def test_coarse_grid_detected():
    with pytest.raises(GridTooCoarse):
        factorize_sharp(battery.lower_triangular(0.97), 1024)


def test_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        factorize_sharp(battery.lower_triangular(0.4), 1000)


def test_wrong_pole_structure_rejected(bivariate):
    sf = factorize_sharp(battery.lower_triangular(0.4), 1024)
    wrong = PoleData([0.7], -np.eye(2), (np.array([[[0, 0], [1, 0]]]),))
    with pytest.raises(ResidualTooLarge):
        extract_sharp_poledata(sf, wrong)


def test_supplied_sharp_data_checked(bivariate):
    h = battery.lower_triangular(0.4)
    sf = sharp_from_poledata(h, bivariate.pd_sharp)
    assert sf.residual <= 1e-12
    with pytest.raises(ResidualTooLarge):
        sharp_from_poledata(h, bivariate.pd)


def test_correspondence_example(bivariate):
    rep = verify_pole_correspondence(bivariate.h, bivariate.sf, bivariate.pd, bivariate.pd_sharp)
    assert rep.residuals[1] <= 1e-8
    assert rep.passed


def test_correspondence_univariate(ma1):
    rep = verify_pole_correspondence(ma1.h, ma1.sf, ma1.pd, ma1.pd_sharp)
    assert rep.max_residual <= 1e-14


def test_correspondence_polynomial_part(arma_m0):
    rep = verify_pole_correspondence(arma_m0.h, arma_m0.sf, arma_m0.pd, arma_m0.pd_sharp)
    assert 0 in rep.residuals
    assert rep.residuals[0] <= 1e-8


def test_polynomial_part_bivariate():
    # h^{-1} = -rho0 - rho/(1 - conj(p) z) - z rho01 with m0 = 1, d = 2
    pd = PoleData([0.5], -np.eye(2), (np.array([[[0.2, 0.1], [0.0, 0.3]]]),),
                  np.array([[[0.3, 0.0], [0.1, -0.2]]]))
    assert check_condition_C(pd).passed
    pd = decompose_inverse(pd)
    sf = extract_sharp_poledata(factorize_sharp(pd, 1024), pd)
    assert sf.poledata.m0 == 1
    rep = verify_pole_correspondence(pd, sf, pd, sf.poledata)
    assert rep.passed, rep.residuals
