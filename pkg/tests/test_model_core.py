import numpy as np
import pytest

from arma_predict import battery
from arma_predict._numerics import opnorm
from arma_predict.errors import NearPole, NotStable, SingularSigma, TailNotConverged
from arma_predict.model import (
    PoleData,
    RationalMatrixFunction,
    ar_coefficients,
    autocovariance,
    autocovariances,
    check_condition_C,
    decompose_inverse,
    evaluate,
    from_arma_polynomials,
    series_coefficients,
    taylor_rational,
    transfer_inverse,
)
from arma_predict.specfactor import circle_grid


def test_identity_phi_gives_psi():
    h = from_arma_polynomials([[[1.0]]], [[[1.0]], [[0.5]]], [[1.0]])
    z = np.array([0.3, -0.7j, 0.1 + 0.2j])
    np.testing.assert_allclose(h(z)[:, 0, 0], 1 + 0.5 * z, atol=1e-15)


def test_arma_quotient_matches_division():
    h = from_arma_polynomials([[[1.0]], [[-0.3]]], [[[1.0]], [[0.5]]], [[1.0]])
    z = np.array([0.0, 0.5, -0.9, 0.4j, 0.2 - 0.6j])
    np.testing.assert_allclose(h(z)[:, 0, 0], (1 + 0.5 * z) / (1 - 0.3 * z), rtol=1e-14)


def test_unstable_ar_polynomial_rejected():
    # det Phi(0.9) = 0
    with pytest.raises(NotStable):
        from_arma_polynomials([[[1.0]], [[-1 / 0.9]]], [[[1.0]]], [[1.0]])


def test_singular_sigma_rejected():
    with pytest.raises(SingularSigma):
        from_arma_polynomials([np.eye(2)], [np.eye(2)], np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_condition_c_reports():
    assert check_condition_C(battery.ma1(0.5)).passed
    assert check_condition_C(battery.lower_triangular(0.4)).passed
    bad = check_condition_C(RationalMatrixFunction([[[1.0]], [[2.0]]], [1.0]))
    assert not bad.passed
    np.testing.assert_allclose(bad.det_zeros_in_disk, [-0.5], atol=1e-12)
    assert "-0.5" in bad.describe()


def test_decompose_ma1():
    pd = decompose_inverse(battery.ma1(0.5))
    assert (pd.K, pd.m0, pd.mult) == (1, 0, (1,))
    np.testing.assert_allclose(pd.poles, [-0.5], atol=1e-12)
    np.testing.assert_allclose(pd.rho0, [[0.0]], atol=1e-12)
    np.testing.assert_allclose(pd.rho[0], [[[-1.0]]], atol=1e-12)


def test_decompose_lower_triangular():
    pd = decompose_inverse(battery.lower_triangular(0.4))
    assert (pd.K, pd.m0, pd.mult) == (1, 0, (1,))
    np.testing.assert_allclose(pd.poles, [0.4], atol=1e-12)
    np.testing.assert_allclose(pd.rho0, -np.eye(2), atol=1e-12)
    np.testing.assert_allclose(pd.rho[0][0], [[0, 0], [1, 0]], atol=1e-12)


def test_decompose_polynomial_part():
    # h^{-1} = (1 - 0.5 z + 0.06 z^2) / (1 + 0.5 z) = 0.12 z - 1.24 + 2.24 / (1 + 0.5 z)
    pd = decompose_inverse(battery.arma_with_polynomial_part())
    assert (pd.K, pd.m0, pd.mult) == (1, 1, (1,))
    np.testing.assert_allclose(pd.poles, [-0.5], atol=1e-12)
    np.testing.assert_allclose(pd.rho[0][0], [[-2.24]], atol=1e-11)
    np.testing.assert_allclose(pd.rho0, [[1.24]], atol=1e-11)
    np.testing.assert_allclose(pd.rho0j[0], [[-0.12]], atol=1e-11)


def test_decomposition_reproduces_inverse(models):
    z = 0.95 * circle_grid(64)
    for m in models.values():
        exact = transfer_inverse(m.h)(z)
        err = opnorm(m.pd(z) - exact) / opnorm(exact)
        assert err.max() <= 1e-9, m.name


def test_double_pole_recovered():
    pd = PoleData([0.5 + 0.2j], -np.eye(1), (np.array([[[0.3]], [[0.4]]]),))
    out = decompose_inverse(pd)
    assert out.mult == (2,)
    np.testing.assert_allclose(out.rho[0], pd.rho[0], atol=1e-9)


def test_evaluate_values():
    pd = decompose_inverse(battery.ma1(0.5))
    np.testing.assert_allclose(evaluate(pd, 0.0), [[1.0]], atol=1e-14)
    np.testing.assert_allclose(evaluate(battery.ma1(0.5), 1j), [[1 + 0.5j]], atol=1e-15)
    np.testing.assert_allclose(evaluate(battery.lower_triangular(0.4), 0.0), [[1, 0], [1, 1]], atol=1e-14)
    with pytest.raises(NearPole):
        evaluate(pd, -2.0)
    with pytest.raises(NearPole):
        evaluate(battery.ar1(0.5), 2.0)


def test_ma1_ar_coefficients(ma1):
    a = ar_coefficients(ma1.pd, 4)
    np.testing.assert_allclose(a[1:, 0, 0], [0.5, -0.25, 0.125], atol=1e-14)
    np.testing.assert_allclose(ma1.bb.c0, [[1.0]], atol=1e-14)


def test_c0_a0_is_minus_identity(models):
    for m in models.values():
        s = m.series
        np.testing.assert_allclose(s.c[0] @ s.a[0], -np.eye(m.d), atol=1e-12)
        np.testing.assert_allclose(s.ctilde[0] @ s.atilde[0], -np.eye(m.d), atol=1e-12)


def test_closed_form_ar_matches_taylor(models):
    for name in ("ma1", "arma_m0_1", "lower_triangular"):
        m = models[name]
        a = ar_coefficients(m.pd, 60)
        inv = transfer_inverse(m.h)
        # Taylor coefficients of -h^{-1} by FFT on |z| = 0.9
        n = 512
        z = 0.9 * circle_grid(n)
        coef = -np.fft.fft(inv(z), axis=0)[:60] / n / 0.9 ** np.arange(60)[:, None, None]
        np.testing.assert_allclose(a, coef, atol=1e-10)


def test_example_5_form(bivariate):
    pd = bivariate.pd
    a = ar_coefficients(pd, 10)
    for j in range(1, 10):
        np.testing.assert_allclose(a[j], np.conj(pd.poles[0]) ** j * pd.rho[0][0], atol=1e-14)


def test_ma1_autocovariance(ma1):
    g = autocovariances(ma1.series, 3)
    np.testing.assert_allclose(g[:, 0, 0], [1.25, 0.5, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(autocovariance(ma1.series, -1), g[1].conj().T)


def test_autocovariance_matches_quadrature(models):
    n = 4096
    z = circle_grid(n)
    for name in ("lower_triangular", "random_2", "arma_m0_1"):
        m = models[name]
        hz = m.h(z) if isinstance(m.h, RationalMatrixFunction) else m.pd.inverse(z)
        w = hz @ np.conj(np.swapaxes(hz, -1, -2))
        # gamma(k) = int e^{-ik theta} w
        quad = np.fft.fft(w, axis=0) / n
        g = autocovariances(m.series, 20)
        np.testing.assert_allclose(g, quad[:21], atol=1e-10)


def test_short_series_fails_tail_check(ma1):
    s = series_coefficients(battery.ar1(0.95), decompose_inverse(battery.ar1(0.95)),
                            decompose_inverse(battery.ar1(0.95)), N=8)
    with pytest.raises(TailNotConverged):
        autocovariances(s, 4)


def test_taylor_rational_geometric():
    c = taylor_rational(battery.ar1(0.5), 6)
    np.testing.assert_allclose(c[:, 0, 0], 0.5 ** np.arange(6))


def test_tilde_conjugates():
    pd = PoleData([0.3 + 0.4j], np.array([[1.0, 2j], [0, 1]]), (np.array([[[1, 1j], [0, 2]]]),))
    t = pd.tilde()
    np.testing.assert_allclose(t.poles, [0.3 - 0.4j])
    np.testing.assert_allclose(t.rho0, pd.rho0.conj().T)
    np.testing.assert_allclose(t.rho[0][0], pd.rho[0][0].conj().T)
