from dataclasses import replace

import numpy as np
import pytest

from arma_predict._numerics import opnorm
from arma_predict.errors import NeumannDiverged
from arma_predict.model import PoleData, check_condition_C
from arma_predict.oracle import durbin_levinson
from arma_predict.pipeline import oracle_phi, predict, prepare
from arma_predict.predictor import (
    ar_table,
    g_matrices,
    neumann_diagnostics,
    phi_all,
    phi_diff_all,
    xi_sweeps,
)
from arma_predict.blocks import v_vectors


def test_ma1_g_value(ma1):
    G, Gt = g_matrices(ma1.bb, 1)
    np.testing.assert_allclose(G, [[-0.25]], atol=1e-12)
    np.testing.assert_allclose(Gt, [[-0.25]], atol=1e-12)


def test_ma1_one_step(ma1):
    np.testing.assert_allclose(phi_all(ma1.bb, 1).phi[0], [[0.4]], atol=1e-14)


def test_ma1_exact_formula(ma1):
    b, n = 0.5, 3
    j = np.arange(1, n + 1)
    exact = -((-b) ** j) * (1 - b ** (2 * (n + 1 - j))) / (1 - b ** (2 * (n + 1)))
    np.testing.assert_allclose(phi_all(ma1.bb, n).phi[:, 0, 0], exact, atol=1e-14)
    np.testing.assert_allclose(phi_all(ma1.bb, n).phi, oracle_phi(ma1, n), atol=1e-10)


def test_example_against_oracle(bivariate):
    n = 10
    diff = opnorm(phi_all(bivariate.bb, n).phi - oracle_phi(bivariate, n))
    assert diff.max() <= 1e-8


def test_correction_without_subtraction(ma1):
    n = 20
    corr = phi_diff_all(ma1.bb, n)
    tab = phi_all(ma1.bb, n)
    ref = oracle_phi(ma1, n)
    assert abs(opnorm(corr).sum() - opnorm(ref - tab.phi_inf).sum()) <= 1e-9
    np.testing.assert_array_equal(tab.phi_inf + corr, tab.phi)


def test_sweeps_match_direct_vectors(models):
    m = models["random_1"]
    n = 7
    V, Vt = xi_sweeps(m.bb, n)
    for j in (1, 2, 7):
        v, vt = v_vectors(m.pd, m.pd_sharp, j)
        np.testing.assert_allclose(V[j - 1], v, atol=1e-13)
        np.testing.assert_allclose(Vt[j - 1], vt, atol=1e-13)


def test_g_norm_decays(bivariate):
    norms = [np.linalg.norm(g_matrices(bivariate.bb, n)[0], 2) for n in (10, 20, 40)]
    assert norms[0] > norms[1] > norms[2]


def test_neumann_diagnostics(models):
    for m in models.values():
        if m.bb is None:
            continue
        for n in (max(m.pd.m0, 1), 5, 40):
            nd = neumann_diagnostics(m.bb, n)
            r = nd.spectral_radius
            assert r < 1
            assert nd.partial_sum_error <= max(r ** 31 / (1 - r) * nd.condition, 1e-15) * 10


def test_half_horizon_consistency(bivariate):
    errs = []
    for n in (8, 16, 32):
        tab = phi_all(bivariate.bb, n)
        j = n // 2
        errs.append(np.linalg.norm(tab.phi[j - 1] - tab.phi_inf[j - 1], 2))
    assert errs[0] > errs[1] > errs[2]


def test_horizon_below_range_rejected(arma_m0):
    with pytest.raises(ValueError):
        phi_all(arma_m0.bb, 0)


def test_corrupted_blocks_diverge(bivariate):
    bad = replace(bivariate.bb, Theta=50 * bivariate.bb.Theta)
    with pytest.raises(NeumannDiverged):
        phi_all(bad, 1)


def test_timings_recorded(ma1):
    tab = phi_all(ma1.bb, 50)
    assert {"setup", "sweep", "assemble", "total"} <= set(tab.timings)
    assert tab.method == "closed-form"


def test_ar_model_exact(models):
    m = models["ar1"]
    tab = predict(m, 5)
    assert tab.method == "ar-exact"
    expected = np.zeros((5, 1, 1))
    expected[0] = 0.5
    np.testing.assert_allclose(tab.phi, expected, atol=1e-14)
    np.testing.assert_allclose(tab.phi, oracle_phi(m, 5), atol=1e-12)


def test_ar_table_needs_horizon():
    pd = PoleData([], -np.eye(1), (), np.array([[[0.3]], [[0.1]]]))
    with pytest.raises(ValueError):
        ar_table(pd, 1)


def test_fallback_below_polynomial_degree():
    pd = PoleData([0.5], -np.eye(1), (np.array([[[0.2]]]),), np.array([[[0.1]], [[0.05]]]))
    assert check_condition_C(pd).passed
    m = prepare(pd)
    assert m.pd.m0 == 2
    low = predict(m, 1)
    assert low.method == "durbin-levinson-fallback"
    np.testing.assert_allclose(low.phi, durbin_levinson(m.gamma(1), 1), atol=1e-15)
    for n in (2, 3, 30):
        tab = predict(m, n)
        assert tab.method == "closed-form"
        np.testing.assert_allclose(tab.phi, oracle_phi(m, n), atol=1e-10)


def test_bad_horizon(ma1):
    with pytest.raises(ValueError):
        predict(ma1, 0)
