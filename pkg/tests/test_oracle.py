import json

import numpy as np
import pytest

from arma_predict import battery
from arma_predict._numerics import opnorm
from arma_predict.errors import AssumptionP1MaxViolated, NotPositiveDefinite
from arma_predict.oracle import (
    b_sequences,
    baxter_asymptotics,
    beta_coefficients,
    binomial_sum_lhs,
    binomial_sum_rhs,
    durbin_levinson,
    identity_suite,
    model_checks,
    phi_series,
    rows_to_csv,
    rows_to_json,
    yule_walker_dense,
)
from arma_predict.pipeline import prepare
from arma_predict.predictor import phi_all


def test_durbin_levinson_matches_dense(models):
    for name in ("ma1", "lower_triangular", "random_2", "random_4"):
        m = models[name]
        for n in (1, 7, 50):
            gam = m.gamma(n)
            diff = opnorm(durbin_levinson(gam, n) - yule_walker_dense(gam, n))
            assert diff.max() <= 1e-10, name


def test_durbin_levinson_first_order(bivariate):
    gam = bivariate.gamma(1)
    np.testing.assert_allclose(durbin_levinson(gam, 1)[0], gam[1] @ np.linalg.inv(gam[0]), atol=1e-14)


def test_durbin_levinson_all_orders(bivariate):
    gam = bivariate.gamma(6)
    tabs = durbin_levinson(gam, 6, all_orders=True)
    assert [t.shape[0] for t in tabs] == list(range(1, 7))
    for k, t in enumerate(tabs, start=1):
        np.testing.assert_allclose(t, yule_walker_dense(gam, k), atol=1e-12)


def test_not_positive_definite():
    gam = np.array([[[1.0]], [[1.5]], [[0.0]]])
    with pytest.raises(NotPositiveDefinite):
        durbin_levinson(gam, 2)


def test_beta_routes_agree(models):
    for name in ("ma1", "arma_m0_1", "lower_triangular", "random_1"):
        m = models[name]
        pc = beta_coefficients(m.h, m.bb, 30)
        assert pc.max_discrepancy() <= 1e-8, name


def test_beta_ma1_analytic(ma1):
    b = 0.5
    pc = beta_coefficients(ma1.h, ma1.bb, 10)
    k = np.arange(0, 11)
    np.testing.assert_allclose(pc.quadrature[10:, 0, 0], -(1 - b * b) * (-b) ** k, atol=1e-14)
    np.testing.assert_allclose(pc.beta(-1)[0, 0], -b, atol=1e-14)
    np.testing.assert_allclose(pc.quadrature[:9, 0, 0], 0, atol=1e-14)


def test_b_sequences_ma1(ma1):
    bs = b_sequences(ma1.h, ma1.bb, 2, 3, 3)
    assert bs.max_discrepancy() <= 1e-9
    np.testing.assert_array_equal(bs.closed[0, 0], np.eye(1))
    np.testing.assert_array_equal(bs.closed[0, 1:], 0)


def test_b_sequences_bivariate(bivariate):
    bs = b_sequences(bivariate.h, bivariate.bb, 3, 4, 4)
    assert bs.max_discrepancy() <= 1e-9


def test_b_sequences_reject_small_horizon(arma_m0):
    with pytest.raises(ValueError):
        b_sequences(arma_m0.h, arma_m0.bb, 0, 2, 2)


def test_phi_series_start_and_limit(ma1):
    n, j = 5, 2
    s = phi_series(ma1.bb, n, j, 10)
    np.testing.assert_allclose(s[0], [[-0.25]], atol=1e-15)
    target = phi_all(ma1.bb, n).phi[j - 1]
    assert np.abs(s[-1] - target).max() <= 1e-9


def test_phi_series_bivariate(bivariate):
    s = phi_series(bivariate.bb, 4, 3, 20)
    target = phi_all(bivariate.bb, 4).phi[2]
    assert opnorm(s[-1] - target) <= 1e-9


def test_asymptotics_ma1_exact_sum(ma1):
    b = 0.5
    rep = baxter_asymptotics(ma1.bb, range(10, 41, 10))
    assert abs(rep.C1 - 1.0) <= 1e-12
    for row in rep.rows:
        n = row.n
        exact = sum(b ** (2 * n + 2 - j) - b ** (2 * n + 2 + j) for j in range(1, n + 1)) / (1 - b ** (2 * n + 2))
        assert abs(row.lhs_sum - exact) <= 1e-12 * exact
        assert abs(row.ratio - b) <= 2 * b ** n
        assert abs(row.shifted_ratio - 1) <= 4 * b ** n


def test_asymptotics_shifted_ratio_battery(models):
    for name in ("arma_m0_1", "lower_triangular", "random_0"):
        rep = baxter_asymptotics(models[name].bb)
        row = rep.final()
        assert abs(row.shifted_ratio - 1) <= 0.05, name
        assert abs(row.cor_shifted - 1) <= 0.05, name


def test_asymptotics_equal_modulus():
    m = prepare(battery.equal_modulus_ma2())
    with pytest.raises(AssumptionP1MaxViolated):
        baxter_asymptotics(m.bb)


def test_binomial_identity_examples():
    lhs = binomial_sum_lhs(1, 1, 0, 0.5, 0.5)
    rhs = binomial_sum_rhs(1, 1, 0, 0.5, 0.5)
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)
    x, y = 0.3 + 0.2j, -0.5 + 0.1j
    assert abs(binomial_sum_lhs(0, 0, 3, x, y) - y ** 3 / (1 - x * y)) <= 1e-14


def test_identity_suite_passes():
    rows = identity_suite()
    assert rows and all(r.passed for r in rows), [r.name for r in rows if not r.passed]


def test_model_checks_pass(models):
    for name in ("ma1", "arma_m0_1", "lower_triangular"):
        m = models[name]
        rows = model_checks(m.h, m.bb)
        assert all(r.passed for r in rows), (name, [r.name for r in rows if not r.passed])


def test_row_export():
    rows = identity_suite(count=5)
    data = json.loads(rows_to_json(rows))
    assert {"name", "lhs", "rhs", "ratio", "tol", "passed"} <= set(data[0])
    lines = rows_to_csv(rows).splitlines()
    assert lines[0] == "name,lhs,rhs,ratio,tol,pass"
    assert len(lines) == len(rows) + 1
