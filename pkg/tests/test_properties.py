import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from arma_predict._numerics import opnorm
from arma_predict.battery import random_poledata
from arma_predict.blocks import p_scalar
from arma_predict.model import PoleData
from arma_predict.oracle import binomial_sum_lhs, binomial_sum_rhs
from arma_predict.pipeline import oracle_phi, predict, prepare

SLOW = settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def disk_point(r, angle):
    return r * complex(math.cos(angle), math.sin(angle))


disk = st.builds(disk_point, st.floats(0.0, 0.85), st.floats(0.0, 2 * math.pi))


def random_model(seed, d, K):
    rng = np.random.default_rng(seed)
    return prepare(random_poledata(rng, d=d, K=K))


@SLOW
@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(1, 3), st.integers(1, 25))
def test_closed_form_matches_durbin_levinson(seed, d, K, n):
    m = random_model(seed, d, K)
    n = max(n, m.pd.m0)
    tab = predict(m, n)
    assert opnorm(tab.phi - oracle_phi(m, n)).max() <= 1e-8


@SLOW
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_gauge_invariance(seed, d):
    m = random_model(seed, d, 2)
    u = unitary_group.rvs(d, random_state=seed % 2**31) if d > 1 else np.array([[np.exp(1j * (seed % 7))]])
    a = predict(m, 9).phi
    b = predict(m.with_gauge(u), 9).phi
    assert opnorm(a - b).max() <= 1e-10 * max(1.0, opnorm(a).max())


@SLOW
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_autocovariance_toeplitz_positive(seed, d):
    m = random_model(seed, d, 1)
    k = 6
    gam = m.gamma(k)
    np.testing.assert_allclose(gam[0], gam[0].conj().T, atol=1e-12)
    blocks = [[gam[i - j] if i >= j else gam[j - i].conj().T for j in range(k)] for i in range(k)]
    T = np.block(blocks)
    assert np.min(np.linalg.eigvalsh(0.5 * (T + T.conj().T))) > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), disk, disk)
def test_binomial_sum_identity(i, j, n, x, y):
    lhs = binomial_sum_lhs(i, j, n, x, y)
    rhs = binomial_sum_rhs(i, j, n, x, y)
    assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1e-300) + 1e-300


@settings(max_examples=60, deadline=None)
@given(st.lists(disk, min_size=1, max_size=3), st.lists(st.integers(1, 3), min_size=3, max_size=3),
       st.integers(0, 30))
def test_pole_power_difference_identity(poles, mult, n):
    mult = mult[: len(poles)]
    assume(all(abs(a - b) > 1e-3 for k, a in enumerate(poles) for b in poles[:k]))
    pd = PoleData(np.array(poles), np.eye(1), tuple(np.ones((m, 1, 1)) for m in mult))
    cur, nxt = p_scalar(pd, n), p_scalar(pd, n + 1)
    off = 0
    for p, m in zip(poles, mult):
        for i in range(1, m + 1):
            lhs = nxt[off + i - 1]
            rhs = p * cur[off + i - 1] + (cur[off + i - 2] if i > 1 else 0.0)
            assert abs(lhs - rhs) <= 1e-12 * (1 + abs(cur[off + i - 1]) + abs(lhs))
        off += m
