"""Linear-time evaluation of the finite predictor coefficients.

For ``n >= max(m0, 1)``

.. math::

    \\phi_{n,j} = c_0 a_j + c_0 \\mathfrak{p}_0^\\top (I - \\tilde G_n G_n)^{-1}
        (\\Pi_n\\Theta)^* \\{\\Lambda^\\top \\Pi_n \\Theta v_j + \\tilde v_{n-j+1}\\},

with ``G_n = Pi_n Theta Lambda`` and ``G~_n = (Pi_n Theta)^* Lambda^T``.  Only
``v_j`` and ``v~_k`` depend on ``j``; both come from the ``Xi`` recursion, so
all ``n`` coefficients cost ``O(n)`` fixed-size products.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .blocks import BuildingBlocks, expand, p_scalar, pi_scalar
from .errors import NeumannDiverged
from .model import ar_coefficients


@dataclass(frozen=True)
class PredictorTable:
    """``phi_{n,1..n}`` with the infinite-past coefficients and diagnostics.

    ``method`` is ``"closed-form"``, ``"ar-exact"`` (pure AR model) or
    ``"durbin-levinson-fallback"`` (horizon below the closed form's range).
    """

    n: int
    phi: np.ndarray
    phi_inf: np.ndarray
    neumann_radius: float
    method: str = "closed-form"
    timings: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NeumannDiagnostics:
    spectral_radius: float
    partial_sum_error: float
    condition: float
    terms: int


def pi_theta(bb, n):
    return expand(pi_scalar(bb.pd, n), bb.d) @ bb.Theta


def g_matrices(bb, n):
    """``(G_n, G~_n)``."""
    pt = pi_theta(bb, n)
    lam = bb.Lambda
    return pt @ lam, pt.conj().T @ lam.T


def _power_sweep(J, R, count):
    """``J^k R`` for ``k = 0..count-1`` using about ``2 sqrt(count)`` products.

    ``R`` has shape ``(M, q)``; the result has shape ``(count, M, q)``.
    """
    M, q = R.shape
    out = np.empty((count, M, q), dtype=complex)
    if count == 0:
        return out
    B = max(1, int(np.ceil(np.sqrt(count))))
    base = np.empty((B, M, q), dtype=complex)
    base[0] = R
    for s in range(1, B):
        base[s] = J @ base[s - 1]
    PB = np.linalg.matrix_power(J, B)
    P = np.eye(M, dtype=complex)
    for t in range(0, count, B):
        m = min(B, count - t)
        out[t : t + m] = np.matmul(P, base[:m])
        P = PB @ P
    return out


def xi_sweeps(bb, n):
    """``v_j`` and ``v~_j`` for ``j = 1..n``, each of shape ``(n, dM, d)``.

    Scalar patterns are propagated with ``J``: ``Xi_j rho = Xi_1 J^{j-1} rho``.
    The polynomial-part corrections are added for ``j <= m0``.
    """
    d, M = bb.d, bb.M
    pd = bb.pd
    R = bb.rho.reshape(M, d * d)
    Rt = bb.rho_tilde.reshape(M, d * d)
    U = _power_sweep(bb.J, R, n)
    Ut = _power_sweep(np.conj(bb.J), Rt, n)
    V = np.matmul(bb.xi1, U).reshape(n, M, d, d)
    Vt = np.matmul(np.conj(bb.xi1), Ut).reshape(n, M, d, d)
    if pd.m0:
        tdata = bb.pd_sharp.tilde()
        for j in range(1, min(pd.m0, n) + 1):
            for ell in range(pd.m0 - j + 1):
                ps = p_scalar(pd, ell)
                V[j - 1] += ps[:, None, None] * pd.rho0j[j + ell - 1]
                Vt[j - 1] += np.conj(ps)[:, None, None] * tdata.rho0j[j + ell - 1]
    return V.reshape(n, M * d, d), Vt.reshape(n, M * d, d)


def _check_horizon(bb, n):
    n = int(n)
    if n < max(bb.m0, 1):
        raise ValueError(f"closed form needs n >= max(m0, 1) = {max(bb.m0, 1)}, got {n}")
    return n


def correction_terms(bb, n, timings=None):
    """``phi_{n,j} - phi_j`` for ``j = 1..n`` without forming a difference.

    Returns ``(corr, radius)`` with ``corr`` of shape ``(n, d, d)``.
    """
    n = _check_horizon(bb, n)
    t0 = time.perf_counter()
    pt = pi_theta(bb, n)
    lam = bb.Lambda
    G = pt @ lam
    Gt = pt.conj().T @ lam.T
    A = np.eye(G.shape[0]) - Gt @ G
    radius = float(np.max(np.abs(np.linalg.eigvals(Gt @ G))))
    if not radius < 1.0 or np.linalg.cond(A) > 1e14:
        raise NeumannDiverged(f"I - G~G is singular to working precision (radius {radius:.6g})")
    W = np.linalg.solve(A, pt.conj().T)
    L = bb.c0 @ (bb.p0.T @ W)
    LX = L @ (lam.T @ pt)
    t1 = time.perf_counter()
    V, Vt = xi_sweeps(bb, n)
    t2 = time.perf_counter()
    corr = np.matmul(LX, V) + np.matmul(L, Vt[::-1])
    t3 = time.perf_counter()
    if timings is not None:
        timings.update(setup=t1 - t0, sweep=t2 - t1, assemble=t3 - t2)
    return corr, radius


def phi_diff_all(bb, n):
    """Cancellation-free ``phi_{n,j} - phi_j`` for ``j = 1..n``."""
    return correction_terms(bb, n)[0]


def phi_all(bb: BuildingBlocks, n: int) -> PredictorTable:
    """All finite predictor coefficients ``phi_{n,1..n}``.

    Parameters
    ----------
    bb : BuildingBlocks
        Model with ``K >= 1``.
    n : int
        Horizon, at least ``max(m0, 1)``.

    Returns
    -------
    PredictorTable

    Raises
    ------
    NeumannDiverged
        If ``I - G~_n G_n`` is numerically singular.
    """
    timings = {}
    t0 = time.perf_counter()
    corr, radius = correction_terms(bb, n, timings)
    a = ar_coefficients(bb.pd, n + 1)[1:]
    phi_inf = np.matmul(bb.c0, a)
    phi = phi_inf + corr
    timings["total"] = time.perf_counter() - t0
    if not np.all(np.isfinite(phi)):
        raise NeumannDiverged("non-finite predictor coefficients")
    return PredictorTable(int(n), phi, phi_inf, radius, "closed-form", timings)


def ar_table(pd, n):
    """Exact coefficients of a pure AR model (no poles): ``phi_j`` up to ``m0``."""
    if n < pd.m0:
        raise ValueError(f"AR shortcut needs n >= m0 = {pd.m0}")
    c0 = -np.linalg.inv(pd.a0)
    a = ar_coefficients(pd, n + 1)[1:]
    phi_inf = np.matmul(c0, a)
    phi = phi_inf.copy()
    phi[pd.m0 :] = 0.0
    return PredictorTable(int(n), phi, phi_inf, 0.0, "ar-exact")


def neumann_diagnostics(bb, n, terms=30):
    """Spectral radius of ``G~_n G_n`` and the error of a ``terms``-term Neumann sum."""
    G, Gt = g_matrices(bb, n)
    T = Gt @ G
    A = np.eye(T.shape[0]) - T
    inv = np.linalg.inv(A)
    partial = np.eye(T.shape[0], dtype=complex)
    P = np.eye(T.shape[0], dtype=complex)
    for _ in range(terms):
        P = P @ T
        partial = partial + P
    err = float(nx.opnorm(partial - inv))
    radius = float(np.max(np.abs(np.linalg.eigvals(T)))) if T.size else 0.0
    return NeumannDiagnostics(radius, err, float(np.linalg.cond(A)), terms)
