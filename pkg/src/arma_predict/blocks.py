"""Fixed-size matrices that enter the closed-form predictor.

Every object here has size ``dM x dM`` or ``dM x d`` regardless of the
prediction horizon.  Blocks are ordered ``(mu, i)`` with ``mu = 1..K`` and
``i = 1..m_mu``.  Most matrices are a scalar ``M x M`` pattern tensored with
``I_d``; those are built in scalar form and expanded with :func:`expand`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _numerics as nx
from .errors import NearPoleDifferentiation
from .model import PoleData


def expand(s, d):
    """``kron(s, I_d)`` for a scalar matrix or column ``s``."""
    s = np.asarray(s)
    if s.ndim == 1:
        s = s[:, None]
    return np.kron(s, np.eye(d))


def p_scalar(pd, n):
    """Values ``p_{mu,i}(n) = C(n, i-1) p_mu^(n-i+1)`` in block order.

    ``n`` may be an array; the block axis is last.
    """
    n = np.asarray(n)
    cols = []
    for p, m in zip(pd.poles, pd.mult):
        for i in range(1, m + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                pw = np.where(n >= i - 1, p ** np.maximum(n - i + 1, 0), 0.0)
            cols.append(nx.binom(n, i - 1) * pw)
    return np.stack(cols, axis=-1).astype(complex) if cols else np.zeros(n.shape + (0,), complex)


def p_vec(pd, n):
    """Stacked ``p_{mu,i}(n) I_d`` blocks, shape ``(dM, d)``."""
    return expand(p_scalar(pd, int(n)), pd.d)


def lambda_scalar(pd):
    """Scalar pattern of ``Lambda = sum_l p_l p_l^*`` from its closed form."""
    M = pd.M
    out = np.zeros((M, M), dtype=complex)
    idx = pd.block_index()
    for a, (mu, i) in enumerate(idx):
        pm = pd.poles[mu]
        for b, (nu, j) in enumerate(idx):
            pn = np.conj(pd.poles[nu])
            x = 1.0 - pm * pn
            s = 0.0
            for r in range(j):
                s += (nx.binom(i - 1, r) * nx.binom(i + j - r - 2, i - 1)
                      * pm ** (j - r - 1) * pn ** (i - r - 1) / x ** (i + j - r - 1))
            out[a, b] = s
    return out


def lambda_matrix(pd):
    return expand(lambda_scalar(pd), pd.d)


def j_scalar(pd):
    """Scalar pattern of the shift with ``Xi_{n+1} = Xi_n J``.

    Each diagonal block is ``conj(p_nu)`` times the upper-triangular matrix
    of ones: by the hockey-stick identity
    ``C(N + 1, j - 1) = sum_{k <= j} C(N + k - j, k - 1)`` each column of
    ``Xi_{n+1}`` is ``conj(p_nu)`` times the sum of the columns ``k <= j`` of
    ``Xi_n`` in the same pole block.
    """
    M = pd.M
    out = np.zeros((M, M), dtype=complex)
    off = pd.offsets
    for nu, p in enumerate(pd.poles):
        m = pd.mult[nu]
        out[off[nu] : off[nu + 1], off[nu] : off[nu + 1]] = np.conj(p) * np.triu(np.ones((m, m)))
    return out


def xi_scalar(pd, n):
    """Scalar pattern of ``Xi_n`` from its closed form (any ``n >= 1``)."""
    M = pd.M
    out = np.zeros((M, M), dtype=complex)
    idx = pd.block_index()
    for a, (mu, i) in enumerate(idx):
        pm = pd.poles[mu]
        for b, (nu, j) in enumerate(idx):
            pn = np.conj(pd.poles[nu])
            x = 1.0 - pm * pn
            s = 0.0
            for r in range(j):
                s += (nx.binom(n + i + j - 2, r) * nx.binom(i + j - r - 2, i - 1)
                      * pm ** (j - r - 1) * pn ** (n + i + j - r - 2) / x ** (i + j - r - 1))
            out[a, b] = s
    return out


def xi_scalar_sequence(pd, n_max, direct=False):
    """``Xi_1 .. Xi_{n_max}`` in scalar form, shape ``(n_max, M, M)``.

    The default path applies the ``J`` recursion from ``Xi_1``; ``direct``
    evaluates the closed form at every ``n`` and exists for cross-checks.
    """
    if direct:
        return np.array([xi_scalar(pd, n) for n in range(1, n_max + 1)])
    J = j_scalar(pd)
    out = np.empty((n_max, pd.M, pd.M), dtype=complex)
    out[0] = xi_scalar(pd, 1)
    for k in range(1, n_max):
        out[k] = out[k - 1] @ J
    return out


def xi_sequence(pd, n_max, direct=False):
    """``Xi_1 .. Xi_{n_max}`` as ``dM x dM`` matrices."""
    return np.array([expand(x, pd.d) for x in xi_scalar_sequence(pd, n_max, direct)])


def pi_scalar(pd, n):
    """Scalar pattern of ``Pi_n``: upper-triangular Toeplitz blocks of ``p_{mu,k}(n)``."""
    M = pd.M
    out = np.zeros((M, M), dtype=complex)
    vals = p_scalar(pd, n)
    off = pd.offsets
    for mu in range(pd.K):
        m = pd.mult[mu]
        v = vals[off[mu] : off[mu + 1]]
        for i in range(m):
            out[off[mu] + i, off[mu] + i : off[mu + 1]] = v[: m - i]
    return out


def pi_matrix(pd, n):
    return expand(pi_scalar(pd, n), pd.d)


def _hsharp_taylor_at(pd_sharp, center, order, radius, nodes=64):
    if radius < 1e-8:
        raise NearPoleDifferentiation(f"no room to differentiate around {center}")
    return nx.contour_taylor(pd_sharp.inverse, center, radius, order, nodes)


def theta_values(pd, pd_sharp, nodes=64):
    """``theta_{mu,j}`` for every pole, plus the ``p_0 = 0`` family.

    Uses the expansion of ``-h_sharp(z) h^dagger(z)^{-1}`` near ``p_mu``:
    ``theta_{mu,j} = sum_{l >= j} [(z^l h_sharp)^{(l-j)}(p_mu) / (l-j)!] rho_{mu,l}^*``,
    with Taylor coefficients of ``h_sharp`` by contour differentiation of
    the fitted ansatz.  Returns ``(thetas, theta0)`` where ``thetas[mu]`` has
    shape ``(m_mu, d, d)`` and ``theta0`` shape ``(m0, d, d)``.
    """
    out = []
    for p, rho in zip(pd.poles, pd.rho):
        m = rho.shape[0]
        t = _hsharp_taylor_at(pd_sharp, p, m - 1, 0.5 * (1.0 - abs(p)), nodes)
        th = np.zeros((m,) + rho.shape[1:], dtype=complex)
        for l in range(1, m + 1):
            # Taylor coefficients of z^l h_sharp(z) about p, orders 0..l-1
            e = np.zeros((l,) + rho.shape[1:], dtype=complex)
            for k in range(l):
                for s in range(k + 1):
                    e[k] += nx.binom(l, s) * p ** (l - s) * t[k - s]
            rl = rho[l - 1].conj().T
            for j in range(1, l + 1):
                th[j - 1] += e[l - j] @ rl
        out.append(th)
    theta0 = np.zeros((pd.m0, pd.d, pd.d), dtype=complex)
    if pd.m0:
        others = np.abs(pd.poles)
        radius = 0.5 * min(others.min() if others.size else 1.0, 1.0)
        t = _hsharp_taylor_at(pd_sharp, 0.0, pd.m0 - 1, radius, nodes)
        for j in range(1, pd.m0 + 1):
            for l in range(j, pd.m0 + 1):
                theta0[j - 1] += t[l - j] @ pd.rho0j[l - 1].conj().T
    return out, theta0


def theta_by_limit(pd, pd_sharp, nodes=512):
    """``theta`` from the principal part of ``-h_sharp(z) h^dagger(z)^{-1}``.

    An independent route: contour Laurent coefficients about each ``p_mu``
    (and about 0 when ``m0 >= 1``), with ``h^dagger(z)^{-1}`` evaluated as
    ``{h^{-1}(1/conj z)}^*``.
    """
    def f(z):
        hd_inv = np.conj(np.swapaxes(pd(1.0 / np.conj(z)), -1, -2))
        return -pd_sharp.inverse(z) @ hd_inv

    pts = list(pd.poles) + ([0.0] if pd.m0 else [])
    mults = list(pd.mult) + ([pd.m0] if pd.m0 else [])
    res = []
    for k, (p, m) in enumerate(zip(pts, mults)):
        gaps = [abs(p - q) for i, q in enumerate(pts) if i != k] + [1.0 - abs(p)]
        res.append(nx.contour_laurent(f, p, 0.5 * min(gaps), m, nodes))
    thetas = res[: pd.K]
    theta0 = res[pd.K] if pd.m0 else np.zeros((0, pd.d, pd.d), dtype=complex)
    return thetas, theta0


def theta_matrix_from(thetas, d):
    """Block-diagonal Hankel assembly of the per-pole ``theta`` arrays."""
    M = sum(t.shape[0] for t in thetas)
    out = np.zeros((d * M, d * M), dtype=complex)
    off = 0
    for th in thetas:
        m = th.shape[0]
        for i in range(m):
            for k in range(m - i):
                out[d * (off + i) : d * (off + i + 1), d * (off + k) : d * (off + k + 1)] = th[i + k]
        off += m
    return out


def theta_matrix(pd, pd_sharp):
    return theta_matrix_from(theta_values(pd, pd_sharp)[0], pd.d)


def rho_stacks(pd, pd_sharp):
    """``rho`` and ``rho_tilde`` stacks, each ``(dM, d)``.

    ``rho_tilde`` stacks the conjugate transposes of the ``rho_sharp`` blocks.
    """
    rho = pd.residue_stack().reshape(-1, pd.d)
    rt = pd_sharp.tilde().residue_stack().reshape(-1, pd.d)
    return rho, rt


def v_vectors(pd, pd_sharp, n):
    """``(v_n, v_tilde_n)`` with the polynomial-part corrections for ``n <= m0``."""
    xi = expand(xi_scalar(pd, n), pd.d)
    rho, rt = rho_stacks(pd, pd_sharp)
    v = xi @ rho
    vt = np.conj(xi) @ rt
    if n <= pd.m0:
        tdata = pd_sharp.tilde()
        for ell in range(pd.m0 - n + 1):
            pl = p_vec(pd, ell)
            v = v + pl @ pd.rho0j[n + ell - 1]
            vt = vt + np.conj(pl) @ tdata.rho0j[n + ell - 1]
    return v, vt


@dataclass(frozen=True)
class BuildingBlocks:
    """Precomputed ``Lambda``, ``Theta``, ``J``, residue stacks and ``c0``.

    Scalar patterns (``lam``, ``J``, ``xi1``) are ``M x M``; use the
    properties for the ``dM x dM`` forms.
    """

    pd: PoleData
    pd_sharp: PoleData
    lam: np.ndarray
    J: np.ndarray
    xi1: np.ndarray
    Theta: np.ndarray
    thetas: tuple
    theta0: np.ndarray
    rho: np.ndarray
    rho_tilde: np.ndarray
    c0: np.ndarray

    @property
    def d(self):
        return self.pd.d

    @property
    def K(self):
        return self.pd.K

    @property
    def M(self):
        return self.pd.M

    @property
    def m0(self):
        return self.pd.m0

    @property
    def Lambda(self):
        return expand(self.lam, self.d)

    @property
    def J_full(self):
        return expand(self.J, self.d)

    @property
    def p0(self):
        return p_vec(self.pd, 0)


def build_blocks(pd, pd_sharp):
    """Assemble :class:`BuildingBlocks` for a model with ``K >= 1``."""
    thetas, theta0 = theta_values(pd, pd_sharp)
    rho, rt = rho_stacks(pd, pd_sharp)
    c0 = -np.linalg.inv(pd.a0)
    return BuildingBlocks(
        pd=pd,
        pd_sharp=pd_sharp,
        lam=lambda_scalar(pd),
        J=j_scalar(pd),
        xi1=xi_scalar(pd, 1),
        Theta=theta_matrix_from(thetas, pd.d),
        thetas=tuple(thetas),
        theta0=theta0,
        rho=rho,
        rho_tilde=rt,
        c0=c0,
    )
