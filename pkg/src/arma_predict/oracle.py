"""Reference computations used to check the closed-form predictor.

Everything here is deliberately independent of :mod:`arma_predict.predictor`
where possible: the Yule-Walker route only needs autocovariances, the phase
coefficients come from quadrature as well as from the pole data, and the
series form of the predictor is summed term by term.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal, localcontext

import numpy as np

from . import _numerics as nx
from .blocks import build_blocks, expand, p_scalar, p_vec, pi_scalar
from .errors import (
    AssumptionP1MaxViolated,
    GridTooCoarse,
    NotPositiveDefinite,
    TruncationInsufficient,
)
from .model import PoleData, ar_coefficients, transfer
from .predictor import correction_terms, g_matrices, pi_theta, xi_sweeps
from .specfactor import circle_grid


def _ct(a):
    return np.conj(np.swapaxes(a, -1, -2))


# ---------------------------------------------------------------------------
# Yule-Walker


def _require_pd(v, what):
    try:
        np.linalg.cholesky(0.5 * (v + v.conj().T))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"{what} lost positive definiteness") from None


def durbin_levinson(gamma, n, all_orders=False):
    """Whittle's multivariate Durbin-Levinson recursion.

    Parameters
    ----------
    gamma : (>= n + 1, d, d) array
        ``gamma[k] = E[X_k X_0^*]`` for ``k = 0..n``.
    n : int
    all_orders : bool
        Also return every intermediate order.

    Returns
    -------
    (n, d, d) array
        ``phi_{n,1..n}`` solving ``gamma(i) = sum_j phi_{n,j} gamma(i - j)``.
        With ``all_orders`` a list whose entry ``k - 1`` is ``phi_{k,1..k}``.
    """
    gamma = np.asarray(gamma, dtype=complex)
    d = gamma.shape[1]
    if gamma.shape[0] < n + 1:
        raise ValueError("need gamma(0..n)")
    phi = np.zeros((n, d, d), dtype=complex)
    psi = np.zeros((n, d, d), dtype=complex)
    V = gamma[0].copy()
    Vt = gamma[0].copy()
    _require_pd(V, "gamma(0)")
    history = []
    for k in range(n):
        delta = gamma[k + 1] - np.einsum("jab,jbc->ac", phi[:k], gamma[k:0:-1])
        a = delta @ np.linalg.inv(Vt)
        b = delta.conj().T @ np.linalg.inv(V)
        if k:
            new_phi = phi[:k] - np.matmul(a, psi[k - 1 :: -1][:k])
            psi[:k] = psi[:k] - np.matmul(b, phi[k - 1 :: -1][:k])
            phi[:k] = new_phi
        phi[k] = a
        psi[k] = b
        V = V - a @ delta.conj().T
        Vt = Vt - b @ delta
        _require_pd(V, "forward innovation covariance")
        _require_pd(Vt, "backward innovation covariance")
        if all_orders:
            history.append(phi[: k + 1].copy())
    return history if all_orders else phi


def yule_walker_dense(gamma, n):
    """Direct solve of the block Toeplitz Yule-Walker system (small ``n``)."""
    gamma = np.asarray(gamma, dtype=complex)
    d = gamma.shape[1]

    def g(k):
        return gamma[k] if k >= 0 else gamma[-k].conj().T

    T = np.zeros((n * d, n * d), dtype=complex)
    for j in range(n):
        for i in range(n):
            T[j * d : (j + 1) * d, i * d : (i + 1) * d] = g(i - j)
    rhs = np.concatenate([g(i) for i in range(1, n + 1)], axis=1)
    # Phi T = rhs  <=>  T^* Phi^* = rhs^*, and T is Hermitian
    sol = np.linalg.solve(T, rhs.conj().T)
    return sol.conj().T.reshape(d, n, d).transpose(1, 0, 2)


# ---------------------------------------------------------------------------
# phase function coefficients


@dataclass(frozen=True)
class PhaseCoefficients:
    """``beta_k`` by quadrature for ``|k| <= kmax`` and ``beta*_{n+1}`` in closed form.

    ``quadrature[k + kmax] = beta_k``; ``closed_star[n] = beta*_{n+1}``.
    """

    quadrature: np.ndarray
    closed_star: np.ndarray
    grid: int
    kmax: int

    def beta(self, k):
        return self.quadrature[k + self.kmax]

    def max_discrepancy(self):
        quad_star = _ct(self.quadrature[self.kmax + 1 :])
        return float(np.max(nx.opnorm(quad_star - self.closed_star), initial=0.0))


def beta_quadrature(h, pd_sharp, kmax, grid=1024, tol=1e-14, max_grid=1 << 18):
    """``beta_k = -int e^{-ik theta} h^* h_sharp^{-1}`` for ``|k| <= kmax``.

    The grid doubles until the values stop moving; returns ``(values, grid)``.
    """
    hfun = transfer(h)

    def run(n):
        z = circle_grid(n)
        F = _ct(hfun(z)) @ pd_sharp(z)
        coef = -np.fft.fft(F, axis=0) / n
        k = np.arange(-kmax, kmax + 1)
        return coef[k % n]

    n = max(int(grid), nx.next_pow2(4 * kmax + 4))
    prev = run(n)
    while True:
        if 2 * n > max_grid:
            raise GridTooCoarse(f"beta quadrature not stable at grid {n}")
        cur = run(2 * n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            return cur, 2 * n
        prev, n = cur, 2 * n


def beta_closed_star(pd, thetas, theta0, count):
    """``beta*_{n+1}`` for ``n = 0..count-1`` from the pole data and ``theta``."""
    out = np.zeros((count, pd.d, pd.d), dtype=complex)
    n = np.arange(count)
    for p, th in zip(pd.poles, thetas):
        for j in range(1, th.shape[0] + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                pw = np.where(n >= j - 1, p ** np.maximum(n - j + 1, 0), 0.0)
            out += (nx.binom(n, j - 1) * pw)[:, None, None] * th[j - 1]
    for j in range(1, theta0.shape[0] + 1):
        if j - 1 < count:
            out[j - 1] += theta0[j - 1]
    return out


def beta_coefficients(h, bb, kmax, grid=1024):
    """Both routes to the phase coefficients for one model."""
    quad, g = beta_quadrature(h, bb.pd_sharp, kmax, grid)
    closed = beta_closed_star(bb.pd, bb.thetas, bb.theta0, kmax)
    return PhaseCoefficients(quad, closed, g, kmax)


# ---------------------------------------------------------------------------
# b-recursions and the series form of the predictor


@dataclass(frozen=True)
class BSequences:
    """``b^k_{n,j}`` and ``b~^k_{n,j}`` for ``k = 0..kmax``, ``j = 0..jmax``.

    ``recursion`` / ``recursion_tilde`` come from the defining recursions with
    quadrature ``beta``; ``closed`` / ``closed_tilde`` from matrix products.
    """

    n: int
    recursion: np.ndarray
    recursion_tilde: np.ndarray
    closed: np.ndarray
    closed_tilde: np.ndarray
    trunc: int

    def max_discrepancy(self):
        a = np.max(np.abs(self.recursion - self.closed))
        b = np.max(np.abs(self.recursion_tilde - self.closed_tilde))
        return float(max(a, b))


def b_closed_forms(bb, n, kmax, jmax):
    """Closed forms of ``b`` and ``b~`` as products of fixed-size matrices."""
    d = bb.d
    G, Gt = g_matrices(bb, n)
    pt = pi_theta(bb, n)
    p0t = bb.p0.T
    js = np.arange(jmax + 1)
    P = expand_stack(p_scalar(bb.pd, js), d)  # (jmax+1, dM, d)
    Pc = np.conj(P)
    b = np.zeros((kmax + 1, jmax + 1, d, d), dtype=complex)
    bt = np.zeros_like(b)
    b[0, 0] = np.eye(d)
    bt[0, 0] = np.eye(d)
    GtG = Gt @ G
    GGt = G @ Gt
    left = p0t.copy()
    left_t = p0t.copy()
    for k in range(1, kmax + 1):
        if k % 2:
            b[k] = np.matmul(left @ pt.conj().T, Pc)
            bt[k] = np.matmul(left_t @ pt, P)
        else:
            b[k] = np.matmul(left @ Gt @ pt, P)
            bt[k] = np.matmul(left_t @ G @ pt.conj().T, Pc)
            left = left @ GtG
            left_t = left_t @ GGt
    return b, bt


def expand_stack(s, d):
    """``kron(s[k], I_d)`` for each row ``s[k]`` of a ``(count, M)`` array."""
    count, M = s.shape
    out = np.zeros((count, M * d, d), dtype=complex)
    for a in range(d):
        out[:, a::d, a] = s
    return out


def _b_recursion(beta_of, n, kmax, T, d):
    idx = n + np.arange(T + 1)[:, None] + np.arange(T + 1)[None, :] + 1
    H = beta_of(idx)  # (T+1, T+1, d, d): beta_{n+j+l+1} at [j, l]
    Hs = _ct(H)
    b = np.zeros((kmax + 1, T + 1, d, d), dtype=complex)
    bt = np.zeros_like(b)
    b[0, 0] = np.eye(d)
    bt[0, 0] = np.eye(d)
    for k in range(1, kmax + 1):
        odd = k % 2 == 1
        b[k] = np.einsum("lab,jlbc->jac", b[k - 1], H if odd else Hs)
        bt[k] = np.einsum("lab,jlbc->jac", bt[k - 1], Hs if odd else H)
    return b, bt


def b_sequences(h, bb, n, kmax, jmax, trunc=64, tol=1e-12):
    """Recursion values and closed forms of ``b`` and ``b~``.

    The recursion truncates every ``l``-sum at ``trunc`` terms and is rerun
    with twice that; :class:`TruncationInsufficient` is raised if the two
    disagree beyond ``tol``.
    """
    if n < max(bb.m0, 1):
        raise ValueError("b sequences need n >= max(m0, 1)")
    kq = n + 4 * max(trunc, jmax) + 2
    quad, _ = beta_quadrature(h, bb.pd_sharp, kq)

    def beta_of(idx):
        return quad[idx + kq]

    d = bb.d
    t1 = max(trunc, jmax)
    r1 = _b_recursion(beta_of, n, kmax, t1, d)
    r2 = _b_recursion(beta_of, n, kmax, 2 * t1, d)
    diff = max(np.max(np.abs(r1[0][:, : jmax + 1] - r2[0][:, : jmax + 1])),
               np.max(np.abs(r1[1][:, : jmax + 1] - r2[1][:, : jmax + 1])))
    if diff > tol:
        raise TruncationInsufficient(f"doubling truncation moved b by {diff:.3g}")
    closed, closed_t = b_closed_forms(bb, n, kmax, jmax)
    return BSequences(n, r2[0][:, : jmax + 1], r2[1][:, : jmax + 1], closed, closed_t, 2 * t1)


def _decay_length(pd, eps=1e-18):
    r = float(np.max(np.abs(pd.poles)))
    m = max(pd.mult)
    return int(math.ceil(math.log(eps) / math.log(r))) + 40 * m + pd.m0 + 10


def phi_series(bb, n, j, kmax):
    """Partial sums of the series form of ``phi_{n,j}``.

    Term ``k`` adds ``phi^{2k}_{n,j} + phi^{2k-1}_{n,n-j+1}`` where
    ``phi^{2k}_{n,j} = c0 sum_l b^{2k}_{n,l} a_{j+l}`` and
    ``phi^{2k-1}_{n,i} = c0 sum_l b^{2k-1}_{n,l} a~_{i+l}``, with the ``b`` in
    closed form and the ``l``-sums truncated once the pole powers underflow.

    Returns
    -------
    (kmax + 1, d, d) array
        Entry ``k`` is the sum of the terms ``0..k``; entry 0 is ``c0 a_j``.
    """
    if n < max(bb.m0, 1) or not 1 <= j <= n:
        raise ValueError("need n >= max(m0, 1) and 1 <= j <= n")
    L = _decay_length(bb.pd)
    i = n - j + 1
    a = ar_coefficients(bb.pd, j + L + 1)
    at = ar_coefficients(bb.pd_sharp.tilde(), i + L + 1)
    b, _ = b_closed_forms(bb, n, 2 * kmax, L)
    c0 = bb.c0
    out = np.zeros((kmax + 1, bb.d, bb.d), dtype=complex)
    acc = c0 @ a[j]
    out[0] = acc
    for k in range(1, kmax + 1):
        even = np.einsum("lab,lbc->ac", b[2 * k], a[j : j + L + 1])
        odd = np.einsum("lab,lbc->ac", b[2 * k - 1], at[i : i + L + 1])
        acc = acc + c0 @ (even + odd)
        out[k] = acc
    return out


# ---------------------------------------------------------------------------
# asymptotics of the predictor error


@dataclass(frozen=True)
class AsymptoticsRow:
    """One horizon of :func:`baxter_asymptotics`.

    ``thm_rhs = C1 / (m1-1)! n^(m1-1) |p1|^n`` and ``cor_limit`` are the
    stated asymptotic forms.  The measured sums follow the same expression
    with ``|p1|^(n+1)``; ``shifted_ratio`` and ``cor_shifted`` use that form
    and tend to 1.
    """

    n: int
    lhs_sum: float
    thm_rhs: float
    ratio: float
    tail_sum: float
    cor_ratio: float
    cor_limit: float
    shifted_ratio: float = float("nan")
    cor_shifted: float = float("nan")

    @property
    def cor_normalized(self):
        return self.cor_ratio / self.cor_limit


@dataclass(frozen=True)
class AsymptoticsReport:
    """``C1``, its terms, the selector ``H`` and one row per horizon."""

    C1: float
    C1_terms: np.ndarray
    H: np.ndarray
    p1: complex
    m1: int
    rows: list = field(default_factory=list)
    order: tuple = ()

    def final(self):
        """Row at the largest ``n`` whose theoretical value is at least 1e-12."""
        ok = [r for r in self.rows if r.thm_rhs >= 1e-12]
        return max(ok, key=lambda r: r.n) if ok else None


def reorder_dominant(pd, pd_sharp, tol=1e-8):
    """Put the strictly largest ``|p_mu|`` first; raise on ties."""
    mod = np.abs(pd.poles)
    order = list(np.argsort(-mod, kind="stable"))
    if len(order) > 1 and mod[order[0]] - mod[order[1]] <= tol * mod[order[0]]:
        raise AssumptionP1MaxViolated(
            f"|p| is not uniquely maximal: {mod[order[0]]:.12g} vs {mod[order[1]]:.12g}")
    return pd.reordered(order), pd_sharp.reordered(order), tuple(int(o) for o in order)


def c1_constant(bb, tol=1e-14, max_terms=1 << 16):
    """``C1 = sum_k ||c0 h(p1)^* rho^sharp_{1,m1} H v~_k||`` and its terms."""
    pd = bb.pd
    p1 = pd.poles[0]
    hp1 = pd.inverse(np.array([p1]))[0]
    lead = bb.c0 @ hp1.conj().T @ bb.pd_sharp.rho[0][-1]
    count = 256
    while True:
        _, Vt = xi_sweeps(bb, count)
        terms = nx.opnorm(np.matmul(lead, Vt[:, : bb.d, :]))
        C, r = nx.geometric_envelope(terms)
        total = float(terms.sum())
        tail = 0.0 if C == 0 else (np.inf if r >= 1 else C * r ** count / (1 - r))
        if tail <= tol * max(total, 1e-300):
            return total, terms
        if 2 * count > max_terms:
            raise TruncationInsufficient("C1 series did not converge")
        count *= 2


def phi_tail_sum(bb, n, tol=1e-16):
    """``sum_{k > n} ||phi_k||`` with ``phi_k = c0 a_k``, summed until negligible."""
    pd = bb.pd
    L = _decay_length(pd, 1e-20)
    k = np.arange(n + 1, n + 1 + L)
    a = np.zeros((k.size, pd.d, pd.d), dtype=complex)
    for p, r in zip(pd.poles, pd.rho):
        pk = np.conj(p) ** k
        for j, rj in enumerate(r, start=1):
            a += (nx.binom(k + j - 1, j - 1) * pk)[:, None, None] * rj
    small = k <= pd.m0
    if np.any(small):
        a[small] += pd.rho0j[k[small] - 1]
    return float(nx.opnorm(np.matmul(bb.c0, a)).sum())


def auto_window(p1, m1, C1, lo=1e-12, hi=1e-2, n_max=5000):
    ns = np.arange(1, n_max + 1)
    rhs = C1 / math.factorial(m1 - 1) * ns.astype(float) ** (m1 - 1) * abs(p1) ** ns
    return [int(n) for n in ns[(rhs >= lo) & (rhs <= hi)]]


def baxter_asymptotics(bb, n_list=None):
    """Compare ``sum_j ||phi_{n,j} - phi_j||`` with its predicted asymptotics.

    The poles are reordered so the strictly dominant one comes first;
    ``lhs_sum`` uses the cancellation-free correction term.  When ``n_list``
    is omitted the horizons with theoretical value in ``[1e-12, 1e-2]`` are
    used.
    """
    pd, ps, order = reorder_dominant(bb.pd, bb.pd_sharp)
    if order != tuple(range(bb.K)):
        bb = build_blocks(pd, ps)
    p1 = complex(pd.poles[0])
    m1 = pd.mult[0]
    C1, terms = c1_constant(bb)
    if n_list is None:
        n_list = auto_window(p1, m1, C1)
    cor_limit = (1 - abs(p1)) * C1 / (abs(p1) * float(nx.opnorm(bb.c0 @ pd.rho[0][-1])))
    rows = []
    for n in n_list:
        n = int(n)
        if n < max(bb.m0, 1):
            continue
        corr, _ = correction_terms(bb, n)
        lhs = float(nx.opnorm(corr).sum())
        rhs = C1 / math.factorial(m1 - 1) * n ** (m1 - 1) * abs(p1) ** n
        tail = phi_tail_sum(bb, n)
        cor = lhs / tail
        rows.append(AsymptoticsRow(n, lhs, rhs, lhs / rhs, tail, cor, cor_limit,
                                   lhs / (rhs * abs(p1)), cor / (cor_limit * abs(p1))))
    H = np.zeros((bb.d, bb.d * bb.M))
    H[:, : bb.d] = np.eye(bb.d)
    return AsymptoticsReport(C1, terms, H, p1, m1, rows, order)


# ---------------------------------------------------------------------------
# identity suites and reports


@dataclass(frozen=True)
class CheckRow:
    """One line of a check report.

    For identity checks ``lhs`` is the discrepancy, ``rhs`` the scale and
    ``ratio = lhs / rhs``; ``passed`` means ``ratio <= tol``.  For ratio
    checks ``lhs / rhs`` should be 1 and ``passed`` means ``|ratio - 1| <= tol``.
    """

    name: str
    lhs: float
    rhs: float
    ratio: float
    tol: float
    passed: bool


def _row(name, err, scale, tol):
    scale = max(float(scale), 1e-300)
    ratio = float(err) / scale
    return CheckRow(name, float(err), scale, ratio, tol, bool(ratio <= tol))


def _ratio_row(name, lhs, rhs, tol):
    ratio = float(lhs) / float(rhs)
    return CheckRow(name, float(lhs), float(rhs), ratio, tol, bool(abs(ratio - 1) <= tol))


class _DecComplex:
    """Complex numbers over :class:`decimal.Decimal` (just what the sums need)."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = re if isinstance(re, Decimal) else Decimal(re)
        self.im = im if isinstance(im, Decimal) else Decimal(im)

    @classmethod
    def of(cls, z):
        z = complex(z)
        return cls(Decimal(z.real), Decimal(z.imag))

    def __add__(self, o):
        return _DecComplex(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return _DecComplex(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        if isinstance(o, _DecComplex):
            return _DecComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        return _DecComplex(self.re * o, self.im * o)

    def __truediv__(self, o):
        den = o.re * o.re + o.im * o.im
        return _DecComplex((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def __pow__(self, k):
        if k < 0:
            return _DecComplex(1) / self ** (-k)
        out, base = _DecComplex(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __abs__(self):
        return (self.re * self.re + self.im * self.im).sqrt()

    def __complex__(self):
        return complex(float(self.re), float(self.im))


_BINOM_PREC = 50


def binomial_sum_lhs(i, j, n, x, y, rel=1e-30, max_terms=100000):
    """``sum_l C(l, i) C(l+n, j) x^(l-i) y^(l+n-j)`` in 50-digit arithmetic.

    The terms cancel heavily for ``|xy|`` near 1, so the sum is formed from the
    exact binary values of ``x`` and ``y`` at extended precision and truncated
    with a ratio-test tail bound.  Returns a ``complex``.
    """
    with localcontext() as ctx:
        ctx.prec = _BINOM_PREC
        X, Y = _DecComplex.of(x), _DecComplex.of(y)
        xy = abs(X * Y)
        total = _DecComplex(0)
        xp = _DecComplex(1)
        ell0 = max(i, j - n, 0)
        yp = Y ** (ell0 + n - j)
        xp = X ** (ell0 - i)
        for ell in range(ell0, max_terms):
            t = xp * yp * (math.comb(ell, i) * math.comb(ell + n, j))
            total = total + t
            q = Decimal((ell + 1) * (ell + n + 1)) / Decimal((ell + 1 - i) * (ell + n + 1 - j)) * xy
            if q < 1 and abs(t) * q / (1 - q) <= Decimal(rel) * abs(total):
                return complex(total)
            xp = xp * X
            yp = yp * Y
    raise TruncationInsufficient("binomial sum did not converge")


def binomial_sum_rhs(i, j, n, x, y):
    """Finite side of the binomial-sum identity, also at 50 digits."""
    with localcontext() as ctx:
        ctx.prec = _BINOM_PREC
        X, Y = _DecComplex.of(x), _DecComplex.of(y)
        w = _DecComplex(1) - X * Y
        s = _DecComplex(0)
        for r in range(min(j, n + i) + 1):
            s = s + X ** (j - r) * Y ** (n + i - r) * (math.comb(n + i, r) * math.comb(i + j - r, i)) / w ** (i + j + 1 - r)
        return complex(s)


def _random_disk(rng, rmax):
    return rmax * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())


def _random_poles(rng, K, rmax=0.9, sep=0.1):
    while True:
        p = np.array([_random_disk(rng, rmax) for _ in range(K)])
        if np.all(np.abs(p) > 0.05):
            dist = np.abs(p[:, None] - p[None, :]) + np.eye(K) * 10
            if np.min(dist) > sep:
                return p


def identity_suite(seed=0, count=100):
    """Model-free identity checks with a fixed seed.

    Covers the binomial-sum identity (``count`` random instances and the
    ``i = j = 0`` case), the symmetric form of its ``n = 0`` case, the
    difference identity for ``p_{mu,i}``, and nonsingularity of
    ``(p(N), ..., p(N+M-1))`` for random pole sets.
    """
    rng = np.random.default_rng(seed)
    rows = []
    errs, scales = [], []
    for _ in range(count):
        i, j, n = (int(v) for v in rng.integers(0, 7, size=3))
        x, y = _random_disk(rng, 0.9), _random_disk(rng, 0.9)
        lhs = binomial_sum_lhs(i, j, n, x, y)
        rhs = binomial_sum_rhs(i, j, n, x, y)
        errs.append(abs(lhs - rhs))
        scales.append(abs(rhs))
    rel = np.array(errs) / np.maximum(np.array(scales), 1e-300)
    k = int(np.argmax(rel))
    rows.append(_row("binomial_sum_identity[random]", errs[k], scales[k], 1e-10))
    x, y, n = 0.3 + 0.2j, -0.5 + 0.1j, 3
    rows.append(_row("binomial_sum_identity[i=j=0]",
                     abs(binomial_sum_lhs(0, 0, n, x, y) - y ** n / (1 - x * y)), abs(y ** n / (1 - x * y)), 1e-12))
    lhs = binomial_sum_lhs(1, 1, 0, 0.5, 0.5)
    rhs = binomial_sum_rhs(1, 1, 0, 0.5, 0.5)
    rows.append(_row("binomial_sum_identity[i=j=1,n=0,x=y=0.5]", abs(lhs - rhs), abs(rhs), 1e-10))

    worst = (0.0, 1.0)
    for _ in range(count):
        i, j = (int(v) for v in rng.integers(0, 7, size=2))
        x, y = _random_disk(rng, 0.9), _random_disk(rng, 0.9)
        a = sum(math.comb(i, r) * math.comb(i + j - r, i) * x ** (j - r) * y ** (i - r)
                / (1 - x * y) ** (i + j + 1 - r) for r in range(j + 1))
        b = sum(math.comb(j, r) * math.comb(i + j - r, j) * x ** (j - r) * y ** (i - r)
                / (1 - x * y) ** (i + j + 1 - r) for r in range(i + 1))
        if abs(a - b) / abs(b) > worst[0] / worst[1]:
            worst = (abs(a - b), abs(b))
        for r in range(min(i, j) + 1):
            if math.comb(i, r) * math.comb(i + j - r, i) != math.comb(j, r) * math.comb(i + j - r, j):
                worst = (1.0, 1.0)
    rows.append(_row("binomial_sum_symmetric_form", worst[0], worst[1], 1e-12))

    worst = (0.0, 1.0)
    for _ in range(count):
        K = int(rng.integers(2, 4))
        p = _random_poles(rng, K)
        mult = [int(v) for v in rng.integers(1, 4, size=K)]
        pd = PoleData(p, np.eye(1), tuple(np.ones((m, 1, 1)) for m in mult))
        ks = np.arange(0, 25)
        vals = p_scalar(pd, ks)
        nxt = p_scalar(pd, ks + 1)
        off = pd.offsets
        for nu in range(K):
            for mu in range(K):
                for i in range(1, mult[mu] + 1):
                    col = off[mu] + i - 1
                    lhs = nxt[:, col] - p[nu] * vals[:, col]
                    rhs = (p[mu] - p[nu]) * vals[:, col] + (vals[:, col - 1] if i > 1 else 0.0)
                    err = float(np.max(np.abs(lhs - rhs)))
                    scale = float(np.max(np.abs(vals[:, col])) + 1.0)
                    if err / scale > worst[0] / worst[1]:
                        worst = (err, scale)
    rows.append(_row("difference_identity", worst[0], worst[1], 1e-13))

    worst_cond = 1.0
    for _ in range(20):
        K = int(rng.integers(1, 4))
        p = _random_poles(rng, K, 0.9, 0.15)
        mult = [int(v) for v in rng.integers(1, 3, size=K)]
        pd = PoleData(p, np.eye(1), tuple(np.ones((m, 1, 1)) for m in mult))
        for N in (0, 1, 5):
            mat = p_scalar(pd, np.arange(N, N + pd.M)).T
            worst_cond = max(worst_cond, float(np.linalg.cond(mat)))
    rows.append(CheckRow("p_matrix_nonsingular[random poles]", worst_cond, 1e12,
                         worst_cond / 1e12, 1.0, bool(worst_cond < 1e12)))
    return rows


def model_checks(h, bb, n_values=(1, 2, 5, 10, 50), tol=1e-9):
    """Per-model structural checks: Lambda, stacked p, beta products, b forms, Neumann radius."""
    pd = bb.pd
    rows = []
    lam = bb.Lambda
    herm = 0.5 * (lam + lam.conj().T)
    rows.append(CheckRow("lambda_positive_definite", float(np.min(np.linalg.eigvalsh(herm))), 0.0,
                         0.0, 0.0, bool(np.min(np.linalg.eigvalsh(herm)) > 0)))
    rows.append(_row("lambda_hermitian", float(nx.opnorm(lam - lam.conj().T)), float(nx.opnorm(lam)), 1e-12))
    for N in (0, 1, 5):
        stack = np.concatenate([p_vec(pd, k) for k in range(N, N + pd.M)], axis=1)
        c = float(np.linalg.cond(stack))
        rows.append(CheckRow(f"p_stack_invertible[N={N}]", c, 1e12, c / 1e12, 1.0, bool(c < 1e12)))

    n0 = max(pd.m0, 1)
    kmax = n0 + 12
    pc = beta_coefficients(h, bb, kmax)
    rows.append(_row("beta_quadrature_vs_closed_form", pc.max_discrepancy(),
                     max(1.0, float(np.max(nx.opnorm(pc.closed_star)))), 1e-8))
    worst = (0.0, 1.0)
    for n in (pd.m0, pd.m0 + 1):
        pt = pi_theta(bb, n)
        for k in range(5):
            for ell in range(5):
                idx = n + k + ell + 1
                if idx > kmax:
                    continue
                lhs = pc.beta(idx).conj().T
                rhs = p_vec(pd, ell).T @ pt @ p_vec(pd, k)
                err = float(nx.opnorm(lhs - rhs))
                if err > worst[0]:
                    worst = (err, max(1.0, float(nx.opnorm(lhs))))
    rows.append(_row("beta_product_identity", worst[0], worst[1], tol))

    bs = b_sequences(h, bb, n0 + 1, 4, 4)
    rows.append(_row("b_recursion_vs_closed_form", bs.max_discrepancy(), 1.0, tol))

    rmax = 0.0
    for n in sorted(set([pd.m0] + [int(v) for v in n_values if v >= pd.m0])):
        G, Gt = g_matrices(bb, n)
        rmax = max(rmax, float(np.max(np.abs(np.linalg.eigvals(Gt @ G)))))
    rows.append(CheckRow("neumann_spectral_radius", rmax, 1.0, rmax, 1.0, bool(rmax < 1.0)))
    return rows


def rows_to_json(rows):
    return json.dumps([asdict(r) for r in rows], indent=2, sort_keys=True)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "lhs", "rhs", "ratio", "tol", "pass"])
    for r in rows:
        w.writerow([r.name, repr(r.lhs), repr(r.rhs), repr(r.ratio), repr(r.tol), str(r.passed).lower()])
    return buf.getvalue()
