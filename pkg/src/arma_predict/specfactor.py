"""The second outer factor ``h_sharp`` with ``w = h h^* = h_sharp^* h_sharp``.

The factor is computed numerically on an FFT grid by Wilson's Newton-type
iteration and then fitted to the partial-fraction ansatz that shares its
poles and multiplicities with ``h^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _numerics as nx
from .errors import (
    GridTooCoarse,
    IllConditionedBasis,
    InsufficientSharpData,
    NoConvergence,
    ResidualTooLarge,
)
from .model import DEFAULT_TOL, PoleData, transfer


def circle_grid(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class SharpFactor:
    """Numerical ``h_sharp`` sampled at ``exp(2 pi i g / grid_size)``.

    Attributes
    ----------
    samples : (N, d, d)
        ``h_sharp`` on the grid.
    taylor : (N // 2, d, d)
        Taylor coefficients of ``h_sharp`` at 0.
    gauge : (d, d)
        Unitary applied on the left of the raw Wilson output to make
        ``h_sharp(0)`` Hermitian positive definite.
    residual : float
        ``max_g ||h_sharp^* h_sharp - w|| / ||w||`` on the grid.
    poledata : PoleData or None
        Pole data of ``h_sharp^{-1}``, filled by :func:`extract_sharp_poledata`.
    """

    samples: np.ndarray
    taylor: np.ndarray
    gauge: np.ndarray
    residual: float
    iterations: int = 0
    identical_to_h: bool = False
    poledata: PoleData | None = None
    fit_residual: float = float("nan")

    @property
    def grid_size(self):
        return self.samples.shape[0]

    @property
    def d(self):
        return self.samples.shape[1]

    def __call__(self, z):
        """``h_sharp(z)`` for ``|z| < 1``; uses the fitted ansatz when present."""
        z = np.asarray(z, dtype=complex)
        if self.poledata is not None:
            return self.poledata.inverse(z)
        return nx.polyval(self.taylor, z)


def _spectral_density(hfun, n):
    z = circle_grid(n)
    hv = hfun(z)
    return hv @ np.conj(np.swapaxes(hv, -1, -2)), hv


def _plus(g):
    """Analytic part of grid samples, halving the constant term."""
    n = g.shape[0]
    coef = np.fft.fft(g, axis=0) / n
    coef[0] *= 0.5
    coef[n // 2 :] = 0.0
    return np.fft.ifft(coef, axis=0) * n


def wilson(S, tol=DEFAULT_TOL.factorization, max_iter=100):
    """Outer factor ``psi`` with ``psi psi^* = S`` on the grid.

    ``S`` holds Hermitian positive definite samples at the roots of unity.
    Returns ``(psi, residual, iterations)``.
    """
    n, d, _ = S.shape
    psi = np.broadcast_to(np.linalg.cholesky(S.mean(axis=0)), S.shape).copy()
    eye = np.eye(d)
    scale = np.max(nx.opnorm(S))
    res = np.inf
    for it in range(1, max_iter + 1):
        pinv = np.linalg.inv(psi)
        g = pinv @ S @ np.conj(np.swapaxes(pinv, -1, -2)) + eye
        psi = psi @ _plus(g)
        res = np.max(nx.opnorm(psi @ np.conj(np.swapaxes(psi, -1, -2)) - S)) / scale
        if res <= tol:
            return psi, res, it
    raise NoConvergence(f"Wilson iteration residual {res:.3g} after {max_iter} iterations", res)


def polar_unitary(a):
    """Unitary ``V`` of the polar decomposition ``a = V P``."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def _factorize_once(hfun, n, tol):
    w, _ = _spectral_density(hfun, n)
    rev = (-np.arange(n)) % n
    # factor the reversed density, then map back by h_sharp(z) = psi(1/z)^*
    psi, res, it = wilson(w[rev], tol)
    samples = np.conj(np.swapaxes(psi[rev], -1, -2))
    taylor = np.conj(np.swapaxes(np.fft.fft(psi, axis=0)[: n // 2] / n, -1, -2))
    gauge = polar_unitary(taylor[0]).conj().T
    samples = gauge @ samples
    taylor = gauge @ taylor
    check = np.conj(np.swapaxes(samples, -1, -2)) @ samples - w
    res = float(np.max(nx.opnorm(check)) / np.max(nx.opnorm(w)))
    return samples, taylor, gauge, res, it


def factorize_sharp(h, grid_size=1024, tol=DEFAULT_TOL.factorization, check_grid=True):
    """Numerical ``h_sharp`` from the transfer function ``h``.

    Parameters
    ----------
    h : RationalMatrixFunction or PoleData
        For pole data the transfer function is its inverse.
    grid_size : int
        Power of two, at least 256.
    tol : float
        Factorization residual target; also the grid-refinement tolerance.
    check_grid : bool
        Re-run on the doubled grid and raise :class:`GridTooCoarse` if the
        samples move by more than ``tol`` (relative), or if the iteration
        stalls on this grid but not on the doubled one.

    Notes
    -----
    For ``d = 1`` the factor is ``h`` itself and no iteration is run.
    """
    n = int(grid_size)
    if n < 256 or n & (n - 1):
        raise ValueError("grid_size must be a power of two >= 256")
    hfun = transfer(h)
    z = circle_grid(n)
    probe = hfun(z[:1])
    d = probe.shape[-1]
    if d == 1:
        samples = hfun(z)
        taylor = np.fft.fft(samples, axis=0)[: n // 2] / n
        return SharpFactor(samples, taylor, np.eye(1, dtype=complex), 0.0, 0, identical_to_h=True)
    try:
        samples, taylor, gauge, res, it = _factorize_once(hfun, n, tol)
    except NoConvergence as exc:
        # aliasing on a coarse grid leaves a residual floor; a finer grid lowers it
        if not check_grid:
            raise
        try:
            _factorize_once(hfun, 2 * n, tol)
        except NoConvergence as fine:
            if not fine.residual < 0.1 * exc.residual:
                raise exc from None
        raise GridTooCoarse(f"Wilson iteration stalls at {exc.residual:.3g} on {n} points "
                            "and improves on the doubled grid") from None
    if check_grid:
        fine = _factorize_once(hfun, 2 * n, tol)[0][::2]
        diff = np.max(nx.opnorm(fine - samples)) / np.max(nx.opnorm(samples))
        if diff > max(tol, 1e3 * res):
            raise GridTooCoarse(f"doubling the grid moved h_sharp by {diff:.3g}")
    return SharpFactor(samples, taylor, gauge, res, it)


def _ansatz_basis(pd, z):
    """Columns ``1, (1 - conj(p) z)^{-j}, z^j`` in the pole-data block order."""
    cols = [np.ones_like(z)]
    for p, m in zip(pd.poles, pd.mult):
        base = 1.0 / (1.0 - np.conj(p) * z)
        for j in range(1, m + 1):
            cols.append(base ** j)
    for j in range(1, pd.m0 + 1):
        cols.append(z ** j)
    return np.stack(cols, axis=1)


def extract_sharp_poledata(sf, pd, tol=DEFAULT_TOL.fit, cond_max=1e10):
    """Fit pole data of ``h_sharp^{-1}`` over the poles of ``h^{-1}``.

    Solves the least-squares problem
    ``rho0 + sum (1 - conj(p) z)^{-j} rho_j + sum z^j rho0j = -h_sharp(z)^{-1}``
    at every grid point.  A small residual is exactly the statement that
    ``h_sharp^{-1}`` has the same poles and multiplicities as ``h^{-1}``.

    Returns
    -------
    SharpFactor
        Copy of ``sf`` with ``poledata`` and ``fit_residual`` filled in.
    """
    if sf.identical_to_h:
        return replace(sf, poledata=pd, fit_residual=0.0)
    d = sf.d
    z = circle_grid(sf.grid_size)
    target = -np.linalg.inv(sf.samples).reshape(z.size, d * d)
    basis = _ansatz_basis(pd, z)
    colnorm = np.linalg.norm(basis, axis=0)
    bn = basis / colnorm
    cond = np.linalg.cond(bn.conj().T @ bn)
    if cond > cond_max:
        raise IllConditionedBasis(f"normal matrix condition {cond:.3g} exceeds {cond_max:.3g}")
    coef, *_ = np.linalg.lstsq(bn, target, rcond=None)
    coef = coef / colnorm[:, None]
    resid = np.linalg.norm(basis @ coef - target) / np.linalg.norm(target)
    if resid > tol:
        raise ResidualTooLarge(f"pole-data fit residual {resid:.3g} exceeds {tol:.3g}")
    mats = coef.reshape(-1, d, d)
    off = 1 + np.concatenate([[0], np.cumsum(pd.mult)]).astype(int)
    rho = tuple(mats[off[k] : off[k + 1]] for k in range(pd.K))
    sharp = PoleData(pd.poles, mats[0], rho, mats[off[-1] :]).validate(DEFAULT_TOL.zero)
    return replace(sf, poledata=sharp, fit_residual=float(resid))


def sharp_from_poledata(h, pd_sharp, grid_size=1024, tol=1e-9):
    """Wrap supplied ``h_sharp^{-1}`` pole data, checking ``h_sharp^* h_sharp = w``."""
    if pd_sharp is None:
        raise InsufficientSharpData("no pole data for h_sharp^{-1} supplied")
    pd_sharp.validate(DEFAULT_TOL.zero)
    n = int(grid_size)
    w, _ = _spectral_density(transfer(h), n)
    samples = pd_sharp.inverse(circle_grid(n))
    check = np.conj(np.swapaxes(samples, -1, -2)) @ samples - w
    res = float(np.max(nx.opnorm(check)) / np.max(nx.opnorm(w)))
    if res > tol:
        raise ResidualTooLarge(f"supplied h_sharp does not reproduce w (residual {res:.3g})")
    taylor = np.fft.fft(samples, axis=0)[: n // 2] / n
    return SharpFactor(samples, taylor, np.eye(pd_sharp.d, dtype=complex), res, 0,
                       poledata=pd_sharp, fit_residual=0.0)


@dataclass(frozen=True)
class CorrespondenceReport:
    """Residuals of ``rho_{mu,m} h_sharp(p)^* = h(p)^* rho^sharp_{mu,m}``.

    ``residuals[mu]`` is relative; index 0 is the polynomial part (``p = 0``)
    and is present only when ``m0 >= 1``.
    """

    residuals: dict
    tol: float

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self):
        return self.max_residual <= self.tol


def verify_pole_correspondence(h, sf, pd, pd_sharp, tol=1e-8):
    """Check the leading-residue relation between ``h^{-1}`` and ``h_sharp^{-1}``."""
    hfun = transfer(h)
    hs = pd_sharp.inverse
    out = {}
    items = [(mu + 1, p, pd.rho[mu][-1], pd_sharp.rho[mu][-1]) for mu, p in enumerate(pd.poles)]
    if pd.m0 >= 1:
        items.insert(0, (0, 0.0, pd.rho0j[-1], pd_sharp.rho0j[-1]))
    for mu, p, r, rs in items:
        zp = np.array([p], dtype=complex)
        hp = hfun(zp)[0]
        hsp = hs(zp)[0]
        lhs = r @ hsp.conj().T
        rhs = hp.conj().T @ rs
        scale = nx.opnorm(r) * nx.opnorm(hsp) + nx.opnorm(hp) * nx.opnorm(rs)
        out[mu] = float(nx.opnorm(lhs - rhs) / scale)
    return CorrespondenceReport(out, tol)
