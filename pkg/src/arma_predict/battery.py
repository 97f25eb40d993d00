"""Named test models used by the acceptance suite and the CLI examples."""
from __future__ import annotations

import numpy as np

from .model import PoleData, RationalMatrixFunction, check_condition_C, from_arma_polynomials


def ma1(b=0.5):
    """Univariate ``h(z) = 1 + b z``."""
    return RationalMatrixFunction([[[1.0]], [[b]]], [1.0])


def arma_with_polynomial_part():
    """``h = (1 + 0.5 z) / ((1 - 0.3 z)(1 - 0.2 z))``; ``h^{-1}`` has ``m0 = 1``."""
    return from_arma_polynomials([[[1.0]], [[-0.5]], [[0.06]]], [[[1.0]], [[0.5]]], [[1.0]])


def lower_triangular(p=0.4):
    """Bivariate ``h = [[1, 0], [1 / (1 - conj(p) z), 1]]`` with a known ``h_sharp``.

    As an ARMA recursion: ``Phi = (1 - conj(p) z) I`` and
    ``Psi = [[1 - conj(p) z, 0], [1, 1 - conj(p) z]]``.
    """
    pb = np.conj(p)
    phi = [np.eye(2), -pb * np.eye(2)]
    psi = [np.array([[1.0, 0.0], [1.0, 1.0]]), -pb * np.eye(2)]
    return from_arma_polynomials(phi, psi, np.eye(2))


def lower_triangular_sharp(p=0.4):
    """The closed-form ``h_sharp`` of :func:`lower_triangular` as a callable."""
    q = abs(p) ** 2
    r = 1.0 / np.sqrt(1 - q + q * q)

    def hs(z):
        z = np.asarray(z, dtype=complex)
        u = 1.0 / (1.0 - np.conj(p) * z)
        out = np.empty(z.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = 1 - q
        out[..., 0, 1] = 1
        out[..., 1, 0] = -1 + (1 - q) * u
        out[..., 1, 1] = -q + u
        return r * out

    return hs


def ar1(a=0.5):
    """Univariate AR(1): ``h = 1 / (1 - a z)``; no poles in ``h^{-1}``."""
    return RationalMatrixFunction([[[1.0]]], [1.0, -a])


def equal_modulus_ma2(r=0.6, angle=1.0):
    """``h^{-1}`` with two conjugate poles of equal modulus ``r``."""
    z1 = np.exp(1j * angle) / r
    c = np.polynomial.polynomial.polyfromroots([z1, np.conj(z1)])
    c = c / c[0]
    return RationalMatrixFunction(c.real.reshape(-1, 1, 1), [1.0])


def random_poledata(rng, d=None, K=None, max_mult=2, moduli=(0.2, 0.8), m0=None, margin=1.2):
    """A random stable model given by its partial-fraction data.

    Pole moduli are distinct (at least 0.05 apart) so a dominant pole exists.
    The draw is repeated until ``det h^{-1}`` has no zeros in ``|z| < margin``.
    """
    d = int(rng.integers(1, 4)) if d is None else d
    K = int(rng.integers(1, 4)) if K is None else K
    m0 = int(rng.integers(0, 2)) if m0 is None else m0
    while True:
        mods = np.sort(rng.uniform(*moduli, size=K))[::-1]
        if K > 1 and np.min(-np.diff(mods)) < 0.05:
            continue
        poles = mods * np.exp(2j * np.pi * rng.random(K))
        mult = rng.integers(1, max_mult + 1, size=K)

        def cmat(scale):
            return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d)

        rho0 = -np.eye(d) + cmat(0.2)
        rho = tuple(np.array([cmat(0.5) for _ in range(m)]) for m in mult)
        rho0j = np.array([cmat(0.3) for _ in range(m0)]).reshape(m0, d, d)
        pd = PoleData(poles, rho0, rho, rho0j)
        try:
            pd.validate()
        except Exception:
            continue
        rep = check_condition_C(pd, tol=margin - 1.0)
        if rep.passed:
            return pd


def battery(seed=20240601, n_random=5):
    """The standard list of ``(name, h)`` pairs."""
    rng = np.random.default_rng(seed)
    models = [
        ("ma1", ma1(0.5)),
        ("arma_m0_1", arma_with_polynomial_part()),
        ("lower_triangular", lower_triangular(0.4)),
    ]
    dims = (1, 2, 3, 2, 3)
    for i in range(n_random):
        models.append((f"random_{i}", random_poledata(rng, d=dims[i % len(dims)])))
    return models
