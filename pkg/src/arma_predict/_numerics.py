"""Small numerical helpers shared by the modules.

Polynomials are stored with ascending coefficients throughout: ``c[k]`` is
the coefficient of ``z**k``.  Polynomial matrices are arrays of shape
``(deg + 1, d, d)``.
"""
from __future__ import annotations

import numpy as np

from .errors import ArmaError


def as_cmatrix(x, shape=None, name="matrix"):
    """Return ``x`` as a finite 2-D complex array."""
    a = np.array(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {a.shape}")
    if shape is not None and a.shape != tuple(shape):
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def opnorm(a):
    """Spectral norm over the trailing two axes."""
    a = np.asarray(a)
    if a.shape[-1] == 1 or a.shape[-2] == 1:
        return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


def binom(n, k):
    """Binomial coefficient C(n, k) in floating point.

    ``n`` may be an integer array, ``k`` a small non-negative integer.
    Uses the multiplicative recurrence so large ``n`` does not overflow
    the way factorials would.  Returns 0 where ``n < k``.
    """
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for t in range(1, int(k) + 1):
        out = out * (n - k + t) / t
    return np.where(n >= k, out, 0.0)


def trim(c, tol=0.0):
    """Drop trailing (highest-degree) coefficients with norm <= tol * scale."""
    c = np.asarray(c)
    if c.shape[0] == 0:
        return c
    norms = np.abs(c).reshape(c.shape[0], -1).max(axis=1)
    scale = norms.max()
    keep = c.shape[0]
    while keep > 1 and norms[keep - 1] <= tol * scale:
        keep -= 1
    return c[:keep]


def polyval(c, z):
    """Evaluate scalar polynomial(s) with ascending coefficients ``c``.

    ``c`` has shape ``(deg + 1, ...)``; trailing axes are broadcast after
    the axes of ``z``.
    """
    c = np.asarray(c)
    z = np.asarray(z, dtype=complex)
    zz = z.reshape(z.shape + (1,) * (c.ndim - 1))
    out = np.zeros(z.shape + c.shape[1:], dtype=complex)
    for ck in c[::-1]:
        out = out * zz + ck
    return out


def next_pow2(n):
    return 1 << max(int(np.ceil(np.log2(max(n, 1)))), 0)


def interpolate_on_circle(fun, degree, radius=1.0):
    """Coefficients of a polynomial of at most ``degree`` from samples.

    ``fun`` maps an array of points to an array of values with leading
    axis matching the points.  Sampling at roots of unity makes the
    inverse DFT exact up to rounding.
    """
    n = next_pow2(degree + 1)
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(fun(z))
    coef = np.fft.fft(vals, axis=0) / n
    scale = radius ** np.arange(n)
    coef = coef / scale.reshape((n,) + (1,) * (coef.ndim - 1))
    return coef[: degree + 1]


def matrix_det_poly(coeffs):
    """Coefficients of ``det P(z)`` for a polynomial matrix ``P``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.shape[1]
    deg = d * (coeffs.shape[0] - 1)
    return interpolate_on_circle(lambda z: np.linalg.det(polyval(coeffs, z)), deg)


def adjugate(a):
    """Adjugate of a stack of square matrices, via cofactors."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[-1]
    if d == 1:
        return np.ones_like(a)
    out = np.empty_like(a)
    idx = np.arange(d)
    for i in range(d):
        for j in range(d):
            rows = idx[idx != j]
            cols = idx[idx != i]
            minor = a[..., rows[:, None], cols[None, :]]
            out[..., i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return out


def poly_roots(c, tol=1e-14):
    """Roots of a scalar polynomial with ascending coefficients."""
    c = trim(np.asarray(c, dtype=complex), tol)
    if c.shape[0] <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def cluster_roots(roots, tol):
    """Group roots by single linkage within a relative distance ``tol``.

    Returns ``(centers, multiplicities)``.  The centre of a cluster is the
    mean of its members, which is far better conditioned than any single
    member of a perturbed multiple root.
    """
    roots = np.asarray(roots, dtype=complex)
    n = roots.size
    label = -np.ones(n, dtype=int)
    cur = 0
    for i in range(n):
        if label[i] >= 0:
            continue
        stack = [i]
        label[i] = cur
        while stack:
            k = stack.pop()
            near = np.abs(roots - roots[k]) <= tol * max(1.0, abs(roots[k]))
            for m in np.nonzero(near & (label < 0))[0]:
                label[m] = cur
                stack.append(m)
        cur += 1
    centers = np.array([roots[label == c].mean() for c in range(cur)], dtype=complex)
    mult = np.array([int(np.sum(label == c)) for c in range(cur)], dtype=int)
    order = np.lexsort((centers.imag, centers.real, np.abs(centers)))
    return centers[order], mult[order]


def deflate(c, r):
    """Divide a polynomial (trailing axes allowed) by a linear factor at ``r``.

    For ``|r| > 1`` the factor is ``1 - z/r`` and the recurrence runs from
    the constant term; otherwise the factor is ``z - r`` and it runs from
    the top.  Either direction is the forward-stable one for that root.
    Returns ``(quotient, remainder)``.
    """
    c = np.asarray(c, dtype=complex)
    n = c.shape[0] - 1
    if n < 1:
        raise ArmaError("cannot deflate a constant polynomial")
    q = np.zeros((n,) + c.shape[1:], dtype=complex)
    if abs(r) > 1:
        q[0] = c[0]
        for k in range(1, n):
            q[k] = c[k] + q[k - 1] / r
        rem = c[n] + q[n - 1] / r
    else:
        q[n - 1] = c[n]
        for k in range(n - 1, 0, -1):
            q[k - 1] = c[k] + r * q[k]
        rem = c[0] + r * q[0]
    return q, rem


def contour_taylor(fun, center, radius, order, nodes=64):
    """Taylor coefficients ``f^(s)(center)/s!`` for ``s = 0..order``.

    Trapezoidal rule on a circle; ``fun`` must be analytic on a disk
    slightly larger than ``radius`` and return an array with leading axis
    over the nodes.
    """
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = np.asarray(fun(center + radius * w))
    coef = np.fft.fft(vals, axis=0) / nodes
    s = np.arange(order + 1)
    scale = radius ** s
    return coef[: order + 1] / scale.reshape((order + 1,) + (1,) * (coef.ndim - 1))


def contour_laurent(fun, center, radius, orders, nodes):
    """Principal-part Laurent coefficients of ``fun`` about ``center``.

    Returns ``L[j-1]`` = coefficient of ``(z - center)**(-j)`` for
    ``j = 1..orders``.
    """
    phi = 2 * np.pi * np.arange(nodes) / nodes
    u = radius * np.exp(1j * phi)
    vals = np.asarray(fun(center + u))
    out = []
    for j in range(1, orders + 1):
        wj = (u ** j).reshape((nodes,) + (1,) * (vals.ndim - 1))
        out.append(np.mean(vals * wj, axis=0))
    return np.array(out)


def geometric_envelope(norms, window=10, floor=1e-15):
    """Fit ``norms[k] <= C * r**k`` using the last ``window`` terms.

    Terms below ``floor`` times the largest norm are rounding noise and are
    ignored, so the window is the last stretch of genuine decay.
    Returns ``(C, r)``; ``C == 0`` when the tail is identically zero.
    The rate comes from a log-linear fit and ``C`` is then the smallest
    constant making the bound hold on the window.
    """
    norms = np.asarray(norms, dtype=float)
    k = np.arange(norms.size)
    big = np.nonzero(norms > floor * max(norms.max(initial=0.0), 1e-300))[0]
    if big.size == 0:
        return 0.0, 0.0
    keep = k <= big[-1]
    tail_k = k[keep][-window:]
    tail = norms[keep][-window:]
    if np.all(tail <= 1e-300):
        return 0.0, 0.0
    pos = tail > 1e-300
    if pos.sum() < 2:
        return float(tail.max() / 1e-300), 1.0
    slope = np.polyfit(tail_k[pos], np.log(tail[pos]), 1)[0]
    r = float(np.exp(slope))
    # an envelope fit must not undercut the sharpest observed decay pair
    with np.errstate(divide="ignore"):
        r = max(r, float((tail[pos][-1] / tail[pos][0]) ** (1.0 / max(tail_k[pos][-1] - tail_k[pos][0], 1))))
    if r >= 1:
        return float(tail.max()), r
    C = float(np.max(tail / r ** tail_k))
    return C, r
