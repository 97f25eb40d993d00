"""ARMA transfer functions, condition (C), and the pole form of ``h^{-1}``.

An ARMA model is described by an outer rational matrix function ``h`` with
``w = h h^*`` on the unit circle.  Two representations are used:

* :class:`RationalMatrixFunction` -- a polynomial matrix over a scalar
  polynomial, the natural result of ``Phi(z)^{-1} Psi(z) Sigma^{1/2}``;
* :class:`PoleData` -- the partial-fraction form

  .. math::

      h(z)^{-1} = -\\rho_0 - \\sum_{\\mu}\\sum_{j=1}^{m_\\mu}
          (1 - \\bar p_\\mu z)^{-j}\\rho_{\\mu,j} - \\sum_{j=1}^{m_0} z^j\\rho_{0,j},

  which is what the predictor formulas consume.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .errors import (
    DegenerateLeadingResidue,
    InsufficientSharpData,
    NearPole,
    NotStable,
    PoleClusterAmbiguous,
    SingularSigma,
    TailNotConverged,
)


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used across the library.

    ``zero`` is the single threshold for every "is this nonzero" decision
    and for the margin around the unit circle.
    """

    zero: float = 1e-9
    root_merge: float = 1e-4
    residue_agree: float = 1e-11
    residue_nodes: int = 256
    series: float = 1e-15
    factorization: float = 1e-11
    fit: float = 1e-9


DEFAULT_TOL = Tolerances()


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RationalMatrixFunction:
    """``h(z) = N(z) / q(z)`` with ``N`` a d x d polynomial matrix.

    ``numerator`` has shape ``(deg + 1, d, d)`` and ``denominator`` shape
    ``(deg + 1,)``, both with ascending coefficients.
    """

    numerator: np.ndarray
    denominator: np.ndarray

    def __post_init__(self):
        num = np.array(self.numerator, dtype=complex)
        if num.ndim == 2:
            num = num[None]
        den = np.atleast_1d(np.array(self.denominator, dtype=complex))
        if num.ndim != 3 or num.shape[1] != num.shape[2]:
            raise ValueError(f"numerator must have shape (k, d, d), got {num.shape}")
        if den.ndim != 1 or not np.any(den != 0):
            raise ValueError("denominator must be a nonzero 1-D coefficient array")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "numerator", _readonly(nx.trim(num)))
        object.__setattr__(self, "denominator", _readonly(nx.trim(den)))

    @property
    def d(self):
        return self.numerator.shape[1]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return nx.polyval(self.numerator, z) / nx.polyval(self.denominator, z)[..., None, None]

    def inverse(self, z):
        """``h(z)^{-1}`` computed as ``q(z) N(z)^{-1}``."""
        z = np.asarray(z, dtype=complex)
        return nx.polyval(self.denominator, z)[..., None, None] * np.linalg.inv(
            nx.polyval(self.numerator, z))

    def poles(self):
        return nx.poly_roots(self.denominator)

    def det_numerator(self):
        return nx.trim(nx.matrix_det_poly(self.numerator), 1e-14)

    def reduced(self, tol=DEFAULT_TOL.zero, merge_tol=DEFAULT_TOL.root_merge):
        """Cancel linear factors common to the denominator and all entries."""
        num = np.array(self.numerator)
        den = np.array(self.denominator)
        centers, mult = nx.cluster_roots(nx.poly_roots(den), merge_tol)
        for r, m in zip(centers, mult):
            for _ in range(m):
                if den.shape[0] < 2 or num.shape[0] < 2:
                    break
                powers = np.maximum(1.0, abs(r)) ** np.arange(num.shape[0])
                scale = np.max(np.tensordot(powers, np.abs(num), axes=1))
                if np.max(np.abs(nx.polyval(num, r))) > tol * scale:
                    break
                num, _ = nx.deflate(num, r)
                den, _ = nx.deflate(den, r)
        if abs(den[0]) > 0:
            num, den = num / den[0], den / den[0]
        return RationalMatrixFunction(num, den)


@dataclass(frozen=True)
class PoleData:
    """Partial-fraction data of ``h^{-1}``.

    Parameters
    ----------
    poles : (K,) complex
        The points ``p_mu`` in the punctured unit disk.  ``h^{-1}`` has its
        poles at ``1 / conj(p_mu)``.
    rho0 : (d, d) complex
    rho : sequence of (m_mu, d, d) arrays
        ``rho[mu][j - 1]`` is the residue matrix of ``(1 - conj(p_mu) z)^{-j}``.
    rho0j : (m0, d, d) complex
        Coefficients of the polynomial part ``z^j``.
    """

    poles: np.ndarray
    rho0: np.ndarray
    rho: tuple
    rho0j: np.ndarray = field(default=None)

    def __post_init__(self):
        rho0 = nx.as_cmatrix(self.rho0, name="rho0")
        d = rho0.shape[0]
        poles = np.atleast_1d(np.array(self.poles, dtype=complex))
        rho = tuple(_readonly(np.reshape(r, (-1, d, d))) for r in self.rho)
        if len(rho) != poles.size:
            raise ValueError("one residue block per pole is required")
        if any(r.shape[0] < 1 for r in rho):
            raise ValueError("every pole needs multiplicity >= 1")
        rho0j = np.zeros((0, d, d)) if self.rho0j is None else np.reshape(self.rho0j, (-1, d, d))
        object.__setattr__(self, "poles", _readonly(poles))
        object.__setattr__(self, "rho0", _readonly(rho0))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho0j", _readonly(rho0j))

    @property
    def d(self):
        return self.rho0.shape[0]

    @property
    def K(self):
        return self.poles.size

    @property
    def m0(self):
        return self.rho0j.shape[0]

    @property
    def mult(self):
        return tuple(r.shape[0] for r in self.rho)

    @property
    def M(self):
        return int(sum(self.mult))

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.mult)]).astype(int)

    def block_index(self):
        """List of ``(mu, i)`` pairs (0-based mu, 1-based i) in block order."""
        return [(mu, i) for mu, m in enumerate(self.mult) for i in range(1, m + 1)]

    def residue_stack(self):
        """All ``rho_{mu, j}`` in block order, shape ``(M, d, d)``."""
        if self.K == 0:
            return np.zeros((0, self.d, self.d), dtype=complex)
        return np.concatenate(self.rho, axis=0)

    @property
    def a0(self):
        return self.rho0 + self.residue_stack().sum(axis=0)

    def __call__(self, z):
        """Right-hand side of the partial-fraction form, i.e. ``h^{-1}(z)``."""
        z = np.asarray(z, dtype=complex)
        out = -np.broadcast_to(self.rho0, z.shape + (self.d, self.d)).astype(complex)
        for p, r in zip(self.poles, self.rho):
            base = 1.0 / (1.0 - np.conj(p) * z)
            fac = np.ones_like(z)
            for rj in r:
                fac = fac * base
                out = out - fac[..., None, None] * rj
        zj = np.ones_like(z)
        for rj in self.rho0j:
            zj = zj * z
            out = out - zj[..., None, None] * rj
        return out

    def inverse(self, z):
        """``h(z)`` obtained by inverting the partial-fraction form."""
        return np.linalg.inv(self(z))

    def inverse_poles(self):
        """Locations of the poles of ``h^{-1}``: ``1 / conj(p_mu)``."""
        return 1.0 / np.conj(self.poles)

    def numerator_poly(self):
        """``P(z) = Q(z) h^{-1}(z)`` with ``Q = prod (1 - conj(p) z)^m``."""
        deg = self.M + self.m0
        return nx.interpolate_on_circle(lambda z: self.denominator_poly_eval(z)[:, None, None] * self(z), deg)

    def denominator_poly_eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for p, m in zip(self.poles, self.mult):
            out = out * (1.0 - np.conj(p) * z) ** m
        return out

    def tilde(self):
        """Pole data of ``z -> {self^{-1}(conj z)}^*``'s inverse.

        Applied to the data of ``h_sharp^{-1}`` this yields the data of
        ``h_tilde^{-1}``, whose pole factors are ``(1 - p z)^{-j}`` and whose
        coefficients are the conjugate transposes.
        """
        ct = lambda a: np.conj(np.swapaxes(a, -1, -2))
        return PoleData(np.conj(self.poles), ct(self.rho0), tuple(ct(r) for r in self.rho), ct(self.rho0j))

    def reordered(self, order):
        order = list(order)
        return PoleData(self.poles[order], self.rho0, tuple(self.rho[i] for i in order), self.rho0j)

    def right_multiplied(self, u):
        """Data of ``h^{-1} u``; used for constant-unitary gauge changes."""
        u = nx.as_cmatrix(u, (self.d, self.d))
        return PoleData(self.poles, self.rho0 @ u, tuple(r @ u for r in self.rho), self.rho0j @ u)

    def validate(self, tol=DEFAULT_TOL.zero):
        """Check the structural invariants; raise on violation."""
        p = self.poles
        if np.any(np.abs(p) >= 1) or np.any(np.abs(p) <= 0):
            raise NotStable(f"poles must satisfy 0 < |p| < 1, got {p}")
        for i in range(p.size):
            for j in range(i + 1, p.size):
                if abs(p[i] - p[j]) <= tol:
                    raise PoleClusterAmbiguous(f"poles {p[i]} and {p[j]} coincide")
        for mu, r in enumerate(self.rho):
            if nx.opnorm(r[-1]) <= tol:
                raise DegenerateLeadingResidue(f"leading residue of pole {mu} vanishes")
        if self.m0 >= 1 and nx.opnorm(self.rho0j[-1]) <= tol:
            raise DegenerateLeadingResidue("leading polynomial coefficient vanishes")
        return self


def transfer(h):
    """Callable ``z -> h(z)`` for either representation."""
    if isinstance(h, RationalMatrixFunction):
        return h
    if isinstance(h, PoleData):
        return h.inverse
    raise TypeError(f"expected RationalMatrixFunction or PoleData, got {type(h).__name__}")


def transfer_inverse(h):
    """Callable ``z -> h(z)^{-1}`` for either representation."""
    if isinstance(h, RationalMatrixFunction):
        return h.inverse
    if isinstance(h, PoleData):
        return h
    raise TypeError(f"expected RationalMatrixFunction or PoleData, got {type(h).__name__}")


# ---------------------------------------------------------------------------
# construction and validation


def _poly_matrix(x, name):
    a = np.array(x, dtype=complex)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"{name} must have shape (k, d, d), got {a.shape}")
    return a


def from_arma_polynomials(phi, psi, sigma_half, tol=DEFAULT_TOL.zero, check=True):
    """Transfer function ``h = Phi^{-1} Psi Sigma^{1/2}`` of an ARMA recursion.

    Parameters
    ----------
    phi, psi : array_like, shape (k, d, d)
        Coefficient matrices of the autoregressive and moving-average
        polynomials, ``phi[k]`` multiplying ``z**k``.
    sigma_half : array_like, shape (d, d)
        A square root of the innovation covariance.
    check : bool
        Raise :class:`NotStable` when ``det Phi`` or ``det Psi`` vanishes in
        the closed unit disk.

    Returns
    -------
    RationalMatrixFunction
        Numerator ``adj(Phi) Psi Sigma^{1/2}`` over ``det Phi``, reduced.
    """
    phi = _poly_matrix(phi, "phi")
    psi = _poly_matrix(psi, "psi")
    d = phi.shape[1]
    if psi.shape[1] != d:
        raise ValueError("phi and psi must have the same dimension")
    s = nx.as_cmatrix(sigma_half, (d, d), "sigma_half")
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= tol * max(sv[0], 1.0):
        raise SingularSigma("sigma_half is not invertible")
    if check:
        for name, poly in (("det Phi", phi), ("det Psi", psi)):
            roots = nx.poly_roots(nx.matrix_det_poly(poly))
            inside = roots[np.abs(roots) <= 1 + tol]
            if inside.size:
                raise NotStable(f"{name} has roots in the closed unit disk: {inside}")
    r, sdeg = phi.shape[0] - 1, psi.shape[0] - 1
    num = nx.interpolate_on_circle(
        lambda z: nx.adjugate(nx.polyval(phi, z)) @ nx.polyval(psi, z) @ s, (d - 1) * r + sdeg)
    den = nx.matrix_det_poly(phi)
    return RationalMatrixFunction(nx.trim(num, 1e-14), nx.trim(den, 1e-14)).reduced(tol)


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of :func:`check_condition_C`."""

    poles_in_disk: np.ndarray
    det_zeros_in_disk: np.ndarray

    @property
    def passed(self):
        return self.poles_in_disk.size == 0 and self.det_zeros_in_disk.size == 0

    def describe(self):
        if self.passed:
            return "condition (C) holds"
        parts = []
        if self.poles_in_disk.size:
            parts.append("poles of h in closed unit disk at " + _fmt_points(self.poles_in_disk))
        if self.det_zeros_in_disk.size:
            parts.append("zeros of det h in closed unit disk at " + _fmt_points(self.det_zeros_in_disk))
        return "condition (C) violated: " + "; ".join(parts)


def _fmt_points(z):
    return ", ".join(f"{v.real:.6g}{v.imag:+.6g}j" for v in np.atleast_1d(z))


def check_condition_C(h, tol=DEFAULT_TOL.zero, merge_tol=DEFAULT_TOL.root_merge):
    """Check that ``h`` has no poles and ``det h`` no zeros in the closed disk.

    Returns a :class:`ConditionReport`; never raises on violation.
    """
    if isinstance(h, PoleData):
        # zeros of det h sit at the poles of h^{-1}: 1/conj(p)
        zp = h.inverse_poles()
        det_zeros = zp[np.abs(zp) <= 1 + tol]
        droots = nx.poly_roots(nx.matrix_det_poly(h.numerator_poly()))
        poles = droots[np.abs(droots) <= 1 + tol]
        return ConditionReport(np.sort_complex(poles), np.sort_complex(det_zeros))
    h = h.reduced(tol, merge_tol)
    q_roots = h.poles()
    poles = q_roots[np.abs(q_roots) <= 1 + tol]
    centers, mult = nx.cluster_roots(nx.poly_roots(h.det_numerator()), merge_tol)
    inside = np.abs(centers) <= 1 + tol
    centers, mult = centers[inside], mult[inside].copy()
    # det h = det N / q^d: a root of q inside the disk cancels up to d zeros
    for r in poles:
        if centers.size:
            k = int(np.argmin(np.abs(centers - r)))
            if abs(centers[k] - r) <= merge_tol * max(1.0, abs(r)):
                mult[k] = max(mult[k] - h.d, 0)
    zeros = np.repeat(centers, mult)
    return ConditionReport(np.sort_complex(poles), np.sort_complex(zeros))


def _pick_radius(moduli, candidates=(2.0, 1.5, 3.0, 2.5, 1.75, 4.0, 1.25)):
    if len(moduli) == 0:
        return candidates[0]
    moduli = np.asarray(moduli)
    gaps = [np.min(np.abs(moduli - R)) / R for R in candidates]
    return candidates[int(np.argmax(gaps))]


def decompose_inverse(h, tol=DEFAULT_TOL):
    """Partial-fraction decomposition of ``h^{-1}``.

    Pole locations are the zeros of ``det h`` outside the closed unit disk.
    Laurent coefficients are obtained by trapezoidal contour integrals around
    each location, doubling the node count until two estimates agree; the
    polynomial part is read off by interpolating the remainder on a circle
    well away from all poles.

    Parameters
    ----------
    h : RationalMatrixFunction or PoleData
        A :class:`PoleData` input is validated and returned unchanged.
    tol : Tolerances

    Returns
    -------
    PoleData
    """
    if isinstance(h, PoleData):
        return h.validate(tol.zero)
    rep = check_condition_C(h, tol.zero, tol.root_merge)
    if not rep.passed:
        raise NotStable(rep.describe())
    h = h.reduced(tol.zero, tol.root_merge)
    d = h.d
    finv = h.inverse
    centers, mult = nx.cluster_roots(nx.poly_roots(h.det_numerator()), tol.root_merge)
    for i in range(centers.size):
        for j in range(i + 1, centers.size):
            if abs(centers[i] - centers[j]) <= 10 * tol.root_merge * max(1.0, abs(centers[i])):
                raise PoleClusterAmbiguous(
                    f"zeros of det h at {centers[i]} and {centers[j]} are too close to separate")

    poles, rhos = [], []
    for idx, (z0, m) in enumerate(zip(centers, mult)):
        others = np.delete(centers, idx)
        sep = np.min(np.abs(others - z0)) if others.size else np.inf
        radius = min(0.25 * sep, 0.25 * (abs(z0) - 1.0))
        nodes = tol.residue_nodes
        prev = nx.contour_laurent(finv, z0, radius, int(m), nodes)
        for _ in range(8):
            nodes *= 2
            cur = nx.contour_laurent(finv, z0, radius, int(m), nodes)
            scale = max(np.max(np.abs(cur)), 1e-300)
            done = np.max(np.abs(cur - prev)) <= tol.residue_agree * scale
            prev = cur
            if done:
                break
        laurent = prev
        ring = finv(z0 + radius * np.exp(2j * np.pi * np.arange(64) / 64))
        fscale = np.max(nx.opnorm(ring))
        order = 0
        for j in range(1, int(m) + 1):
            if nx.opnorm(laurent[j - 1]) * radius ** (-j) > tol.zero * fscale:
                order = j
        if order == 0:
            continue
        pbar = 1.0 / z0
        rho = np.array([-((-pbar) ** j) * laurent[j - 1] for j in range(1, order + 1)])
        if nx.opnorm(rho[-1]) <= tol.zero:
            raise DegenerateLeadingResidue(f"leading residue at {z0} below tolerance")
        poles.append(np.conj(pbar))
        rhos.append(rho)

    partial = PoleData(np.array(poles, dtype=complex), np.zeros((d, d)), tuple(rhos))
    R = _pick_radius(np.abs(partial.inverse_poles()))
    deg_bound = (h.denominator.shape[0] - 1) + (d - 1) * (h.numerator.shape[0] - 1)
    nfit = max(64, nx.next_pow2(2 * (deg_bound + 1)))
    zs = R * np.exp(2j * np.pi * np.arange(nfit) / nfit)
    # partial(z) carries only the pole terms, so this difference is a polynomial
    full = finv(zs)
    rem = full - partial(zs)
    coef = np.fft.fft(rem, axis=0) / nfit / (R ** np.arange(nfit))[:, None, None]
    scale = max(np.max(nx.opnorm(full)), 1e-300)
    m0 = 0
    for k in range(1, nfit // 2):
        if nx.opnorm(coef[k]) * R ** k > tol.zero * scale:
            m0 = k
    rho0 = -coef[0]
    rho0j = -coef[1 : m0 + 1]
    return PoleData(partial.poles, rho0, partial.rho, rho0j).validate(tol.zero)


def evaluate(f, z, tol=DEFAULT_TOL.zero):
    """Pointwise value of a rational function or of a partial-fraction form.

    For :class:`PoleData` this is the right-hand side of the decomposition,
    i.e. ``h^{-1}(z)``.
    """
    z = complex(z)
    if isinstance(f, PoleData):
        sing = f.inverse_poles()
        if sing.size and np.min(np.abs(sing - z)) < tol:
            raise NearPole(f"{z} is within {tol} of a pole")
        return f(np.array([z]))[0]
    sing = f.poles()
    if sing.size and np.min(np.abs(sing - z)) < tol:
        raise NearPole(f"{z} is within {tol} of a pole")
    return f(np.array([z]))[0]


# ---------------------------------------------------------------------------
# series coefficients


def ar_coefficients(pd, n):
    """``a_k`` for ``k = 0..n-1`` from the partial-fraction data.

    Uses ``-h^{-1}(z) = sum_k z^k a_k`` with the binomial expansion of each
    pole term; the polynomial part contributes ``rho_{0,k}`` for ``k <= m0``.
    """
    k = np.arange(n)
    out = np.zeros((n, pd.d, pd.d), dtype=complex)
    out[0] += pd.rho0
    for p, r in zip(pd.poles, pd.rho):
        pk = np.conj(p) ** k
        for j, rj in enumerate(r, start=1):
            out += (nx.binom(k + j - 1, j - 1) * pk)[:, None, None] * rj
    m = min(pd.m0, n - 1)
    if m >= 1:
        out[1 : m + 1] += pd.rho0j[:m]
    return out


def inverse_series(a, sign=-1.0):
    """Power series inverse: returns ``c`` with ``sum c_i a_{k-i} = sign * delta_k I``."""
    n, d, _ = a.shape
    c = np.zeros_like(a)
    a0inv = np.linalg.inv(a[0])
    c[0] = sign * a0inv
    for k in range(1, n):
        acc = np.einsum("iab,ibc->ac", c[:k], a[k:0:-1])
        c[k] = -acc @ a0inv
    return c


def taylor_rational(h, n):
    """Taylor coefficients of ``N(z)/q(z)`` by the recursion ``q c = N``."""
    num, den = h.numerator, h.denominator
    c = np.zeros((n, h.d, h.d), dtype=complex)
    for k in range(n):
        acc = num[k].copy() if k < num.shape[0] else np.zeros((h.d, h.d), dtype=complex)
        for i in range(1, min(k, den.shape[0] - 1) + 1):
            acc -= den[i] * c[k - i]
        c[k] = acc / den[0]
    return c


@dataclass(frozen=True)
class SeriesCoefficients:
    """Forward and backward MA/AR coefficients, truncated at ``truncation``."""

    c: np.ndarray
    a: np.ndarray
    ctilde: np.ndarray
    atilde: np.ndarray
    truncation: int
    tail_bound: float
    envelope: tuple = (0.0, 0.0)


def _tail(norms):
    """Relative bound on the omitted tail ``sum_{k >= n} norms[k]``."""
    C, r = nx.geometric_envelope(norms)
    if C == 0.0:
        return 0.0
    if r >= 1:
        return np.inf
    n = norms.size
    return C * r ** n / (1 - r) / norms.max()


def series_coefficients(h, pd, pd_sharp, N=None, tol=DEFAULT_TOL.series, max_terms=1 << 15):
    """MA and AR coefficient sequences of ``h`` and of ``h_tilde``.

    ``c`` comes from the Taylor recursion on numerator and denominator when
    ``h`` is rational (else from inverting the AR series); ``a`` and
    ``atilde`` come from the closed forms in the partial-fraction data;
    ``ctilde`` inverts ``atilde``.  When ``N`` is omitted the length doubles
    until the fitted exponential tail of every sequence is below ``tol``.
    """
    if pd_sharp is None:
        raise InsufficientSharpData("pole data of h_sharp^{-1} is required")
    tdata = pd_sharp.tilde()
    n = max(pd.m0 + 1, 64) if N is None else int(N)
    if N is not None and n < pd.m0 + 1:
        raise ValueError("N must be at least m0 + 1")
    while True:
        a = ar_coefficients(pd, n)
        at = ar_coefficients(tdata, n)
        c = taylor_rational(h, n) if isinstance(h, RationalMatrixFunction) else inverse_series(a)
        ct = inverse_series(at)
        tails = [_tail(nx.opnorm(s)) for s in (a, at, c, ct)]
        tail = max(tails)
        if N is not None or tail < tol:
            break
        if 2 * n > max_terms:
            raise TailNotConverged(f"series tail {tail:.3g} above {tol:.3g} at {n} terms")
        n *= 2
    C, r = nx.geometric_envelope(nx.opnorm(c))
    return SeriesCoefficients(c, a, ct, at, n, float(tail), (C, r))


def autocovariances(series, kmax, tol=1e-13):
    """``gamma(k) = E[X_k X_0^*] = sum_j c_{k+j} c_j^*`` for ``k = 0..kmax``."""
    c = series.c
    n = c.shape[0]
    C, r = series.envelope
    out = np.zeros((kmax + 1,) + c.shape[1:], dtype=complex)
    for k in range(min(kmax, n - 1) + 1):
        out[k] = np.einsum("jab,jcb->ac", c[k:], np.conj(c[: n - k]))
    if C > 0:
        if r >= 1:
            raise TailNotConverged("MA coefficients do not decay")
        kk = np.arange(kmax + 1)
        bound = C * C * r ** kk * r ** (2 * np.maximum(n - kk, 0)) / (1 - r * r)
        if np.max(bound) > tol:
            raise TailNotConverged(f"autocovariance tail bound {np.max(bound):.3g} exceeds {tol:.3g}")
    return out


def autocovariance(series, k, tol=1e-13):
    """Single lag; negative lags use ``gamma(-k) = gamma(k)^*``."""
    g = autocovariances(series, abs(int(k)), tol)[abs(int(k))]
    return g if k >= 0 else g.conj().T
