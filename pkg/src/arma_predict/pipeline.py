"""One-call preparation of a model and dispatch of the predictor."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .blocks import BuildingBlocks, build_blocks
from .errors import GridTooCoarse
from .model import (
    DEFAULT_TOL,
    PoleData,
    SeriesCoefficients,
    ar_coefficients,
    autocovariances,
    decompose_inverse,
    series_coefficients,
)
from .oracle import durbin_levinson, yule_walker_dense
from .predictor import PredictorTable, ar_table, phi_all
from .specfactor import SharpFactor, extract_sharp_poledata, factorize_sharp, sharp_from_poledata


@dataclass(frozen=True)
class ArmaModel:
    """Everything derived from a transfer function, ready for prediction."""

    h: object
    pd: PoleData
    sf: SharpFactor
    pd_sharp: PoleData
    bb: BuildingBlocks | None
    series: SeriesCoefficients
    name: str = ""

    @property
    def d(self):
        return self.pd.d

    def gamma(self, kmax, tol=1e-13):
        return autocovariances(self.series, kmax, tol)

    def with_gauge(self, u):
        """Same model with ``h_sharp`` replaced by ``u h_sharp`` (``u`` unitary)."""
        u = np.asarray(u, dtype=complex)
        ps = self.pd_sharp.right_multiplied(u.conj().T)
        bb = build_blocks(self.pd, ps) if self.pd.K else None
        sf = replace(self.sf, samples=u @ self.sf.samples, taylor=u @ self.sf.taylor,
                     gauge=u @ self.sf.gauge, poledata=ps, identical_to_h=False)
        return replace(self, sf=sf, pd_sharp=ps, bb=bb)


def prepare(h, grid_size=1024, tol=DEFAULT_TOL, pd_sharp=None, name="", max_grid=1 << 15):
    """Decompose ``h^{-1}``, factorize ``w`` and build the fixed-size blocks.

    The factorization grid doubles on :class:`GridTooCoarse` up to ``max_grid``.
    """
    pd = decompose_inverse(h, tol)
    if pd_sharp is not None:
        sf = sharp_from_poledata(h, pd_sharp, grid_size)
    else:
        n = int(grid_size)
        while True:
            try:
                sf = factorize_sharp(h, n, tol.factorization)
                break
            except GridTooCoarse:
                if 2 * n > max_grid:
                    raise
                n *= 2
        sf = extract_sharp_poledata(sf, pd, tol.fit)
    ps = sf.poledata
    bb = build_blocks(pd, ps) if pd.K else None
    series = series_coefficients(h, pd, ps, tol=tol.series)
    return ArmaModel(h, pd, sf, ps, bb, series, name)


def predict(model, n):
    """``phi_{n,1..n}`` by the closed form where it applies.

    Pure AR models return the exact coefficients; horizons below
    ``max(m0, 1)`` fall back to Durbin-Levinson and are labelled so.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    pd = model.pd
    if pd.K == 0 and n >= pd.m0:
        return ar_table(pd, n)
    if pd.K and n >= max(pd.m0, 1):
        return phi_all(model.bb, n)
    phi = durbin_levinson(model.gamma(n), n)
    c0 = -np.linalg.inv(pd.a0)
    phi_inf = np.matmul(c0, ar_coefficients(pd, n + 1)[1:])
    return PredictorTable(n, phi, phi_inf, float("nan"), "durbin-levinson-fallback")


def oracle_phi(model, n, method="dl"):
    """Reference ``phi_{n,1..n}`` from the Yule-Walker system."""
    gam = model.gamma(n)
    if method == "dense":
        return yule_walker_dense(gam, n)
    return durbin_levinson(gam, n)
