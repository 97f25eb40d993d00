"""Finite-past predictor coefficients of multivariate ARMA processes in linear time.

The usual entry points::

    from arma_predict import prepare, predict
    model = prepare(h)            # h: RationalMatrixFunction or PoleData
    table = predict(model, 200)   # phi_{200,1..200}
"""
from .blocks import BuildingBlocks, build_blocks
from .errors import *  # noqa: F401,F403
from .model import (
    DEFAULT_TOL,
    PoleData,
    RationalMatrixFunction,
    Tolerances,
    autocovariances,
    check_condition_C,
    decompose_inverse,
    from_arma_polynomials,
    series_coefficients,
)
from .oracle import baxter_asymptotics, durbin_levinson, identity_suite, yule_walker_dense
from .pipeline import ArmaModel, oracle_phi, predict, prepare
from .predictor import PredictorTable, phi_all, phi_diff_all
from .specfactor import extract_sharp_poledata, factorize_sharp, verify_pole_correspondence

__version__ = "0.1.0"
