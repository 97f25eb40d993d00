import json
from pathlib import Path

import numpy as np
import pytest

from arma_predict import battery
from arma_predict.errors import ModelFileError
from arma_predict.model import PoleData, decompose_inverse, transfer
from arma_predict.modelfile import (
    encode_arma,
    encode_poledata,
    load_model,
    parse_model,
    parse_poledata,
)

MODELS = Path(__file__).resolve().parent.parent / "models"
Z = np.array([0.3, -0.2 + 0.5j, 0.7j])


def test_arma_round_trip():
    phi = [np.eye(2), -0.4 * np.eye(2)]
    psi = [np.array([[1.0, 0.0], [1.0, 1.0]]), -0.4 * np.eye(2)]
    obj = json.loads(json.dumps(encode_arma(phi, psi, np.eye(2))))
    h, sharp = parse_model(obj)
    assert sharp is None
    np.testing.assert_allclose(transfer(h)(Z), transfer(battery.lower_triangular())(Z), atol=1e-14)


def test_poledata_round_trip(models):
    pd = models["random_1"].pd
    back = parse_poledata(json.loads(json.dumps(encode_poledata(pd))))
    np.testing.assert_array_equal(back.poles, pd.poles)
    np.testing.assert_array_equal(back.rho0, pd.rho0)
    np.testing.assert_array_equal(back.rho0j, pd.rho0j)
    for a, b in zip(back.rho, pd.rho):
        np.testing.assert_array_equal(a, b)


def test_sharp_section(models):
    m = models["lower_triangular"]
    obj = {"h_inverse_poledata": encode_poledata(m.pd),
           "h_sharp_inverse_poledata": encode_poledata(m.pd_sharp)}
    h, sharp = parse_model(obj)
    assert isinstance(h, PoleData) and sharp.d == 2


def test_bare_reals_accepted():
    h, _ = parse_model({"phi": [[[1]]], "psi": [[[1]], [[0.5]]], "sigma_half": [[1]]})
    pd = decompose_inverse(h)
    np.testing.assert_allclose(pd.poles, [-0.5], atol=1e-12)


def test_example_files_load():
    for name in ("ma1", "arma_m0_1", "lower_triangular", "ar1", "not_outer", "equal_modulus"):
        load_model(MODELS / f"{name}.json")


@pytest.mark.parametrize("obj", [
    [],
    {},
    {"phi": [[[1]]], "psi": [[[1]]]},
    {"phi": [[[1, 0]]], "psi": [[[1]]], "sigma_half": [[1]]},
    {"phi": [[["a"]]], "psi": [[[1]]], "sigma_half": [[1]]},
    {"phi": [[[True]]], "psi": [[[1]]], "sigma_half": [[1]]},
    {"phi": [[[[1, 2, 3]]]], "psi": [[[1]]], "sigma_half": [[1]]},
    {"phi": [[[1]]], "psi": [[[1, 0], [0, 1]]], "sigma_half": [[1]]},
    {"h_inverse_poledata": {"poles": []}},
    {"h_inverse_poledata": {"rho0": [[-1]], "poles": [{"p": 0.5}]}},
    {"h_inverse_poledata": {"rho0": [[-1]], "d": 2}},
])
def test_malformed_rejected(obj):
    with pytest.raises(ModelFileError):
        parse_model(obj)


def test_unreadable_files(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ModelFileError):
        load_model(bad)
