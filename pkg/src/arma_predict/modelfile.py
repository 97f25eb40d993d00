"""JSON model files.

Complex scalars are ``[re, im]`` pairs (bare numbers are accepted as real).
Matrices are lists of rows; polynomial matrices are indexed ``[k][row][col]``.

Either ``"phi"``, ``"psi"`` and ``"sigma_half"`` describe the ARMA recursion,
or ``"h_inverse_poledata"`` gives the partial-fraction data directly::

    {"h_inverse_poledata": {
        "rho0": [[...]],
        "poles": [{"p": [re, im], "rho": [matrix_j1, matrix_j2, ...]}],
        "rho0j": [matrix_1, ...]},
     "h_sharp_inverse_poledata": {...}}

The optional ``"h_sharp_inverse_poledata"`` bypasses the numerical
factorization.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import ModelFileError
from .model import PoleData, from_arma_polynomials


def _scalar(x, where):
    if isinstance(x, bool):
        raise ModelFileError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ModelFileError(f"{where}: expected a number or [re, im], got {x!r}")


def _matrix(x, where, d=None):
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise ModelFileError(f"{where}: expected a list of rows")
    rows = [[_scalar(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(x)]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ModelFileError(f"{where}: matrix must be square")
    if d is not None and n != d:
        raise ModelFileError(f"{where}: expected a {d}x{d} matrix, got {n}x{n}")
    a = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ModelFileError(f"{where}: non-finite entry")
    return a


def _poly(x, where, d=None):
    if not isinstance(x, list) or not x:
        raise ModelFileError(f"{where}: expected a non-empty list of coefficient matrices")
    mats = [_matrix(m, f"{where}[{k}]", d) for k, m in enumerate(x)]
    d = mats[0].shape[0]
    if any(m.shape[0] != d for m in mats):
        raise ModelFileError(f"{where}: coefficient matrices differ in size")
    return np.array(mats)


def parse_poledata(obj, where="h_inverse_poledata"):
    if not isinstance(obj, dict):
        raise ModelFileError(f"{where}: expected an object")
    if "rho0" not in obj:
        raise ModelFileError(f"{where}: missing 'rho0'")
    rho0 = _matrix(obj["rho0"], f"{where}.rho0")
    d = rho0.shape[0]
    if "d" in obj and obj["d"] != d:
        raise ModelFileError(f"{where}: 'd' does not match rho0")
    poles, rhos = [], []
    for i, entry in enumerate(obj.get("poles", [])):
        if not isinstance(entry, dict) or "p" not in entry or "rho" not in entry:
            raise ModelFileError(f"{where}.poles[{i}]: need 'p' and 'rho'")
        poles.append(_scalar(entry["p"], f"{where}.poles[{i}].p"))
        rhos.append(_poly(entry["rho"], f"{where}.poles[{i}].rho", d))
    rho0j = obj.get("rho0j", [])
    rho0j = _poly(rho0j, f"{where}.rho0j", d) if rho0j else np.zeros((0, d, d))
    try:
        return PoleData(np.array(poles, dtype=complex), rho0, tuple(rhos), rho0j)
    except ValueError as exc:
        raise ModelFileError(f"{where}: {exc}") from None


def parse_model(obj):
    """Return ``(h, pd_sharp_or_None)`` from a decoded JSON object."""
    if not isinstance(obj, dict):
        raise ModelFileError("model file must contain a JSON object")
    sharp = None
    if "h_sharp_inverse_poledata" in obj:
        sharp = parse_poledata(obj["h_sharp_inverse_poledata"], "h_sharp_inverse_poledata")
    if "h_inverse_poledata" in obj:
        h = parse_poledata(obj["h_inverse_poledata"])
    elif all(k in obj for k in ("phi", "psi", "sigma_half")):
        phi = _poly(obj["phi"], "phi")
        psi = _poly(obj["psi"], "psi", phi.shape[1])
        s = _matrix(obj["sigma_half"], "sigma_half", phi.shape[1])
        # stability problems are numerical failures, reported by validation
        h = from_arma_polynomials(phi, psi, s, check=False)
    else:
        raise ModelFileError("need 'phi', 'psi', 'sigma_half' or 'h_inverse_poledata'")
    if sharp is not None and sharp.d != h.d:
        raise ModelFileError("h_sharp_inverse_poledata has the wrong dimension")
    return h, sharp


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from None
    return parse_model(obj)


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(a):
    return [[encode_complex(v) for v in row] for row in np.asarray(a)]


def encode_poledata(pd):
    return {
        "d": pd.d,
        "rho0": encode_matrix(pd.rho0),
        "poles": [{"p": encode_complex(p), "rho": [encode_matrix(r) for r in rho]}
                  for p, rho in zip(pd.poles, pd.rho)],
        "rho0j": [encode_matrix(r) for r in pd.rho0j],
    }


def encode_arma(phi, psi, sigma_half):
    return {
        "phi": [encode_matrix(m) for m in np.asarray(phi).reshape(-1, *np.shape(sigma_half))],
        "psi": [encode_matrix(m) for m in np.asarray(psi).reshape(-1, *np.shape(sigma_half))],
        "sigma_half": encode_matrix(sigma_half),
    }
