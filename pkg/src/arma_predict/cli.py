"""Command line interface: ``arma-predict {validate,factorize,predict,compare,asymptotics}``.

Exit status is 0 when everything passes, 1 on a numerical or assumption
failure and 2 on usage or model-file errors.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import _numerics as nx
from .errors import ArmaError, ModelFileError
from .model import DEFAULT_TOL, check_condition_C
from .modelfile import encode_complex, encode_matrix, encode_poledata, load_model
from .oracle import (
    CheckRow,
    baxter_asymptotics,
    durbin_levinson,
    identity_suite,
    model_checks,
    rows_to_csv,
    yule_walker_dense,
)
from .pipeline import prepare, predict
from .predictor import neumann_diagnostics
from .specfactor import verify_pole_correspondence

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt_complex(z):
    """``re+imj`` with 17 significant digits (round-trips a double)."""
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return v


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(args, text):
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _tolerances(args):
    return DEFAULT_TOL if args.tol is None else replace(DEFAULT_TOL, fit=args.tol)


def _prepare(args, h, sharp):
    return prepare(h, grid_size=args.grid, tol=_tolerances(args), pd_sharp=sharp)


def _check_rows_json(rows):
    return [{k: (_num(v) if isinstance(v, float) else v) for k, v in asdict(r).items()} for r in rows]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, h, sharp):
    tol = args.tol if args.tol is not None else 1e-8
    rows, messages = [], []
    cond = check_condition_C(h)
    rows.append(CheckRow("condition_C", float(cond.poles_in_disk.size + cond.det_zeros_in_disk.size),
                         0.0, 0.0, 0.0, cond.passed))
    messages.append(cond.describe())
    if cond.passed:
        try:
            m = _prepare(args, h, sharp)
            rows.append(CheckRow("sharp_factor_residual", m.sf.residual, 1.0, m.sf.residual, tol,
                                 bool(m.sf.residual <= tol)))
            if m.pd.K:
                fit = m.sf.fit_residual
                rows.append(CheckRow("sharp_poledata_fit_residual", fit, 1.0, fit, 1e-9, bool(fit <= 1e-9)))
                cr = verify_pole_correspondence(h, m.sf, m.pd, m.pd_sharp, tol)
                for mu, res in sorted(cr.residuals.items()):
                    rows.append(CheckRow(f"pole_correspondence[mu={mu}]", res, 1.0, res, tol, bool(res <= tol)))
                rows.extend(model_checks(h, m.bb, tol=max(tol, 1e-9)))
        except ArmaError as exc:
            rows.append(CheckRow(f"error:{type(exc).__name__}", 1.0, 0.0, math.inf, 0.0, False))
            messages.append(str(exc))
    rows.extend(identity_suite(seed=args.seed))
    passed = all(r.passed for r in rows)
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        text = _dump_json({"model": args.model, "passed": passed, "messages": messages,
                           "checks": _check_rows_json(rows)})
    for msg in messages:
        if msg != "condition (C) holds":
            print(msg, file=sys.stderr)
    return text, EXIT_OK if passed else EXIT_FAIL


def cmd_factorize(args, h, sharp):
    m = _prepare(args, h, sharp)
    sf = m.sf
    if args.format == "csv":
        rows = []
        for name, pd in (("h_inverse", m.pd), ("h_sharp_inverse", m.pd_sharp)):
            rows += [[name, "rho0", "", "", a, b, fmt_complex(pd.rho0[a, b])]
                     for a in range(pd.d) for b in range(pd.d)]
            for mu, (p, rho) in enumerate(zip(pd.poles, pd.rho), start=1):
                rows.append([name, "pole", mu, "", "", "", fmt_complex(p)])
                rows += [[name, "rho", mu, j + 1, a, b, fmt_complex(rho[j, a, b])]
                         for j in range(rho.shape[0]) for a in range(pd.d) for b in range(pd.d)]
            rows += [[name, "rho0j", 0, j + 1, a, b, fmt_complex(pd.rho0j[j, a, b])]
                     for j in range(pd.m0) for a in range(pd.d) for b in range(pd.d)]
        text = _csv_text(["function", "quantity", "mu", "j", "row", "col", "value"], rows)
    else:
        text = _dump_json({
            "h_inverse_poledata": encode_poledata(m.pd),
            "h_sharp_inverse_poledata": encode_poledata(m.pd_sharp),
            "gauge": encode_matrix(sf.gauge),
            "factorization_residual": _num(sf.residual),
            "fit_residual": _num(sf.fit_residual),
            "iterations": int(sf.iterations),
            "identical_to_h": bool(sf.identical_to_h),
        })
    return text, EXIT_OK


def cmd_predict(args, h, sharp):
    n = _require_n(args)
    m = _prepare(args, h, sharp)
    tab = predict(m, n)
    diag = None
    if tab.method == "closed-form":
        nd = neumann_diagnostics(m.bb, n)
        diag = {"spectral_radius": _num(nd.spectral_radius), "partial_sum_error": _num(nd.partial_sum_error),
                "condition": _num(nd.condition), "terms": nd.terms}
    if args.format == "csv":
        d = m.d
        rows = [[j + 1, a, b, fmt_complex(tab.phi[j, a, b]), fmt_complex(tab.phi_inf[j, a, b])]
                for j in range(n) for a in range(d) for b in range(d)]
        text = f"# method={tab.method} n={n} neumann_radius={tab.neumann_radius!r}\n"
        text += _csv_text(["j", "row", "col", "phi_nj", "phi_j"], rows)
    else:
        text = _dump_json({
            "n": n, "method": tab.method, "neumann_radius": _num(tab.neumann_radius),
            "neumann": diag,
            "rows": [{"j": j + 1, "phi_nj": encode_matrix(tab.phi[j]), "phi_j": encode_matrix(tab.phi_inf[j])}
                     for j in range(n)],
        })
    return text, EXIT_OK


def cmd_compare(args, h, sharp):
    n = _require_n(args)
    tol = args.tol if args.tol is not None else 1e-8
    m = _prepare(args, h, sharp)
    t0 = time.perf_counter()
    tab = predict(m, n)
    t_closed = time.perf_counter() - t0
    gam = m.gamma(n)
    oracles = ("dl", "dense") if args.oracle == "both" else (args.oracle,)
    results, passed = [], True
    for name in oracles:
        t0 = time.perf_counter()
        ref = durbin_levinson(gam, n) if name == "dl" else yule_walker_dense(gam, n)
        t_ref = time.perf_counter() - t0
        dev = nx.opnorm(tab.phi - ref) / (1.0 + nx.opnorm(ref))
        ok = bool(np.max(dev) <= tol)
        passed &= ok
        results.append({"oracle": name, "n": n, "method": tab.method,
                        "max_deviation": float(np.max(dev)), "median_deviation": float(np.median(dev)),
                        "tol": tol, "pass": ok, "closed_form_seconds": t_closed, "oracle_seconds": t_ref})
    if args.format == "csv":
        keys = list(results[0])
        text = _csv_text(keys, [[_cell(r[k]) for k in keys] for r in results])
    else:
        text = _dump_json({"passed": passed, "comparisons": results})
    return text, EXIT_OK if passed else EXIT_FAIL


def cmd_asymptotics(args, h, sharp):
    m = _prepare(args, h, sharp)
    if not m.pd.K:
        raise UsageError("asymptotics need at least one pole of h^{-1}")
    rep = baxter_asymptotics(m.bb, args.n_list)
    final = rep.final()
    window = (0.95, 1.05)
    passed = final is not None and window[0] <= final.shifted_ratio <= window[1] \
        and window[0] <= final.cor_shifted <= window[1]
    if args.format == "csv":
        keys = ["n", "lhs_sum", "thm_rhs", "ratio", "tail_sum", "cor_ratio", "cor_limit",
                "shifted_ratio", "cor_shifted"]
        text = _csv_text(keys, [[r.n] + [repr(float(getattr(r, k))) for k in keys[1:]] for r in rep.rows])
    else:
        text = _dump_json({
            "C1": rep.C1, "p1": encode_complex(rep.p1), "m1": rep.m1, "pole_order": list(rep.order),
            "C1_terms_head": [float(v) for v in rep.C1_terms[:20]],
            "final_n": None if final is None else final.n,
            "passed": bool(passed),
            "rows": [{k: _num(v) if isinstance(v, float) else v for k, v in asdict(r).items()} for r in rep.rows],
        })
    return text, EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "validate": cmd_validate,
    "factorize": cmd_factorize,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "asymptotics": cmd_asymptotics,
}


# ---------------------------------------------------------------------------
# argument handling


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _n_list(s):
    """``"10:40"`` (inclusive range), ``"10:40:5"`` or ``"10,20,30"``."""
    try:
        if ":" in s:
            parts = [int(v) for v in s.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1
            out = list(range(parts[0], parts[1] + 1, step))
        else:
            out = [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --n-list {s!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("--n-list needs positive horizons")
    return out


def _require_n(args):
    if args.n is None:
        raise UsageError(f"{args.command} requires --n")
    return args.n


def build_parser():
    p = argparse.ArgumentParser(prog="arma-predict", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("model", help="JSON model file")
        s.add_argument("--n", type=_positive_int, help="prediction horizon")
        s.add_argument("--n-list", type=_n_list, help="horizons for asymptotics, e.g. 10:40 or 10,20,40")
        s.add_argument("--grid", type=_positive_int, default=1024, help="factorization grid size")
        s.add_argument("--tol", type=float, help="check tolerance")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--out", help="output path (default stdout)")
        s.add_argument("--seed", type=int, default=0, help="seed for randomized identity checks")
        s.add_argument("--oracle", choices=("dl", "dense", "both"), default="dl")
    return p


@contextlib.contextmanager
def _thread_cap():
    cap = os.environ.get("ARMA_PREDICT_THREADS")
    if not cap:
        yield
        return
    with threadpool_limits(limits=int(cap)):
        yield


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        h, sharp = load_model(args.model)
        with _thread_cap():
            text, status = COMMANDS[args.command](args, h, sharp)
        _emit(args, text)
        return status
    except (ModelFileError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArmaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
