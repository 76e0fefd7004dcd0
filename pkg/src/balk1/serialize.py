"""JSON and CSV codecs for pairs, loops, operators and reports.

Complex scalars are stored as [re, im] pairs; loops record their glued
parameter domain explicitly.  Everything is plain text so fixtures diff
cleanly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
import numpy as np

from .balanced import BalancedPair, BalanceReport
from .loops import LoopPair, MatrixLoop, SymbolPair
from .opmodel import TruncOp
from .relindex import IndexReport

PARAM_DOMAIN = "glued-0-pi/2"


def _encode_matrix(m: np.ndarray) -> list:
    return np.stack([m.real, m.imag], axis=-1).tolist()


def _decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def pair_to_dict(pair: BalancedPair) -> dict:
    return {"dim": pair.dim, "a": _encode_matrix(pair.a),
            "b": _encode_matrix(pair.b), "tol": pair.tol}


def pair_from_dict(data: dict) -> BalancedPair:
    a, b = _decode_matrix(data["a"]), _decode_matrix(data["b"])
    return BalancedPair(a, b, float(data.get("tol", 1e-10)))


def loop_to_dict(loop: MatrixLoop) -> dict:
    return {"grid": loop.grid, "dim": loop.dim, "param": PARAM_DOMAIN,
            "samples": _encode_matrix(loop.samples)}


def loop_from_dict(data: dict) -> MatrixLoop:
    if data.get("param", PARAM_DOMAIN) != PARAM_DOMAIN:
        raise ValueError(f"unsupported loop parameter domain {data.get('param')!r}")
    return MatrixLoop(_decode_matrix(data["samples"]))


def loop_pair_to_dict(lp: LoopPair) -> dict:
    return {"sigma1": loop_to_dict(lp.sigma1), "sigma2": loop_to_dict(lp.sigma2),
            "tol": lp.tol}


def loop_pair_from_dict(data: dict) -> LoopPair:
    return LoopPair(loop_from_dict(data["sigma1"]), loop_from_dict(data["sigma2"]),
                    float(data.get("tol", 1e-10)))


def symbol_pair_to_dict(sp: SymbolPair) -> dict:
    return {"plus": loop_pair_to_dict(sp.plus), "minus": loop_pair_to_dict(sp.minus)}


def symbol_pair_from_dict(data: dict) -> SymbolPair:
    return SymbolPair(loop_pair_from_dict(data["plus"]),
                      loop_pair_from_dict(data["minus"]))


def trunc_op_to_dict(op: TruncOp) -> dict:
    return {"modes": op.modes, "dim": op.dim, "matrix": _encode_matrix(op.matrix)}


def trunc_op_from_dict(data: dict) -> TruncOp:
    return TruncOp(int(data["modes"]), int(data["dim"]),
                   _decode_matrix(data["matrix"]))


def balance_report_to_dict(rep: BalanceReport) -> dict:
    return asdict(rep)


def index_report_to_dict(rep: IndexReport) -> dict:
    return {
        "analytic_svd": rep.analytic_svd,
        "analytic_fedosov": rep.analytic_fedosov,
        "topological": rep.topological,
        "verdict": rep.verdict,
        "residuals": {k: float(v) for k, v in rep.residuals.items()},
        "details": {f: {e: {str(n): v for n, v in series.items()}
                        for e, series in engines.items()}
                    for f, engines in rep.details.items()},
    }


def dump_json(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_sweep_csv(rows, path: str) -> None:
    """Rows of (p, q, analytic, topological, verdict, residue)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "q", "analytic", "topological", "verdict",
                         "max_fedosov_residue"])
        for row in rows:
            writer.writerow(row)
