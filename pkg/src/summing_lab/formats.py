"""JSON file formats for matrices and vector sequences (explicit exponents, row-major entries).

Matrix (the output of ``OperatorMat.to_dict``)::

    {"kind": "operator", "domain": "3/2", "codomain": "inf", "rows": 2, "cols": 3,
     "entries": [[...], [...]]}

Sequence (the output of ``VecSeq.to_dict``; one vector per row of ``head``)::

    {"kind": "sequence", "ambient": {"dim": 2, "exponent": "2"}, "head": [[...], [...]],
     "tail": {"kind": "power-log", "c": 1.0, "gamma": "1/2", "kappa": 1}}
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import TailModel, VecSeq, as_exponent
from .operators import OperatorMat


def _num(v):
    return Fraction(v) if isinstance(v, str) else v


def matrix_from_dict(d: dict) -> OperatorMat:
    try:
        entries = np.asarray(d["entries"], dtype=float)
        rows, cols = int(d["rows"]), int(d["cols"])
        if entries.size == 0:
            entries = np.zeros((rows, cols))
        if entries.shape != (rows, cols):
            raise ValueError(f"entries have shape {entries.shape}, header says {rows}x{cols}")
        return OperatorMat(entries, as_exponent(d["domain"]), as_exponent(d["codomain"]))
    except KeyError as exc:
        raise ValueError(f"matrix file is missing field {exc}") from exc


def sequence_from_dict(d: dict) -> VecSeq:
    try:
        amb = d["ambient"]
        dim = int(amb["dim"])
        head = np.asarray(d["head"], dtype=float)
        if head.size == 0:
            head = np.zeros((0, dim))
        if head.ndim != 2 or head.shape[1] != dim:
            raise ValueError(f"head must be a list of length-{dim} rows")
        tail = TailModel.none()
        t = d.get("tail") or {}
        if t.get("kind", "none") != "none":
            tail = TailModel.power_log(float(t.get("c", 1.0)), _num(t["gamma"]), _num(t.get("kappa", 0)))
        return VecSeq(head, as_exponent(amb["exponent"]), tail)
    except KeyError as exc:
        raise ValueError(f"sequence file is missing field {exc}") from exc


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc


def load_matrix(path) -> OperatorMat:
    return matrix_from_dict(load_json(path))


def load_sequence(path) -> VecSeq:
    return sequence_from_dict(load_json(path))


def dumps(obj: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(obj: dict, path) -> None:
    Path(path).write_text(dumps(obj))
