"""Readers and writers for path, coefficient and custom basis files.

Formats (versioned in docs/formats.md):
    path CSV           columns t, x at t = i 2^-L, i = 0..2^L
    path JSON          array of the 2^L + 1 grid values
    coefficient CSV    columns n, xi for n = 1..N
    coefficient JSON   array xi_1..xi_N
    custom basis JSON  {"version": 1, "level": L, "basis": [[...], ...]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from interspace.errors import CoefficientError, ModelError, PathError
from interspace.haar import CoeffSeq
from interspace.paths import DyadicPath, level_for_length

BASIS_FORMAT_VERSION = 1

_GRID_TOL = 1e-12


def _suffix(path: Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in (".csv", ".json"):
        raise ValueError(f"Unsupported file type '{suffix}' for {path}; use .csv or .json")
    return suffix


def read_path(path: Path) -> DyadicPath:
    path = Path(path)
    if _suffix(path) == ".json":
        with open(path, "r", encoding="utf-8") as f:
            return DyadicPath(np.asarray(json.load(f), dtype=float))
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["t", "x"]:
        raise PathError(f"{path}: expected columns t,x, got {list(frame.columns)}")
    level = level_for_length(len(frame))
    if np.max(np.abs(frame["t"].to_numpy() - np.linspace(0.0, 1.0, 2**level + 1))) > _GRID_TOL:
        raise PathError(f"{path}: t column is not the level-{level} dyadic grid")
    return DyadicPath(frame["x"].to_numpy(dtype=float))


def write_path(p: DyadicPath, path: Path) -> None:
    path = Path(path)
    if _suffix(path) == ".json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump([float(v) for v in p.samples], f)
        return
    pd.DataFrame({"t": p.times, "x": p.samples}).to_csv(path, index=False, float_format="%.17g")


def read_coeffs(path: Path) -> CoeffSeq:
    path = Path(path)
    if _suffix(path) == ".json":
        with open(path, "r", encoding="utf-8") as f:
            return CoeffSeq(np.asarray(json.load(f), dtype=float))
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["n", "xi"]:
        raise CoefficientError(f"{path}: expected columns n,xi, got {list(frame.columns)}")
    if not np.array_equal(frame["n"].to_numpy(), np.arange(1, len(frame) + 1)):
        raise CoefficientError(f"{path}: n must run densely from 1")
    return CoeffSeq(frame["xi"].to_numpy(dtype=float))


def write_coeffs(xi: CoeffSeq, path: Path) -> None:
    path = Path(path)
    if _suffix(path) == ".json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump([float(v) for v in xi.coeffs], f)
        return
    frame = pd.DataFrame({"n": np.arange(1, xi.size + 1), "xi": xi.coeffs})
    frame.to_csv(path, index=False, float_format="%.17g")


def read_basis_file(path: Path) -> np.ndarray:
    """Rows of basis path values from a custom basis file."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict) or data.get("version") != BASIS_FORMAT_VERSION:
        raise ModelError("custom", f"{path}: expected basis format version {BASIS_FORMAT_VERSION}")
    try:
        level = int(data["level"])
        basis = np.asarray(data["basis"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError("custom", f"{path}: malformed basis file ({exc})") from exc
    if basis.ndim != 2 or basis.shape[0] == 0 or basis.shape[1] != 2**level + 1:
        raise ModelError("custom", f"{path}: basis rows must have 2^{level} + 1 values")
    if np.any(basis[:, 0] != 0.0):
        raise ModelError("custom", f"{path}: basis paths must start at 0")
    return basis


def write_basis_file(basis: List[DyadicPath], path: Path) -> None:
    level = basis[0].level
    if any(p.level != level for p in basis):
        raise ModelError("custom", "all basis paths must share one level")
    payload = {
        "version": BASIS_FORMAT_VERSION,
        "level": level,
        "basis": [[float(v) for v in p.samples] for p in basis],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
