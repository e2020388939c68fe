"""Matrix file format shared by the CLI and the block-spec serializers.

A matrix document is ``{"n": int, "data": [[re, im], ...]}`` with the n*n
entries row-major.  Complex numbers are [re, im] pairs everywhere; no string
forms are accepted, so round-trips are bit-exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ContractViolationError
from .numerics import MAX_DIM, as_matrix


def matrix_to_dict(a) -> dict:
    m = as_matrix(a)
    n = m.shape[0]
    flat = m.reshape(-1)
    return {"n": n, "data": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_dict(doc: dict, cap: int = 2 * MAX_DIM) -> np.ndarray:
    if not isinstance(doc, dict) or "n" not in doc or "data" not in doc:
        raise ContractViolationError("matrix document must have 'n' and 'data' fields")
    n = doc["n"]
    data = doc["data"]
    if not isinstance(n, int) or n < 1:
        raise ContractViolationError(f"'n' must be a positive integer, got {n!r}")
    if not isinstance(data, list) or len(data) != n * n:
        raise ContractViolationError(
            f"'data' must hold exactly n*n = {n * n} entries, got {len(data) if isinstance(data, list) else type(data)}"
        )
    out = np.empty(n * n, dtype=complex)
    for i, pair in enumerate(data):
        if (not isinstance(pair, list)) or len(pair) != 2:
            raise ContractViolationError(f"entry {i} is not an [re, im] pair")
        re, im = pair
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in (re, im)):
            raise ContractViolationError(f"entry {i} has non-finite or non-numeric parts")
        out[i] = complex(re, im)
    return as_matrix(out.reshape(n, n), cap=cap)


def load_matrix(path, cap: int = 2 * MAX_DIM) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ContractViolationError(f"{path}: invalid JSON: {exc}") from exc
    return matrix_from_dict(doc, cap=cap)


def save_matrix(a, path) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(a)), encoding="utf-8")
