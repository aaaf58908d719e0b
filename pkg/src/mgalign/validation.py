"""Input validation helpers used by every public entry point."""

from __future__ import annotations

import numpy as np

from .errors import EmptyInput, ShapeError

#: Relative / absolute tolerances for comparing real values, package-wide.
RTOL = 1e-6
ATOL = 1e-9


def check_features(values, *, name: str = "features") -> np.ndarray:
    """Validate and return a 2-D float array of row embeddings.

    Accepts anything ``np.asarray`` understands. Requires at least one row,
    at least one column, and all entries finite.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite entries")
    return arr


def check_vector_rows(rows, *, name: str = "rows") -> np.ndarray:
    """Validate a nonempty list of equal-length finite vectors."""
    if rows is None or len(rows) == 0:
        raise EmptyInput(f"{name} is empty")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ShapeError(f"{name} have mixed dimensions {sorted(lengths)}")
    return check_features(rows, name=name)


def check_square(matrix: np.ndarray, *, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_permutation(sigma, n: int | None = None) -> np.ndarray:
    """Validate that ``sigma`` is a permutation of ``0..n-1``."""
    arr = np.asarray(sigma, dtype=int)
    if arr.ndim != 1:
        raise ShapeError(f"permutation must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"permutation length {arr.shape[0]} != {n}")
    m = arr.shape[0]
    if m == 0:
        raise EmptyInput("permutation is empty")
    if not np.array_equal(np.sort(arr), np.arange(m)):
        raise ShapeError("array is not a permutation of 0..n-1")
    return arr


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return ``arr`` flagged immutable (types here are frozen after build)."""
    arr.flags.writeable = False
    return arr
