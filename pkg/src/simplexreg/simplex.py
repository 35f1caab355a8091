"""Compositions on the simplex: closure, validation gates, zero accounting.

A composition is a vector of D >= 2 nonnegative parts summing to 1.  The
functions here are the single entry point for turning raw arrays into
validated compositions; downstream modules assume their inputs already
passed these gates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ValidationError

# Row sums may deviate from 1 by at most this much before rejection.
SUM_TOL = 1e-9

# Deviations below this are pure float noise; skip the rescale so already
# closed data passes through by reference.
_EXACT_TOL = 1e-15


def closure(values, axis=-1):
    """Rescale nonnegative parts to unit sum along `axis`.

    Parameters
    ----------
    values : array_like
        Nonnegative, finite entries.  Any shape; each slice along `axis`
        is normalized independently.
    axis : int
        Axis holding the parts of one composition.

    Returns
    -------
    ndarray
        Same shape as `values`, slices summing to 1.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValidationError("closure: input is empty")
    if not np.all(np.isfinite(x)):
        raise ValidationError("closure: input contains non-finite values")
    if np.any(x < 0):
        raise ValidationError("closure: input contains negative values")
    total = x.sum(axis=axis, keepdims=True)
    if np.any(total <= 0):
        raise DegenerateInputError("closure: a slice sums to zero")
    # Sums within float noise of 1 mean the input is already closed;
    # skipping the division makes closure exactly idempotent.
    if np.all(np.abs(total - 1.0) <= 8e-15):
        return x
    return x / total


def as_composition(values):
    """Validate a single composition vector.

    Accepts a 1-D vector with D >= 2 nonnegative finite parts whose sum is
    within `SUM_TOL` of 1, re-closes it, and returns a float64 array.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValidationError(f"composition must be 1-D, got ndim={x.ndim}")
    if x.shape[0] < 2:
        raise ValidationError("composition needs at least 2 parts")
    if not np.all(np.isfinite(x)):
        raise ValidationError("composition contains non-finite values")
    if np.any(x < 0):
        raise ValidationError("composition contains negative values")
    total = x.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ValidationError(
            f"composition sums to {total!r}, outside tolerance {SUM_TOL}"
        )
    if abs(total - 1.0) < _EXACT_TOL:
        return x
    return x / total


def as_composition_matrix(data):
    """Validate a matrix of row compositions.

    Rows whose sums differ from 1 by more than `SUM_TOL` are rejected with
    the offending row index; rows within tolerance are silently re-closed.
    Already closed float64 input is returned by reference, not copied.
    """
    arr = np.ascontiguousarray(np.asarray(data, dtype=float))
    if arr.ndim != 2:
        raise ValidationError(f"composition matrix must be 2-D, got ndim={arr.ndim}")
    n, width = arr.shape
    if n < 1:
        raise ValidationError("composition matrix has no rows")
    if width < 2:
        raise ValidationError("composition matrix needs at least 2 columns")
    finite_rows = np.isfinite(arr).all(axis=1)
    if not finite_rows.all():
        bad = int(np.flatnonzero(~finite_rows)[0])
        raise ValidationError(f"row {bad}: non-finite value")
    neg_rows = (arr < 0).any(axis=1)
    if neg_rows.any():
        bad = int(np.flatnonzero(neg_rows)[0])
        raise ValidationError(f"row {bad}: negative component")
    sums = arr.sum(axis=1)
    dev = np.abs(sums - 1.0)
    if np.any(dev > SUM_TOL):
        bad = int(np.flatnonzero(dev > SUM_TOL)[0])
        raise ValidationError(
            f"row {bad}: sum {sums[bad]!r} outside tolerance {SUM_TOL}"
        )
    if dev.max() < _EXACT_TOL:
        return arr
    return arr / sums[:, None]


def as_predictor_matrix(data):
    """Validate an (n, p) matrix of finite Euclidean predictors.

    A 1-D vector is treated as a single predictor column.
    """
    arr = np.ascontiguousarray(np.asarray(data, dtype=float))
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValidationError(f"predictor matrix must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"predictor matrix has empty shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise ValidationError(f"row {bad}: non-finite predictor value")
    return arr


@dataclass(frozen=True)
class ZeroReport:
    """Zero pattern of a composition matrix."""

    rows: int
    zero_rows: int
    column_zero_counts: tuple

    @property
    def has_zeros(self):
        return self.zero_rows > 0


def validate_composition_matrix(data):
    """Validate a matrix and report its zero pattern without mutating it.

    Returns
    -------
    ZeroReport
        Row count, number of rows containing at least one zero, and the
        per-column zero counts.
    """
    arr = as_composition_matrix(data)
    zero_mask = arr == 0.0
    return ZeroReport(
        rows=arr.shape[0],
        zero_rows=int(zero_mask.any(axis=1).sum()),
        column_zero_counts=tuple(int(c) for c in zero_mask.sum(axis=0)),
    )
