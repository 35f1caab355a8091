"""CSV ingestion, geographic coordinate conversion, standardization.

Files are plain RFC-4180 CSV read with the standard library.  Response
columns must already be compositions row by row (sums within the simplex
tolerance of 1); out-of-tolerance rows are rejected with their location
rather than silently closed.  Floats are written with shortest
round-trip formatting so a load / export / load cycle is value-exact.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeError, ValidationError
from .simplex import SUM_TOL, as_composition_matrix, as_predictor_matrix


@dataclass(frozen=True)
class DatasetSchema:
    """Which CSV columns hold responses and predictors.

    Names are header labels when has_header is true, otherwise 0-based
    column indices given as strings.
    """

    response_cols: tuple
    predictor_cols: tuple = ()
    delimiter: str = ","
    has_header: bool = True

    def __post_init__(self):
        resp = tuple(str(c) for c in self.response_cols)
        pred = tuple(str(c) for c in self.predictor_cols)
        if not resp and not pred:
            raise ValidationError("schema names no columns")
        if resp and len(resp) < 2:
            raise ValidationError("need at least 2 response columns")
        overlap = set(resp) & set(pred)
        if overlap:
            raise ValidationError(
                f"columns listed as both response and predictor: {sorted(overlap)}"
            )
        if len(set(resp)) != len(resp) or len(set(pred)) != len(pred):
            raise ValidationError("duplicate column in schema")
        if len(self.delimiter) != 1:
            raise ValidationError(f"delimiter must be one character, got {self.delimiter!r}")
        object.__setattr__(self, "response_cols", resp)
        object.__setattr__(self, "predictor_cols", pred)


def _column_positions(names, header, has_header, path):
    if has_header:
        positions = []
        for name in names:
            try:
                positions.append(header.index(name))
            except ValueError:
                raise ValidationError(
                    f"{path}: column {name!r} not in header {header}"
                ) from None
        return positions
    positions = []
    for name in names:
        try:
            positions.append(int(name))
        except ValueError:
            raise ValidationError(
                f"{path}: without a header, columns must be integer "
                f"indices, got {name!r}"
            ) from None
    return positions


def load_csv(path, schema):
    """Read (X, U) from a CSV file according to `schema`.

    Returns predictors (n, p) and validated compositions (n, D); either
    is None when the schema names no columns of that kind.  Malformed
    fields, short rows, negative parts, and out-of-tolerance row sums
    are all rejected with the physical line number.
    """
    path = str(path)
    rows_resp = []
    rows_pred = []
    line_nums = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        header = None
        if schema.has_header:
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ValidationError(f"{path}: file is empty") from None
        resp_pos = _column_positions(schema.response_cols, header, schema.has_header, path)
        pred_pos = _column_positions(schema.predictor_cols, header, schema.has_header, path)
        needed = max(resp_pos + pred_pos) + 1
        for row in reader:
            if not row:
                continue  # tolerate blank lines
            if len(row) < needed:
                raise ValidationError(
                    f"{path}: line {reader.line_num}: expected at least "
                    f"{needed} fields, got {len(row)}"
                )
            values = []
            for pos, name in zip(
                resp_pos + pred_pos, schema.response_cols + schema.predictor_cols
            ):
                text = row[pos].strip()
                try:
                    v = float(text)
                except ValueError:
                    raise ValidationError(
                        f"{path}: line {reader.line_num}: column {name!r}: "
                        f"cannot parse {text!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise ValidationError(
                        f"{path}: line {reader.line_num}: column {name!r}: "
                        f"non-finite value {text!r}"
                    )
                values.append(v)
            rows_resp.append(values[: len(resp_pos)])
            rows_pred.append(values[len(resp_pos) :])
            line_nums.append(reader.line_num)
    if not rows_resp:
        raise ValidationError(f"{path}: no data rows")
    U = None
    if resp_pos:
        U = np.asarray(rows_resp, dtype=float)
        bad = np.flatnonzero(np.any(U < 0, axis=1))
        if bad.size:
            raise ValidationError(
                f"{path}: line {line_nums[bad[0]]}: negative response component"
            )
        sums = U.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise ValidationError(
                f"{path}: line {line_nums[bad[0]]}: response columns sum to "
                f"{sums[bad[0]]!r}, outside tolerance {SUM_TOL}"
            )
        U = as_composition_matrix(U)
    X = as_predictor_matrix(np.asarray(rows_pred, dtype=float)) if pred_pos else None
    return X, U


def write_csv(path_or_file, columns, names, delimiter=","):
    """Write named float columns with shortest round-trip formatting.

    Accepts a path or an open text stream (for piping to stdout).
    """
    arrays = [np.asarray(c, dtype=float) for c in columns]
    if len(arrays) != len(names):
        raise ValidationError("one name per column required")
    n = arrays[0].shape[0]
    if any(a.ndim != 1 or a.shape[0] != n for a in arrays):
        raise ValidationError("columns must be 1-D and equal length")

    def emit(fh):
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([repr(float(a[i])) for a in arrays])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def write_dataset_csv(path, X, U, predictor_names=None, response_names=None,
                      delimiter=","):
    """Write predictors and responses side by side as x1..xp, y1..yD."""
    U = as_composition_matrix(U)
    columns = []
    names = []
    if X is not None:
        X = as_predictor_matrix(X)
        if X.shape[0] != U.shape[0]:
            raise ValidationError(
                f"predictors have {X.shape[0]} rows, responses {U.shape[0]}"
            )
        if predictor_names is None:
            predictor_names = [f"x{j + 1}" for j in range(X.shape[1])]
        if len(predictor_names) != X.shape[1]:
            raise ValidationError("one name per predictor column required")
        columns += [X[:, j] for j in range(X.shape[1])]
        names += list(predictor_names)
    if response_names is None:
        response_names = [f"y{j + 1}" for j in range(U.shape[1])]
    if len(response_names) != U.shape[1]:
        raise ValidationError("one name per response column required")
    columns += [U[:, j] for j in range(U.shape[1])]
    names += list(response_names)
    write_csv(path, columns, names, delimiter=delimiter)


def latlon_to_euclidean(lat, lon):
    """Degrees latitude/longitude to points on the unit sphere.

    Returns (cos lat cos lon, cos lat sin lon, sin lat) stacked on the
    last axis, so distances between nearby sites approximate great-circle
    distances without a dateline seam.
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if lat.shape != lon.shape:
        raise ValidationError(f"shape mismatch: {lat.shape} vs {lon.shape}")
    if not (np.all(np.isfinite(lat)) and np.all(np.isfinite(lon))):
        raise ValidationError("coordinates contain non-finite values")
    if np.any(np.abs(lat) > 90.0):
        raise OutOfRangeError("latitude outside [-90, 90] degrees")
    if np.any(np.abs(lon) > 180.0):
        raise OutOfRangeError("longitude outside [-180, 180] degrees")
    phi = np.radians(lat)
    lam = np.radians(lon)
    return np.stack(
        [np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi)],
        axis=-1,
    )


def standardize(X):
    """Center and scale columns by mean and sample standard deviation.

    Returns (X_std, center, scale) with scale computed using n - 1.
    Constant columns cannot be scaled and are rejected by index.
    """
    X = as_predictor_matrix(X)
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 rows to standardize")
    center = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    flat = np.flatnonzero(scale == 0)
    if flat.size:
        raise ValidationError(f"column {int(flat[0])} is constant")
    return (X - center) / scale, center, scale


def apply_standardization(X, center, scale):
    """Apply a previously fitted centering and scaling."""
    X = as_predictor_matrix(X)
    center = np.asarray(center, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if center.shape != (X.shape[1],) or scale.shape != (X.shape[1],):
        raise ValidationError(
            f"center/scale of shapes {center.shape}/{scale.shape} do not "
            f"match {X.shape[1]} columns"
        )
    if np.any(scale <= 0):
        raise ValidationError("scale entries must be positive")
    return (X - center) / scale
