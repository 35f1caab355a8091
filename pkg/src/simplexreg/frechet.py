"""Power-family means of compositions.

The mean of compositions u_1..u_n under exponent alpha is the closure of
(sum_j u_j^alpha)^(1/alpha); its alpha -> 0 limit is the closed geometric
mean, which is what alpha = 0 computes directly.  alpha = 1 recovers the
arithmetic mean.  Weighted variants accept nonnegative weights with a
positive sum; weights are normalized internally, which the closure makes
equivalent to leaving them raw.

All power paths average the powered parts instead of summing them (the
closure cancels the difference): with a raw sum the outer 1/alpha power
overflows for tiny exponents, where sum^(1/alpha) is roughly n^(1/alpha).
"""

import numpy as np

from .errors import DegenerateInputError, ValidationError, ZeroNotAllowedError
from .simplex import as_composition_matrix, closure
from .transforms import check_alpha


def _check_zero_alpha(U, a, op):
    if a <= 0 and np.any(U == 0):
        raise ZeroNotAllowedError(
            f"{op}: zero components require alpha > 0, got alpha={a!r}"
        )


def _mean_over_axis1(stack, a):
    # (m, k, D) -> (m, D); assumes validated strictly positive input
    # whenever a <= 0.
    if a == 0.0:
        return closure(np.exp(np.log(stack).mean(axis=1)))
    return closure((stack**a).mean(axis=1) ** (1.0 / a))


def _weighted_mean_rows(W, U, a):
    # W (m, n) rows of normalized weights, U (n, D) -> (m, D).
    if a == 0.0:
        return closure(np.exp(W @ np.log(U)))
    return closure((W @ U**a) ** (1.0 / a))


def frechet_mean(U, alpha):
    """Mean composition of the rows of U under exponent alpha."""
    a = check_alpha(alpha)
    arr = as_composition_matrix(U)
    _check_zero_alpha(arr, a, "frechet_mean")
    if a == 0.0:
        return closure(np.exp(np.log(arr).mean(axis=0)))
    return closure((arr**a).mean(axis=0) ** (1.0 / a))


def weighted_frechet_mean(U, weights, alpha):
    """Weighted mean composition of the rows of U.

    Parameters
    ----------
    U : array_like, shape (n, D)
        Row compositions.
    weights : array_like, shape (n,)
        Nonnegative finite weights with a positive sum.
    alpha : float
        Power exponent in [-1, 1].
    """
    a = check_alpha(alpha)
    arr = as_composition_matrix(U)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.shape[0] != arr.shape[0]:
        raise ValidationError(
            f"weights shape {w.shape} does not match {arr.shape[0]} rows"
        )
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights contain non-finite values")
    if np.any(w < 0):
        raise ValidationError("weights contain negative values")
    total = w.sum()
    if total <= 0:
        raise DegenerateInputError("weights sum to zero")
    _check_zero_alpha(arr, a, "weighted_frechet_mean")
    wn = w / total
    if a == 0.0:
        return closure(np.exp(wn @ np.log(arr)))
    return closure((wn @ arr**a) ** (1.0 / a))


def frechet_path(U, alphas):
    """Mean composition evaluated along a grid of exponents.

    Returns a list of (alpha, mean) pairs in grid order, one mean per
    requested exponent.
    """
    arr = as_composition_matrix(U)
    grid = np.atleast_1d(np.asarray(alphas, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("alpha grid must be a non-empty 1-D sequence")
    out = []
    for alpha in grid:
        out.append((float(alpha), frechet_mean(arr, float(alpha))))
    return out
