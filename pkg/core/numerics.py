"""
Numerical kernels shared by the estimators: order statistics, the chi-square
inverse CDF and Cholesky based solves of symmetric positive definite systems.

Everything here is a pure function of its arguments.
"""
import math
from functools import lru_cache

import numpy as np

import constants
from core.exceptions import DataValidationError, NotPositiveDefiniteError

GAMMA_ACCURACY = 1e-15
GAMMA_MAX_ITERATION = 10000
TINY = 1e-300


# ──────────────
# Order statistics
# ──────────────

def median(values):
    """
    Median of a one dimensional sample. Even length samples return the midpoint
    of the two middle order statistics.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DataValidationError("empty sample")
    if not np.all(np.isfinite(values)):
        raise DataValidationError("sample contains non-finite values")
    return float(np.median(values))


def column_medians(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] == 0:
        raise DataValidationError("empty sample")
    return np.median(matrix, axis=0)


def mad_squared(matrix):
    """
    Squared median absolute deviation of every column, scaled to estimate the
    variance of a normal sample.
    """
    matrix = np.asarray(matrix, dtype=float)
    deviations = matrix - column_medians(matrix)
    return constants.COMEDIAN_CONSTANT * np.median(deviations ** 2, axis=0)


# ──────────────
# Chi-square law
# ──────────────

def _gamma_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(GAMMA_MAX_ITERATION):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_ACCURACY:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a, x):
    # modified Lentz evaluation of the upper tail Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAX_ITERATION + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_ACCURACY:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_lower_gamma(a, x):
    if a <= 0:
        raise DataValidationError("gamma shape must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def chisq_cdf(dof, x):
    return regularized_lower_gamma(dof / 2.0, x / 2.0)


def chisq_pdf(dof, x):
    if x <= 0:
        return 0.0
    a = dof / 2.0
    return math.exp((a - 1.0) * math.log(x) - x / 2.0 - a * math.log(2.0) - math.lgamma(a))


@lru_cache(maxsize=1024)
def chisq_quantile(dof, prob):
    """
    Value x with P(chi2_dof <= x) = prob.

    The root is bracketed by doubling, narrowed by bisection and polished with
    Newton steps that are only accepted while they stay inside the bracket.
    """
    if int(dof) != dof or dof < 1:
        raise DataValidationError(f"degrees of freedom must be a positive integer, got {dof}")
    if not 0.0 < prob < 1.0:
        raise DataValidationError(f"probability must lie in (0, 1), got {prob}")
    dof = int(dof)

    low, high = 0.0, max(1.0, float(dof))
    while chisq_cdf(dof, high) < prob:
        low, high = high, 2.0 * high

    for _ in range(200):
        mid = 0.5 * (low + high)
        if chisq_cdf(dof, mid) < prob:
            low = mid
        else:
            high = mid
        if high - low <= 1e-9 * max(1.0, high):
            break

    x = 0.5 * (low + high)
    for _ in range(50):
        density = chisq_pdf(dof, x)
        if density <= 0:
            break
        step = (chisq_cdf(dof, x) - prob) / density
        candidate = x - step
        if not low <= candidate <= high:
            break
        x = candidate
        if abs(step) <= 1e-15 * max(1.0, x):
            break
    return x


# ──────────────
# SPD solves
# ──────────────

def cholesky(matrix, rtol=0.0):
    """
    Lower triangular L with L @ L.T == matrix, reading only the lower triangle.

    A pivot at or below rtol * max(diag) raises NotPositiveDefiniteError with the
    0-based pivot index.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DataValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataValidationError("matrix contains non-finite values")

    size = a.shape[0]
    threshold = rtol * max(float(np.max(np.abs(np.diag(a)))), 0.0)
    lower = np.zeros_like(a)
    for j in range(size):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not pivot > threshold:
            raise NotPositiveDefiniteError(j, pivot)
        lower[j, j] = math.sqrt(pivot)
        if j + 1 < size:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def forward_substitution(lower, rhs):
    solution = np.array(rhs, dtype=float, copy=True)
    for i in range(lower.shape[0]):
        solution[i] = (solution[i] - lower[i, :i] @ solution[:i]) / lower[i, i]
    return solution


def back_substitution(upper, rhs):
    solution = np.array(rhs, dtype=float, copy=True)
    for i in range(upper.shape[0] - 1, -1, -1):
        solution[i] = (solution[i] - upper[i, i + 1:] @ solution[i + 1:]) / upper[i, i]
    return solution


def cholesky_solve(lower, rhs):
    return back_substitution(lower.T, forward_substitution(lower, rhs))


def spd_solve(matrix, rhs, rtol=0.0):
    """
    Solve matrix @ X = rhs for symmetric positive definite matrix.
    rhs may be a vector or a matrix of right hand sides.
    """
    rhs = np.asarray(rhs, dtype=float)
    lower = cholesky(matrix, rtol=rtol)
    if rhs.shape[0] != lower.shape[0]:
        raise DataValidationError(f"right hand side has {rhs.shape[0]} rows, expected {lower.shape[0]}")
    return cholesky_solve(lower, rhs)


def quadratic_forms(lower, deviations):
    """
    Row-wise c_i^T A^-1 c_i for the factor L of A, clipped at zero.
    """
    half = forward_substitution(lower, np.asarray(deviations, dtype=float).T)
    return np.maximum(np.sum(half ** 2, axis=0), 0.0)


def partition_joint(matrix):
    """
    Split the scatter of z = (x, y) into its xx block, xy column and yy entry.
    """
    matrix = np.asarray(matrix, dtype=float)
    p = matrix.shape[0] - 1
    return matrix[:p, :p], matrix[:p, p], float(matrix[p, p])
