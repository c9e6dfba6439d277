"""
Robust location and scatter of the joint sample: L1-median, shrinkage mean,
comedian matrix and shrinkage scatter.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

import constants
from core.conf import resolve
from core.exceptions import DataValidationError, DegenerateScatterError, NotPositiveDefiniteError
from core.numerics import cholesky, column_medians, mad_squared

logger = logging.getLogger('core')

TIE_DISTANCE = 1e-12
ETA_STEP = 0.1


@dataclass(frozen=True)
class WeiszfeldResult:
    point: np.ndarray
    converged: bool
    iterations: int
    objectives: tuple


@dataclass(frozen=True)
class ShrinkageLocation:
    center: np.ndarray
    eta: float
    nu: float
    l1_median: np.ndarray
    converged: bool = True


@dataclass(frozen=True)
class ShrinkageScatter:
    matrix: np.ndarray
    eta: float
    nu: float
    comedian: np.ndarray
    factor: np.ndarray = field(repr=False, compare=False, default=None)


def _as_sample(data, minimum=1):
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, np.newaxis]
    if data.ndim != 2:
        raise DataValidationError(f"expected an n x d matrix, got {data.ndim} dimensions")
    if data.shape[0] < minimum:
        if minimum == 1:
            raise DataValidationError("empty sample")
        raise DataValidationError(f"insufficient sample: {data.shape[0]} observations, at least {minimum} required")
    if not np.all(np.isfinite(data)):
        raise DataValidationError("sample contains non-finite values")
    return data


def weiszfeld(data, tolerance=1e-8, max_iter=1000):
    """
    Weiszfeld iteration for the L1-median, started at the coordinatewise median.

    When the iterate sits on a data point the step is pulled back toward the
    current iterate in proportion to the number of coincident points, which keeps
    the objective non-increasing without restarting.
    """
    data = _as_sample(data)
    n = data.shape[0]
    current = column_medians(data)
    if n == 1:
        return WeiszfeldResult(point=data[0].copy(), converged=True, iterations=0, objectives=(0.0,))

    objectives = []
    for iteration in range(1, max_iter + 1):
        diff = data - current
        dist = np.sqrt(np.sum(diff ** 2, axis=1))
        objectives.append(float(dist.sum()))

        free = dist >= TIE_DISTANCE
        ties = n - int(free.sum())
        if not free.any():
            return WeiszfeldResult(point=current, converged=True, iterations=iteration, objectives=tuple(objectives))

        inverse = 1.0 / dist[free]
        step = (data[free] * inverse[:, np.newaxis]).sum(axis=0) / inverse.sum()
        if ties:
            pull = np.linalg.norm((diff[free] * inverse[:, np.newaxis]).sum(axis=0))
            gamma = min(1.0, ties / pull) if pull > 0 else 1.0
            step = (1.0 - gamma) * step + gamma * current

        change = float(np.max(np.abs(step - current)))
        current = step
        if change < tolerance:
            final = float(np.sqrt(np.sum((data - current) ** 2, axis=1)).sum())
            objectives.append(final)
            return WeiszfeldResult(point=current, converged=True, iterations=iteration, objectives=tuple(objectives))

    logger.warning(f'L1-median not converged after {max_iter} iterations')
    return WeiszfeldResult(point=current, converged=False, iterations=max_iter, objectives=tuple(objectives))


def l1_median(data, tolerance=1e-8, max_iter=1000):
    return weiszfeld(data, tolerance=tolerance, max_iter=max_iter).point


def shrinkage_mean(data, config=None):
    """
    L1-median shrunk toward its own grand mean:
    center = (1 - eta) * l1_median + eta * nu * e.
    """
    config = resolve(config)
    data = _as_sample(data, minimum=2)
    n, d = data.shape

    result = weiszfeld(data, tolerance=config.l1_tolerance, max_iter=config.l1_max_iter)
    mm = result.point
    nu = float(mm.mean())

    # variance of the L1-median is roughly pi/2 times that of the mean
    variance = math.pi / 2.0 * float(mad_squared(data).sum()) / n
    gap = float(np.sum((mm - nu) ** 2))
    eta = min(1.0, variance / (variance + gap)) if variance + gap > 0 else 0.0

    center = (1.0 - eta) * mm + eta * nu * np.ones(d)
    logger.debug(f'shrinkage mean: eta={eta:.6g} nu={nu:.6g} iterations={result.iterations}')
    return ShrinkageLocation(center=center, eta=eta, nu=nu, l1_median=mm, converged=result.converged)


def comedian_matrix(data, center):
    """
    Entry (j, t) is 2.198 * median_i (x_ij - center_j)(x_it - center_t).
    Only the upper triangle is computed and mirrored, so the result is exactly symmetric.
    """
    data = _as_sample(data, minimum=2)
    center = np.asarray(center, dtype=float)
    d = data.shape[1]
    if center.shape != (d,):
        raise DataValidationError(f"center has shape {center.shape}, expected ({d},)")

    deviations = data - center
    rows, cols = np.triu_indices(d)
    entries = constants.COMEDIAN_CONSTANT * np.median(deviations[:, rows] * deviations[:, cols], axis=0)
    matrix = np.empty((d, d))
    matrix[rows, cols] = entries
    matrix[cols, rows] = entries
    return matrix


def scatter_intensity(data, center, comedian, nu):
    """
    Ledoit-Wolf style ratio of the sampling variability of the comedian to its
    distance from the scaled identity target, truncated to [0, 1].
    """
    n, d = data.shape
    target_gap = float(np.sum((comedian - nu * np.eye(d)) ** 2))
    if target_gap <= 0:
        return 1.0

    deviations = data - center
    k = constants.COMEDIAN_CONSTANT
    squared_norms = np.sum(deviations ** 2, axis=1)
    quadratic = np.einsum('ij,jk,ik->i', deviations, comedian, deviations)
    frobenius = float(np.sum(comedian ** 2))
    # sum_i || k c_i c_i^T - S ||_F^2 expanded so no d x d matrix is built per observation
    spread = float(np.sum(k * k * squared_norms ** 2 - 2.0 * k * quadratic + frobenius)) / n ** 2
    spread = min(max(spread, 0.0), target_gap)
    return spread / target_gap


def shrinkage_scatter(data, location, config=None, eta=None):
    """
    (1 - eta) * comedian + eta * nu * I with nu = trace(comedian) / d.

    eta is floored at config.eta_floor and stepped up by 0.1 until the result
    factorizes. Passing eta fixes the intensity instead of estimating it.
    """
    config = resolve(config)
    data = _as_sample(data, minimum=2)
    d = data.shape[1]

    comedian = comedian_matrix(data, location.center)
    nu = float(np.trace(comedian)) / d
    if not nu > 0:
        raise DegenerateScatterError()

    if eta is None:
        eta = scatter_intensity(data, location.center, comedian, nu)
        eta = min(1.0, max(config.eta_floor, eta))
    elif not 0.0 <= eta <= 1.0:
        raise DataValidationError(f"shrinkage intensity must lie in [0, 1], got {eta}")

    identity = np.eye(d)
    while True:
        matrix = (1.0 - eta) * comedian + eta * nu * identity
        try:
            factor = cholesky(matrix)
            break
        except NotPositiveDefiniteError as exc:
            if eta >= 1.0:
                raise DegenerateScatterError() from exc
            logger.warning(f'shrinkage scatter not positive definite at eta={eta:.6g} (pivot {exc.pivot}), increasing eta')
            eta = min(1.0, eta + ETA_STEP)

    logger.debug(f'shrinkage scatter: eta={eta:.6g} nu={nu:.6g}')
    return ShrinkageScatter(matrix=matrix, eta=eta, nu=nu, comedian=comedian, factor=factor)
