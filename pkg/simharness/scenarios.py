"""
Simulation scenarios. The true parameters are beta = 0 and alpha = 0 throughout.

NE   standard normal carriers and errors
TE   standard normal carriers, t errors with 3 degrees of freedom
NEO  NE with a fraction delta of observations replaced by outliers whose carriers
     are centered at lambda * sqrt(chi2_{p,.99}) and response at k * sqrt(chi2_{1,.99})
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

import constants
from core.exceptions import DataValidationError
from core.numerics import chisq_quantile
from core.regression import Dataset

HALF_STEP_GRID = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0)
INTEGER_GRID = tuple(float(value) for value in range(11))

OUTLIER_VARIANCE = 1.5
OUTLIER_LEVEL = 0.99

# stream tags appended to (seed, replicate_index)
TRANSFORM_STREAM = 1
SPLIT_STREAM = 2


def grid_values(name):
    if name == constants.INTEGER_GRID:
        return INTEGER_GRID
    if name == constants.HALF_GRID:
        return HALF_STEP_GRID
    raise DataValidationError(f"unknown grid {name!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    p: int
    n: int
    M: int
    delta: float = 0.0
    lambda_grid: tuple = field(default=())
    k_grid: tuple = field(default=())
    seed: int = 0
    mode: str = constants.BERNOULLI

    def __post_init__(self):
        scenario = str(self.scenario).upper()
        if scenario not in dict(constants.SCENARIOS):
            raise DataValidationError(f"unknown scenario {self.scenario!r}")
        object.__setattr__(self, 'scenario', scenario)
        object.__setattr__(self, 'lambda_grid', tuple(float(value) for value in self.lambda_grid))
        object.__setattr__(self, 'k_grid', tuple(float(value) for value in self.k_grid))
        if self.p < 1:
            raise DataValidationError("p must be at least 1")
        if self.n < self.p + 2:
            raise DataValidationError(f"n must be at least p + 2 = {self.p + 2}")
        if self.M < 1:
            raise DataValidationError("M must be at least 1")
        if not 0.0 <= self.delta < 0.5:
            raise DataValidationError("delta must lie in [0, 0.5), the breakdown point ceiling is 50%")
        if self.mode not in dict(constants.CONTAMINATION_MODES):
            raise DataValidationError(f"unknown contamination mode {self.mode!r}")
        if scenario == constants.NEO and not (self.lambda_grid and self.k_grid):
            raise DataValidationError("NEO requires non-empty lambda and k grids")
        if not 0 <= self.seed < 2 ** 64:
            raise DataValidationError("seed must be a 64-bit non-negative integer")

    def cells(self):
        """
        (lambda, k) pairs in grid order; NE and TE have the single cell (0, 0).
        """
        if self.scenario != constants.NEO:
            return [(0.0, 0.0)]
        return [(lam, k) for lam in self.lambda_grid for k in self.k_grid]

    def with_changes(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return {
            'scenario': self.scenario,
            'p': self.p,
            'n': self.n,
            'M': self.M,
            'delta': self.delta,
            'lambda_grid': list(self.lambda_grid),
            'k_grid': list(self.k_grid),
            'seed': self.seed,
            'mode': self.mode,
        }


def replicate_rng(seed, replicate_index, *stream):
    return np.random.default_rng(np.random.SeedSequence([seed, replicate_index, *stream]))


def _contamination_mask(config, rng):
    n = config.n
    if config.mode == constants.FIXED:
        count = math.ceil(config.delta * n)
        mask = np.zeros(n, dtype=bool)
        mask[rng.permutation(n)[:count]] = True
        return mask
    return rng.random(n) < config.delta


def generate_with_mask(config, replicate_index, lam=0.0, k=0.0):
    """
    Dataset of replicate `replicate_index` and the boolean mask of replaced rows.

    Every cell of the grid draws from the same stream, so replicates differ
    across cells only in the outlier magnitudes.
    """
    rng = replicate_rng(config.seed, replicate_index)
    n, p = config.n, config.p
    carriers = rng.standard_normal((n, p))

    if config.scenario == constants.TE:
        numerator = rng.standard_normal(n)
        response = numerator / np.sqrt(rng.chisquare(3, n) / 3.0)
    else:
        response = rng.standard_normal(n)

    mask = np.zeros(n, dtype=bool)
    if config.scenario == constants.NEO and config.delta > 0:
        mask = _contamination_mask(config, rng)
        scale = math.sqrt(OUTLIER_VARIANCE)
        carrier_noise = rng.standard_normal((n, p))
        response_noise = rng.standard_normal(n)
        carrier_center = lam * math.sqrt(chisq_quantile(p, OUTLIER_LEVEL))
        response_center = k * math.sqrt(chisq_quantile(1, OUTLIER_LEVEL))
        carriers[mask] = carrier_center + scale * carrier_noise[mask]
        response[mask] = response_center + scale * response_noise[mask]

    return Dataset(carriers, response), mask


def generate(config, replicate_index, lam=0.0, k=0.0):
    data, _ = generate_with_mask(config, replicate_index, lam, k)
    return data
