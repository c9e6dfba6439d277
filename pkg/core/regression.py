"""
Shrinkage-reweighted (SR) regression and its ordinary least squares baseline.

The SR fit runs three stages on the joint sample z = (x, y):

1. robust squared distances d2 from the shrinkage mean and shrinkage scatter of
   z with MAD-scaled carriers, then hard rejection at the chi-square quantile
   with p + 1 degrees of freedom;
2. slope, intercept and scale from the moments of the retained observations (SW);
3. hard rejection of large standardized SW residuals (leverage adjusted) and a
   least squares refit on the survivors.
"""
import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

import constants
from core.conf import resolve
from core.exceptions import (
    CollinearCarriersError, DataValidationError, NotPositiveDefiniteError, OverTrimmingError,
)
from core.metrics import track_fit
from core.numerics import (
    chisq_cdf, chisq_quantile, mad_squared, partition_joint, quadratic_forms, spd_solve,
)
from core.shrinkage import shrinkage_mean, shrinkage_scatter

logger = logging.getLogger('core')

# relative pivot threshold used to call a moment matrix singular
COLLINEARITY_RTOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    """
    Carriers X (n x p) and response y (n,). names holds p + 1 labels, carriers first.
    """
    carriers: np.ndarray
    response: np.ndarray
    names: tuple = None

    def __post_init__(self):
        carriers = np.array(self.carriers, dtype=float)
        response = np.array(self.response, dtype=float)
        if carriers.ndim == 1:
            carriers = carriers[:, np.newaxis]
        if carriers.ndim != 2 or response.ndim != 1:
            raise DataValidationError("carriers must be an n x p matrix and response an n vector")
        if carriers.shape[0] != response.shape[0]:
            raise DataValidationError(
                f"carriers have {carriers.shape[0]} rows but response has {response.shape[0]}"
            )
        if carriers.shape[1] == 0:
            raise DataValidationError("at least one carrier is required, intercept-only fits are not supported")
        if not (np.all(np.isfinite(carriers)) and np.all(np.isfinite(response))):
            raise DataValidationError("dataset contains non-finite values")
        names = self.names
        if names is None:
            names = tuple(f'x{j + 1}' for j in range(carriers.shape[1])) + ('y',)
        names = tuple(str(name) for name in names)
        if len(names) != carriers.shape[1] + 1:
            raise DataValidationError(f"expected {carriers.shape[1] + 1} column names, got {len(names)}")
        carriers.setflags(write=False)
        response.setflags(write=False)
        object.__setattr__(self, 'carriers', carriers)
        object.__setattr__(self, 'response', response)
        object.__setattr__(self, 'names', names)

    @property
    def n(self):
        return self.carriers.shape[0]

    @property
    def p(self):
        return self.carriers.shape[1]

    @property
    def joint(self):
        return np.column_stack([self.carriers, self.response])

    def fingerprint(self):
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.carriers).tobytes())
        digest.update(np.ascontiguousarray(self.response).tobytes())
        digest.update('|'.join(self.names).encode('utf-8'))
        return digest.hexdigest()

    def subset(self, indices):
        indices = np.asarray(indices)
        return Dataset(self.carriers[indices], self.response[indices], self.names)

    def require_fittable(self):
        if self.n < self.p + 2:
            raise DataValidationError(
                f"insufficient sample: n={self.n} observations for p={self.p} carriers, need at least {self.p + 2}"
            )


@dataclass(frozen=True)
class RegressionFit:
    beta: np.ndarray
    alpha: float
    sigma2: float
    w: np.ndarray
    wr: np.ndarray
    r2: float
    method: str
    adj_r2: float = None
    # diagnostics of the robust stages, None for OLS
    d2: np.ndarray = field(default=None, repr=False)
    residual_d2: np.ndarray = field(default=None, repr=False)
    q1: float = None
    q2: float = None
    location_eta: float = None
    scatter_eta: float = None

    @property
    def outliers(self):
        return tuple(int(i) for i in np.flatnonzero(self.wr == 0))

    @property
    def phi(self):
        return np.append(self.beta, self.alpha)

    def predict(self, carriers):
        carriers = np.asarray(carriers, dtype=float)
        if carriers.ndim == 1:
            carriers = carriers[:, np.newaxis]
        return carriers @ self.beta + self.alpha


@dataclass(frozen=True)
class SWEstimates:
    location: np.ndarray
    scatter: np.ndarray
    w: np.ndarray
    d2: np.ndarray
    q1: float
    location_eta: float
    scatter_eta: float


# ──────────────
# Diagnostics
# ──────────────

def _residuals(data, beta, alpha):
    return data.response - data.carriers @ beta - alpha


def r_squared(data, fit):
    """
    1 - SSE / SST. SSE sums squared residuals of the observations with wr = 1,
    SST is taken about the mean of the whole response.
    OLS fits carry wr = 1 everywhere, so this is the usual R2 for them.
    """
    kept = fit.wr == 1
    residuals = _residuals(data, fit.beta, fit.alpha)[kept]
    total = float(np.sum((data.response - data.response.mean()) ** 2))
    if total <= 0:
        return 0.0
    return 1.0 - float(np.sum(residuals ** 2)) / total


def adjusted_r_squared(data, fit, r2=None):
    r2 = r_squared(data, fit) if r2 is None else r2
    m = int(np.sum(fit.wr == 1))
    if m - data.p - 1 <= 0:
        return r2
    return 1.0 - (1.0 - r2) * (m - 1) / (m - data.p - 1)


def _with_scores(data, fit):
    r2 = r_squared(data, fit)
    return RegressionFit(
        beta=fit.beta, alpha=fit.alpha, sigma2=fit.sigma2, w=fit.w, wr=fit.wr, r2=r2,
        method=fit.method, adj_r2=adjusted_r_squared(data, fit, r2), d2=fit.d2,
        residual_d2=fit.residual_d2, q1=fit.q1, q2=fit.q2,
        location_eta=fit.location_eta, scatter_eta=fit.scatter_eta,
    )


# ──────────────
# Moment fits
# ──────────────

def _slope_from_moments(location, scatter, message):
    sxx, sxy, syy = partition_joint(scatter)
    try:
        beta = spd_solve(sxx, sxy, rtol=COLLINEARITY_RTOL)
    except NotPositiveDefiniteError as exc:
        raise CollinearCarriersError(message) from exc
    alpha = float(location[-1] - beta @ location[:-1])
    return beta, alpha, sxx, syy


@track_fit(constants.OLS)
def ols_fit(data):
    """
    beta = Sxx^-1 Sxy and alpha = mean_y - beta^T mean_x from the plain moments.
    """
    data.require_fittable()
    z = data.joint
    location = z.mean(axis=0)
    centered = z - location
    scatter = centered.T @ centered / data.n
    beta, alpha, _, _ = _slope_from_moments(location, scatter, "collinear carriers")

    residuals = _residuals(data, beta, alpha)
    ones = np.ones(data.n)
    fit = RegressionFit(
        beta=beta, alpha=alpha, sigma2=float(np.mean(residuals ** 2)),
        w=ones, wr=ones.copy(), r2=0.0, method=constants.OLS,
    )
    return _with_scores(data, fit)


# ──────────────
# SR stages
# ──────────────

def _carrier_scales(carriers):
    scales = np.sqrt(mad_squared(carriers))
    return np.where(scales > 0, scales, 1.0)


def _initial_stage(data, config):
    # carriers go on a common robust scale, the response keeps its units
    z = data.joint / np.append(_carrier_scales(data.carriers), 1.0)
    location = shrinkage_mean(z, config)
    scatter = shrinkage_scatter(z, location, config)
    d2 = quadratic_forms(scatter.factor, z - location.center)
    return location, scatter, d2


def initial_distances(data, config=None):
    """
    Squared robust Mahalanobis distance of every z_i from the shrinkage mean
    in the metric of the shrinkage scatter.
    """
    config = resolve(config)
    _, _, d2 = _initial_stage(data, config)
    return d2


def sw_estimates(data, config=None):
    config = resolve(config)
    data.require_fittable()
    location, scatter, d2 = _initial_stage(data, config)

    q1 = chisq_quantile(data.p + 1, 1.0 - config.delta1)
    w = (d2 <= q1).astype(float)
    retained = int(w.sum())
    if retained < data.p + 2:
        raise OverTrimmingError(retained, data.p + 2, 'first')

    kept = data.joint[w == 1]
    mean = kept.mean(axis=0)
    centered = kept - mean
    covariance = centered.T @ centered / retained
    logger.debug(f'first stage retained {retained}/{data.n} observations (q1={q1:.6g})')
    return SWEstimates(
        location=mean, scatter=covariance, w=w, d2=d2, q1=q1,
        location_eta=location.eta, scatter_eta=scatter.eta,
    )


def _sw_stage(data, config):
    estimates = sw_estimates(data, config)
    beta, alpha, sxx, syy = _slope_from_moments(
        estimates.location, estimates.scatter, "collinear carriers after trimming",
    )
    sigma2 = max(syy - float(beta @ sxx @ beta), config.sigma2_floor)
    return estimates, beta, alpha, sigma2


@track_fit(constants.SW)
def sw_fit(data, config=None):
    """
    Interim fit from the first-stage moments. sigma2 is the residual variance
    Syy - beta^T Sxx beta of the retained observations.
    """
    config = resolve(config)
    estimates, beta, alpha, sigma2 = _sw_stage(data, config)
    fit = RegressionFit(
        beta=beta, alpha=alpha, sigma2=sigma2, w=estimates.w, wr=estimates.w.copy(), r2=0.0,
        method=constants.SW, d2=estimates.d2, q1=estimates.q1,
        location_eta=estimates.location_eta, scatter_eta=estimates.scatter_eta,
    )
    return _with_scores(data, fit)


def _residual_distances(data, estimates, beta, alpha, sigma2, config):
    """
    Squared SW residuals standardized by a prediction variance.

    The trimmed residual variance is made consistent at the normal model
    (truncation factor and lost degrees of freedom), then inflated by the
    leverage of each observation relative to the retained carriers.
    """
    retained = int(estimates.w.sum())
    p = data.p
    truncation = chisq_cdf(p + 3, estimates.q1) / (1.0 - config.delta1)
    scale = sigma2 / truncation * retained / max(retained - p - 1, 1)

    sxx, _, _ = partition_joint(estimates.scatter)
    offsets = data.carriers - estimates.location[:-1]
    leverage = np.sum(offsets * spd_solve(sxx, offsets.T).T, axis=1)
    residuals = _residuals(data, beta, alpha)
    return residuals ** 2 / (scale * (1.0 + (1.0 + leverage) / retained))


@track_fit(constants.SR)
def sr_fit(data, config=None):
    config = resolve(config)
    estimates, sw_beta, sw_alpha, sw_sigma2 = _sw_stage(data, config)

    residual_d2 = _residual_distances(data, estimates, sw_beta, sw_alpha, sw_sigma2, config)
    q2 = chisq_quantile(1, 1.0 - config.delta2)
    wr = (residual_d2 <= q2).astype(float)
    retained = int(wr.sum())
    if retained < data.p + 2:
        raise OverTrimmingError(retained, data.p + 2, 'residual')

    kept = wr == 1
    design = np.column_stack([data.carriers[kept], np.ones(retained)])
    gram = design.T @ design
    moment = design.T @ data.response[kept]
    try:
        phi = spd_solve(gram, moment, rtol=COLLINEARITY_RTOL)
    except NotPositiveDefiniteError as exc:
        raise CollinearCarriersError("collinear carriers after reweighting") from exc

    beta, alpha = phi[:-1], float(phi[-1])
    residuals = _residuals(data, beta, alpha)
    sigma2 = float(np.sum(wr * residuals ** 2) / retained)
    logger.debug(f'residual stage retained {retained}/{data.n} observations (q2={q2:.6g})')

    fit = RegressionFit(
        beta=beta, alpha=alpha, sigma2=sigma2, w=estimates.w, wr=wr, r2=0.0,
        method=constants.SR, d2=estimates.d2, residual_d2=residual_d2,
        q1=estimates.q1, q2=q2,
        location_eta=estimates.location_eta, scatter_eta=estimates.scatter_eta,
    )
    return _with_scores(data, fit)


FITTERS = {
    constants.OLS: lambda data, config=None: ols_fit(data),
    constants.SW: sw_fit,
    constants.SR: sr_fit,
}


def fit(data, method=constants.SR, config=None):
    method = str(method).upper()
    if method not in FITTERS:
        raise DataValidationError(f"unknown method {method!r}, expected one of {', '.join(FITTERS)}")
    return FITTERS[method](data, config)


def classify_observations(fit):
    """
    Label every observation from the two rejection stages:
    rejected only on residuals -> vertical outlier, rejected only in the joint
    distance -> good leverage point, rejected in both -> bad leverage point.
    """
    labels = []
    for w, wr in zip(fit.w, fit.wr):
        if w == 1 and wr == 1:
            labels.append(constants.REGULAR)
        elif w == 1:
            labels.append(constants.VERTICAL_OUTLIER)
        elif wr == 1:
            labels.append(constants.GOOD_LEVERAGE)
        else:
            labels.append(constants.BAD_LEVERAGE)
    return labels
