"""Gaussian process intensity fields on a regular grid.

The field W is a zero-mean GP with a squared-exponential kernel of unit
marginal variance, realized at the d x d grid nodes of a Domain. Off-grid
values are kriging (conditional-mean) predictions from the node values, and
the relative intensity is logistic(beta_0 W + sum_k beta_k X_k).
"""

import functools
import math

import numpy as np
from scipy.linalg import cho_solve, cholesky
from scipy.spatial.distance import cdist
from scipy.special import expit

from fuelgen.core.types import CovMatrix, CovariateStack, IntensityField
from fuelgen.exceptions import NumericalError, ParameterError, ValidationException
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

DEFAULT_JITTER = 1e-8
MAX_JITTER = 1e-4

# candidate points are kriged in chunks to bound the cross-covariance size
_PREDICT_CHUNK = 4096


def se_kernel(a, b, rho):
    """Squared-exponential covariance between point sets a (n x 2) and b (m x 2)."""
    sq = cdist(np.asarray(a, dtype=float).reshape(-1, 2),
               np.asarray(b, dtype=float).reshape(-1, 2), 'sqeuclidean')
    return np.exp(-sq / (2.0 * rho * rho))


@utils.escalate(parameter='jitter', start=DEFAULT_JITTER, factor=10, limit=MAX_JITTER)
def _factor(nodes, rho, jitter):
    matrix = se_kernel(nodes, nodes, rho)
    matrix[np.diag_indices_from(matrix)] += jitter
    chol = cholesky(matrix, lower=True, check_finite=False)
    return matrix, chol, jitter


@utils.require_positive('rho')
@utils.require_nonnegative('jitter')
def build_covariance(domain, rho, jitter=DEFAULT_JITTER):
    """Return the CovMatrix of the grid nodes of ``domain`` for lengthscale ``rho``.

    Entry (i, j) is exp(-|s_i - s_j|^2 / (2 rho^2)) plus ``jitter`` on the
    diagonal. When the Cholesky factorization fails the jitter is escalated
    tenfold (from 1e-8 when zero was given) up to 1e-4; the jitter actually
    used is recorded on the result.

    Raise NumericalError if the factorization still fails.
    """
    try:
        matrix, chol, used = _factor(domain.nodes(), float(rho), float(jitter))
    except np.linalg.LinAlgError as e:
        raise NumericalError("covariance is not positive definite even with jitter %g: %s"
                             % (MAX_JITTER, e), context='build_covariance') from e

    if used != jitter:
        log.debug("escalated covariance jitter from %g to %g (rho=%g, d=%d)",
                  jitter, used, rho, domain.d)

    matrix.setflags(write=False)
    chol.setflags(write=False)
    return CovMatrix(domain, float(rho), used, matrix, chol)


@functools.lru_cache(maxsize=4)
def _cached_outcome(domain, rho, jitter):
    try:
        return build_covariance(domain, rho, jitter), None
    except NumericalError as e:
        return None, e


def cached_covariance(domain, rho, jitter=DEFAULT_JITTER):
    """Memoized :func:`build_covariance`; realizations at one theta share a factorization.

    A NumericalError is memoized too, so a lengthscale whose factorization
    failed is not escalated again.
    """
    cov, error = _cached_outcome(domain, float(rho), float(jitter))
    if error is not None:
        raise NumericalError(Exception.__str__(error), context='cached_covariance') from error
    return cov


def sample_field(cov, seed):
    """Draw W = L z at the grid nodes, z standard normal from the seeded stream."""
    rng = utils.substream(seed, 'field')
    z = rng.standard_normal(cov.size)
    W = cov.chol @ z
    W.setflags(write=False)
    return IntensityField(cov.domain, W, None, cov.rho, seed)


def conditional_mean(nodes, values, rho, points, jitter=0.0, alpha=None):
    """Simple-kriging mean at ``points`` given ``values`` at ``nodes``.

    This is k(points, nodes) K^-1 values, with K the node covariance plus
    ``jitter``. ``alpha`` = K^-1 values may be passed in when it is already known.
    """
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    points = np.asarray(points, dtype=float).reshape(-1, 2)

    if alpha is None:
        K = se_kernel(nodes, nodes, rho)
        K[np.diag_indices_from(K)] += jitter
        try:
            alpha = cho_solve((cholesky(K, lower=True), True), np.asarray(values, dtype=float))
        except np.linalg.LinAlgError as e:
            raise NumericalError("kriging system is singular: %s" % e,
                                 context='conditional_mean') from e

    out = np.empty(len(points))
    for start in range(0, len(points), _PREDICT_CHUNK):
        chunk = points[start:start + _PREDICT_CHUNK]
        out[start:start + len(chunk)] = se_kernel(chunk, nodes, rho) @ alpha
    return out


def kriging_weights(field, cov):
    """Return K^-1 W, solved once per realization."""
    return cho_solve((cov.chol, True), field.W, check_finite=False)


def predict_at(field, cov, points, alpha=None):
    """Kriging mean of W at off-grid ``points`` (n x 2) given the grid values.

    Raise ParameterError for points outside the field's domain.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = field.domain.contains(points)
    if not np.all(inside):
        raise ParameterError("%d of %d query points lie outside the domain"
                             % (np.count_nonzero(~inside), len(points)), context='predict_at')

    if alpha is None:
        alpha = kriging_weights(field, cov)

    return conditional_mean(field.domain.nodes(), None, cov.rho, points, alpha=alpha)


def transform_intensity(W, covariates=None, covariate_values=None):
    """Return omega = logistic(beta_0 W + sum_k beta_k X_k).

    :param W: field values, one per location.
    :param covariates: a CovariateStack (its weights are used, and its grid
      values when ``covariate_values`` is not given), or None for omega = logistic(W).
    :param covariate_values: (K x n) covariate values at the same locations as W.
    """
    W = np.asarray(W, dtype=float)

    if covariates is None:
        return expit(W)

    if covariate_values is None:
        covariate_values = covariates.fields
    covariate_values = np.asarray(covariate_values, dtype=float)

    if covariate_values.size and (covariate_values.min() < -1 or covariate_values.max() > 1):
        raise ValidationException("covariate values must lie in [-1, 1]", key='covariates')
    if covariates.k and covariate_values.shape != (covariates.k, W.shape[0]):
        raise ValidationException("expected covariate values of shape %s, got %s"
                                  % ((covariates.k, W.shape[0]), covariate_values.shape),
                                  key='covariates')

    eta = covariates.beta[0] * W
    for beta_k, X_k in zip(covariates.beta[1:], covariate_values):
        eta = eta + beta_k * X_k

    return expit(eta)


def covariate_values_at(covariates, domain, points):
    """Nearest-grid-cell covariate values at ``points``; returns K x n."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if covariates is None or covariates.k == 0:
        return np.zeros((0, len(points)))

    col = np.clip(((points[:, 0] - domain.x_min) / domain.width * domain.d).astype(int),
                  0, domain.d - 1)
    row = np.clip(((points[:, 1] - domain.y_min) / domain.height * domain.d).astype(int),
                  0, domain.d - 1)
    return covariates.fields[:, row * domain.d + col]


class RelativeIntensity:
    """omega(s) for one realization, callable on arrays of points.

    The kriging solve is done once at construction; ``field`` carries omega
    at the grid nodes.
    """

    def __init__(self, field, cov, covariates=None):
        self.field = field.with_omega(transform_intensity(field.W, covariates))
        self.cov = cov
        self.covariates = covariates
        self._alpha = kriging_weights(field, cov)
        self._nodes = field.domain.nodes()

    @property
    def domain(self):
        return self.field.domain

    def __call__(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        W = conditional_mean(self._nodes, None, self.cov.rho, points, alpha=self._alpha)
        values = covariate_values_at(self.covariates, self.domain, points)
        return transform_intensity(W, self.covariates, values)


def default_grid_resolution(domain, rho_min, floor=32, cap=64):
    """Smallest d with node spacing <= rho_min / 2, clamped to [floor, cap]."""
    if not rho_min > 0:
        raise ParameterError("rho_min must be positive; received %r" % rho_min)

    extent = max(domain.width, domain.height)
    d = int(math.ceil(extent / (rho_min / 2.0)))
    return max(floor, min(cap, d))


def resample_covariate(values, grid_origin, cellsize, domain):
    """Nearest-cell resample of a north-up raster onto the domain's grid nodes.

    :param values: nrows x ncols array, row 0 at the north edge.
    :param grid_origin: (x, y) of the raster's lower-left corner.
    """
    values = np.asarray(values, dtype=float)
    nrows, ncols = values.shape
    nodes = domain.nodes()

    col = np.floor((nodes[:, 0] - grid_origin[0]) / cellsize).astype(int)
    row_from_south = np.floor((nodes[:, 1] - grid_origin[1]) / cellsize).astype(int)
    if (col.min() < 0 or col.max() >= ncols or
            row_from_south.min() < 0 or row_from_south.max() >= nrows):
        raise ValidationException("covariate raster does not cover the domain",
                                  key='covariates')

    return values[nrows - 1 - row_from_south, col]


def load_covariates(paths, beta, domain):
    """Read ASCII grid covariates and stack them on the domain grid.

    :param paths: covariate raster files, in weight order.
    :param beta: (beta_0, beta_1, ..., beta_K).
    """
    from fuelgen.protocol.grid import AsciiGrid  # protocol imports core types

    fields = []
    names = []
    for path in paths:
        grid = AsciiGrid.load(path)
        fields.append(resample_covariate(grid.values, grid.origin, grid.cellsize, domain))
        names.append(str(path))
        log.debug("loaded covariate %s (%dx%d, cell %g)",
                  path, grid.values.shape[1], grid.values.shape[0], grid.cellsize)

    return CovariateStack(fields, beta, names)
