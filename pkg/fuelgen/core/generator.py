"""Stochastic disk layouts from the Gaussian Cox germ-grain model.

A realization draws a GP field on the domain grid, a Poisson disk count
n ~ Pois(lambda * A_D), places exactly n centers by thinning uniform
candidates with the relative intensity omega, and gives each center a
N+(mu, sigma^2) radius.
"""

import numpy as np
from scipy.stats import truncnorm

from fuelgen.core import gp
from fuelgen.core.types import BinaryRaster, DiskSet, Theta
from fuelgen.exceptions import GenerationError, ParameterError
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

# proposals allowed per requested point before placement is abandoned
CANDIDATE_BUDGET = 10 ** 6

_MIN_BATCH = 256


@utils.require_nonnegative('lam')
def sample_count(lam, domain, seed):
    """Poisson disk count with mean lam * A_D."""
    rng = utils.substream(seed, 'count')
    return int(rng.poisson(lam * domain.area))


def place_points(omega, domain, n, seed, budget=CANDIDATE_BUDGET):
    """Accept uniform candidates on ``domain`` with probability omega until n are kept.

    :param omega: callable mapping an (m x 2) array of points to acceptance
      probabilities, eg a :class:`gp.RelativeIntensity`.
    :param budget: proposals allowed per requested point.

    Candidates are drawn in fixed-size batches from one seeded stream and
    accepted in draw order, so the result depends only on the seed.
    Raise GenerationError when ``budget * n`` proposals do not yield n points.
    """
    if n < 0:
        raise ParameterError("point count must be non-negative; received %r" % n)
    if n == 0:
        return np.zeros((0, 2))

    rng = utils.substream(seed, 'candidates')
    batch = max(_MIN_BATCH, 2 * n)
    max_proposals = budget * n
    lows = np.array([domain.x_min, domain.y_min])
    span = np.array([domain.width, domain.height])

    accepted = []
    n_accepted = 0
    proposals = 0
    while n_accepted < n:
        if proposals >= max_proposals:
            raise GenerationError("placed %d of %d points" % (n_accepted, n),
                                  n_accepted / max(proposals, 1), proposals)

        size = min(batch, max_proposals - proposals)
        candidates = lows + rng.random((size, 2)) * span
        u = rng.random(size)
        keep = candidates[u < omega(candidates)]
        proposals += size

        accepted.append(keep[:n - n_accepted])
        n_accepted += len(accepted[-1])

    points = np.concatenate(accepted)
    log.debug("placed %d points from %d proposals", n, proposals)
    return points


@utils.require_positive('mu', 'sigma')
def sample_radii(mu, sigma, n, seed):
    """n i.i.d. draws from the normal N(mu, sigma^2) truncated below at zero."""
    rng = utils.substream(seed, 'radii')
    if n == 0:
        return np.zeros(0)

    radii = truncnorm.rvs(-mu / sigma, np.inf, loc=mu, scale=sigma, size=n, random_state=rng)
    # truncnorm can round to exactly zero far in the lower tail
    return np.maximum(radii, np.finfo(float).tiny)


def generate_realization(theta, domain, covariates=None, seed=0, cov=None):
    """Draw one DiskSet for ``theta`` on ``domain``.

    Composes sample_field, transform_intensity, sample_count, place_points and
    sample_radii, each on its own substream of ``seed``.

    :param covariates: optional CovariateStack on the domain grid.
    :param cov: a precomputed CovMatrix for ``theta.rho``; by default a small
      cache of recent factorizations is used.
    """
    theta = Theta(*theta).validate()

    n = sample_count(theta.lam, domain, seed)
    if n == 0:
        return DiskSet(domain, seed=seed, theta=theta)

    if cov is None:
        cov = gp.cached_covariance(domain, theta.rho)
    field = gp.sample_field(cov, seed)
    omega = gp.RelativeIntensity(field, cov, covariates)
    log.debug("placing %d points, mean grid omega %.3g", n, omega.field.omega.mean())

    centers = place_points(omega, domain, n, seed)
    radii = sample_radii(theta.mu, theta.sigma, n, seed)

    return DiskSet(domain, centers, radii, seed=seed, theta=theta)


def generate_many(theta, domain, count, seed, covariates=None, session=None, cov=None):
    """``count`` independent realizations; realization i uses substream ('realization', i).

    :param cov: shared CovMatrix for ``theta.rho``, see :func:`generate_realization`.
    """
    seeds = [utils.child_seed(seed, 'realization', i) for i in range(count)]

    def one(s):
        return generate_realization(theta, domain, covariates, s, cov)

    if session is None:
        return [one(s) for s in seeds]
    return session.map(one, seeds)


def sample_prior(priors, domain, count, seed, covariates=None, session=None):
    """Prior-predictive layouts: a list of (Theta, DiskSet).

    Each layout draws its own theta from ``priors``. Draws that cannot be
    realized (eg an acceptance stall) are logged and drawn again.
    """
    from fuelgen.core.priors import sample_theta

    def one(i):
        attempt = 0
        while True:
            s = utils.child_seed(seed, 'prior', i, attempt)
            theta = sample_theta(priors, utils.substream(s, 'theta'))
            try:
                return theta, generate_realization(theta, domain, covariates, s)
            except GenerationError as e:
                log.info("prior draw %r could not be realized (%s); redrawing", theta, e)
                attempt += 1

    if session is None:
        return [one(i) for i in range(count)]
    return session.map(one, range(count))


def rasterize(disks, pixel_size, viewport=None):
    """Return the BinaryRaster of the union of disks.

    A pixel is occupied iff its center lies within some disk.

    :param viewport: optional (x_min, y_min, x_max, y_max) to rasterize
      instead of the full domain.
    """
    domain = disks.domain
    x0, y0, x1, y1 = domain.extent if viewport is None else viewport

    if not pixel_size > 0:
        raise ParameterError("pixel size must be positive; received %r" % pixel_size)
    if pixel_size > (x1 - x0) or pixel_size > (y1 - y0):
        raise ParameterError("pixel size %g is larger than the raster extent" % pixel_size)

    ncols = int(round((x1 - x0) / pixel_size))
    nrows = int(round((y1 - y0) / pixel_size))
    xs = x0 + (np.arange(ncols) + 0.5) * pixel_size
    ys = y0 + (np.arange(nrows) + 0.5) * pixel_size

    bits = np.zeros((nrows, ncols), dtype=bool)
    for (cx, cy), r in zip(disks.centers, disks.radii):
        c_lo = np.searchsorted(xs, cx - r, side='left')
        c_hi = np.searchsorted(xs, cx + r, side='right')
        r_lo = np.searchsorted(ys, cy - r, side='left')
        r_hi = np.searchsorted(ys, cy + r, side='right')
        if c_lo >= c_hi or r_lo >= r_hi:
            continue

        dx = xs[c_lo:c_hi] - cx
        dy = ys[r_lo:r_hi] - cy
        bits[r_lo:r_hi, c_lo:c_hi] |= (dy[:, None] ** 2 + dx[None, :] ** 2) <= r * r

    return BinaryRaster(domain, pixel_size, bits, origin=(x0, y0))
