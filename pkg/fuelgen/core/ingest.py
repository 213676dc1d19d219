"""Reduce a mid-story point cloud to an observed DiskSet.

Points are clipped to a height band and to the domain, projected to the
ground plane, and fit with a mixture of isotropic Gaussians. Each surviving
component becomes a disk of radius two standard deviations.
"""

from collections import namedtuple
import math
import warnings

import numpy as np
from scipy.special import logsumexp

from fuelgen.core.types import DiskSet, Domain, MixtureComponent
from fuelgen.exceptions import FuelgenWarning, InputError, ParameterError
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

DEFAULT_Z = (0.1, 3.0)
DEFAULT_SD_BOUNDS = (0.1, 1.5)

EMResult = namedtuple('EMResult', 'means sds weights loglik trace converged')


def load_pointcloud(path):
    """Read an ``x y z`` text file into an (n x 3) array."""
    from fuelgen.protocol.pointcloud import PointCloudFile

    return PointCloudFile.load(path).points


def clip_midstory(cloud, z_min=DEFAULT_Z[0], z_max=DEFAULT_Z[1], domain=None):
    """(x, y) of the points with z in [z_min, z_max] inside ``domain``."""
    if not z_min < z_max:
        raise ParameterError("need z_min < z_max; received (%r, %r)" % (z_min, z_max))
    if domain is None:
        domain = Domain()

    cloud = np.asarray(cloud, dtype=float).reshape(-1, 3)
    z = cloud[:, 2]
    keep = (z >= z_min) & (z <= z_max) & domain.contains(cloud[:, :2])
    return cloud[keep, :2]


def _log_densities(points, means, sds, weights):
    """n x k log(w_k N(x | m_k, sd_k^2 I))"""
    sq = ((points[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    var = sds ** 2
    with np.errstate(divide='ignore'):
        log_w = np.log(weights)
    return log_w - np.log(2 * np.pi * var) - sq / (2 * var)


def em(points, means, sds, weights, sd_bounds=DEFAULT_SD_BOUNDS, max_iter=200, tol=1e-6):
    """Isotropic-Gaussian EM from the given starting state.

    Standard deviations are clamped to ``sd_bounds`` in every M-step. The
    returned ``trace`` holds the observed-data log-likelihood before each
    M-step; it is non-decreasing.
    """
    points = np.asarray(points, dtype=float)
    means = np.array(means, dtype=float)
    sds = np.clip(np.array(sds, dtype=float), *sd_bounds)
    weights = np.array(weights, dtype=float)
    tiny = np.finfo(float).tiny

    trace = []
    converged = False
    for _ in range(max_iter):
        logp = _log_densities(points, means, sds, weights)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        trace.append(ll)

        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= tol * max(1.0, abs(ll)):
            converged = True
            break

        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0)
        alive = nk > tiny

        weights = nk / len(points)
        safe = np.where(alive, nk, 1.0)
        new_means = resp.T @ points / safe[:, None]
        means = np.where(alive[:, None], new_means, means)

        sq = ((points[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        var = (resp * sq).sum(axis=0) / (2 * safe)
        sds = np.where(alive, np.clip(np.sqrt(var), *sd_bounds), sds)

    return EMResult(means, sds, weights, trace[-1], trace, converged)


def kmeans_pp(points, k, rng):
    """k-means++ seeding: k distinct starting centers drawn from ``points``."""
    centers = [points[rng.integers(len(points))]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(points))
        else:
            idx = rng.choice(len(points), p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _bic(result, n):
    k = len(result.weights)
    return -2 * result.loglik + (4 * k - 1) * math.log(n)


def _merge_closest(result, sd_bounds):
    """Moment-matched merge of the pair with the smallest separation."""
    m, s, w = result.means, result.sds, result.weights
    sq = ((m[:, None, :] - m[None, :, :]) ** 2).sum(axis=2)
    sep = sq / (s[:, None] ** 2 + s[None, :] ** 2)
    sep[np.diag_indices_from(sep)] = np.inf
    i, j = np.unravel_index(np.argmin(sep), sep.shape)

    wt = w[i] + w[j]
    if wt <= 0:
        mean = 0.5 * (m[i] + m[j])
        var = 0.5 * (s[i] ** 2 + s[j] ** 2)
    else:
        mean = (w[i] * m[i] + w[j] * m[j]) / wt
        # per-axis variance of the pair, isotropic so half the squared offset
        var = (w[i] * (s[i] ** 2 + 0.5 * np.sum((m[i] - mean) ** 2)) +
               w[j] * (s[j] ** 2 + 0.5 * np.sum((m[j] - mean) ** 2))) / wt

    keep = [c for c in range(len(w)) if c not in (i, j)]
    means = np.vstack([m[keep], mean])
    sds = np.append(s[keep], np.clip(math.sqrt(var), *sd_bounds))
    weights = np.append(w[keep], wt)
    return means, sds, weights


def fit_gmm(points, max_components=100, sd_bounds=DEFAULT_SD_BOUNDS, weight_floor=None,
            seed=0, restarts=5, max_iter=200, tol=1e-6):
    """Fit a sparse mixture of isotropic Gaussians to 2-d points.

    EM with ``max_components`` components is run from ``restarts``
    k-means++ starts and the best fit is kept. Components are then merged
    pairwise, closest first, while the BIC improves. Finally components with
    weight below ``weight_floor`` (default 1 / (2 max_components)) are
    pruned; the remaining weights are not renormalized.

    Raise InputError with fewer than 2 * max_components points.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if max_components < 1:
        raise ParameterError("max_components must be at least 1")
    if n < 2 * max_components:
        raise InputError("too few points: %d, need at least %d for %d components"
                         % (n, 2 * max_components, max_components))
    lo, hi = sd_bounds
    if not 0 < lo <= hi:
        raise ParameterError("sd bounds must satisfy 0 < min <= max; received %r" % (sd_bounds,))
    if weight_floor is None:
        weight_floor = 1.0 / (2 * max_components)

    k = max_components
    sd0 = float(np.clip(points.std(axis=0).mean() / math.sqrt(k), lo, hi))

    best = None
    for r in range(max(1, restarts)):
        rng = utils.substream(seed, 'restart', r)
        start = kmeans_pp(points, k, rng)
        result = em(points, start, np.full(k, sd0), np.full(k, 1.0 / k), sd_bounds, max_iter, tol)
        log.debug("restart %d: loglik %.4f after %d iterations", r, result.loglik, len(result.trace))
        if best is None or result.loglik > best.loglik:
            best = result

    bic = _bic(best, n)
    while len(best.weights) > 1:
        merged = em(points, *_merge_closest(best, sd_bounds), sd_bounds=sd_bounds,
                    max_iter=max_iter, tol=tol)
        merged_bic = _bic(merged, n)
        if merged_bic >= bic:
            break
        best, bic = merged, merged_bic

    if not best.converged:
        msg = "mixture fit did not converge in %d iterations; using the last iterate" % max_iter
        log.warning(msg)
        warnings.warn(msg, FuelgenWarning)

    components = [MixtureComponent(float(mx), float(my), float(sd), float(wt))
                  for (mx, my), sd, wt in zip(best.means, best.sds, best.weights)
                  if wt >= weight_floor]
    components.sort(key=lambda c: (c.x, c.y))
    log.info("fit %d mixture components to %d points (%d pruned below weight %.4g)",
             len(components), n, len(best.weights) - len(components), weight_floor)
    return components


def components_to_disks(components, domain):
    """Return (DiskSet, dropped): one disk of radius 2 sd per component inside ``domain``."""
    kept = [c for c in components if domain.contains([c.x, c.y])[0]]
    dropped = len(components) - len(kept)
    if dropped:
        log.info("dropped %d component(s) centered outside the domain", dropped)

    centers = [(c.x, c.y) for c in kept]
    radii = [2.0 * c.sd for c in kept]
    return DiskSet(domain, centers, radii), dropped
