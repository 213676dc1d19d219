"""Summary metrics of binary fuel mosaics.

A layout, given either as disks or as a raster, is reduced to a fixed
13-entry vector (see :data:`fuelgen.core.types.METRIC_NAMES`): coverage,
perimeter, connectivity and holes, sub-domain grid statistics including
Moran's I and Geary's C, and empirical estimates of the disk parameters.
"""

import math
import warnings

import esda
import libpysal
import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from fuelgen.core.generator import rasterize
from fuelgen.core.types import (
    DISK_ONLY_METRICS, METRIC_NAMES, GridSpec, MetricsConfig, MetricsVector,
)
from fuelgen.exceptions import FuelgenWarning, InputError, ParameterError
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

MIN_AREA_SAMPLES = 1000
MIN_POINTS_PER_DISK = 64

_EIGHT = np.ones((3, 3), dtype=bool)


def covered(disks, points):
    """Boolean mask of ``points`` (m x 2) lying in the union of the disks."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    mask = np.zeros(len(points), dtype=bool)
    if disks.n == 0 or len(points) == 0:
        return mask

    tree = cKDTree(points)
    for idx in tree.query_ball_point(disks.centers, disks.radii):
        mask[idx] = True
    return mask


def _uniform_points(domain, n, rng):
    lows = np.array([domain.x_min, domain.y_min])
    return lows + rng.random((n, 2)) * np.array([domain.width, domain.height])


def disk_area_mc(disks, n_samples=20000, seed=0):
    """Monte Carlo estimate of the fraction of the domain covered by the disks."""
    if n_samples < MIN_AREA_SAMPLES:
        raise ParameterError("need at least %d area samples; received %r"
                             % (MIN_AREA_SAMPLES, n_samples))
    if disks.n == 0:
        return 0.0

    rng = utils.substream(seed, 'area')
    points = _uniform_points(disks.domain, n_samples, rng)
    return float(np.mean(covered(disks, points)))


def disk_perimeter(disks, points_per_disk=256):
    """Perimeter of the disk union in meters.

    ``points_per_disk`` evenly spaced points are put on each circle; a point
    is discarded when it lies strictly inside another disk or outside the
    domain. The result is (retained / total) * sum(2 pi r).
    """
    if points_per_disk < MIN_POINTS_PER_DISK:
        raise ParameterError("need at least %d points per disk; received %r"
                             % (MIN_POINTS_PER_DISK, points_per_disk))
    if disks.n == 0:
        return 0.0

    angles = 2 * np.pi * np.arange(points_per_disk) / points_per_disk
    ring = np.column_stack([np.cos(angles), np.sin(angles)])
    centers, radii = disks.centers, disks.radii

    pts = (centers[:, None, :] + radii[:, None, None] * ring[None, :, :]).reshape(-1, 2)
    owner = np.repeat(np.arange(disks.n), points_per_disk)
    keep = disks.domain.contains(pts)

    # every (ring point, disk center) pair closer than the largest radius
    pairs = cKDTree(pts).sparse_distance_matrix(cKDTree(centers), radii.max(),
                                                output_type='ndarray')
    covering = (pairs['j'] != owner[pairs['i']]) & (pairs['v'] < radii[pairs['j']])
    keep[pairs['i'][covering]] = False

    total = points_per_disk * disks.n
    return float(np.count_nonzero(keep) / total * np.sum(2 * np.pi * radii))


def disk_ncc(disks):
    """Connected components of the graph joining disks with |s_i - s_j| <= r_i + r_j."""
    if disks.n == 0:
        return 0

    centers, radii = disks.centers, disks.radii
    pairs = cKDTree(centers).query_pairs(2 * radii.max(), output_type='ndarray')
    i, j = pairs[:, 0], pairs[:, 1]
    touching = np.hypot(*(centers[i] - centers[j]).T) <= radii[i] + radii[j]

    graph = sparse.coo_matrix((np.ones(np.count_nonzero(touching)),
                               (i[touching], j[touching])), shape=(disks.n, disks.n))
    count, _ = csgraph.connected_components(graph, directed=False)
    return int(count)


def _raster_holes(bits):
    labels, count = ndimage.label(~bits)
    if count == 0:
        return 0
    border = np.unique(np.concatenate([labels[0, :], labels[-1, :],
                                       labels[:, 0], labels[:, -1]]))
    return count - np.count_nonzero(border)


def raster_metrics(raster):
    """Return {area, perimeter, ncc, holes} for a BinaryRaster.

    Perimeter counts occupied pixels with an edge-adjacent empty neighbor,
    plus sqrt(2) for each occupied pixel whose only empty neighbors are
    diagonal, scaled by the pixel size. The raster edge is not an exposure.
    Occupied pixels are 8-connected, empty ones 4-connected.
    """
    bits = raster.bits
    if bits.size == 0:
        raise InputError("raster has no pixels")

    padded = np.pad(bits, 1, mode='edge')
    empty = ~padded
    edge_exposed = (empty[:-2, 1:-1] | empty[2:, 1:-1] |
                    empty[1:-1, :-2] | empty[1:-1, 2:])
    diag_exposed = (empty[:-2, :-2] | empty[:-2, 2:] |
                    empty[2:, :-2] | empty[2:, 2:])

    n_edge = np.count_nonzero(bits & edge_exposed)
    n_diag = np.count_nonzero(bits & diag_exposed & ~edge_exposed)

    _, ncc = ndimage.label(bits, structure=_EIGHT)

    return {
        'area': float(bits.mean()),
        'perimeter': float(raster.pixel_size * (n_edge + math.sqrt(2) * n_diag)),
        'ncc': int(ncc),
        'holes': int(_raster_holes(bits)),
    }


def disk_holes(disks, pixel_size=0.05):
    """Holes in the disk union, counted on a raster at ``pixel_size``.

    Warns with FuelgenWarning when the pixel is coarser than a quarter of
    the smallest radius.
    """
    if disks.n == 0:
        return 0

    if pixel_size > disks.radii.min() / 4:
        log.debug("hole pixel %g exceeds a quarter of the smallest radius %g",
                  pixel_size, disks.radii.min())
        warnings.warn("hole pixel exceeds a quarter of the smallest radius; small holes may be"
                      " missed", FuelgenWarning)

    return int(_raster_holes(rasterize(disks, pixel_size).bits))


def _cell_grid(domain, spec):
    nx, ny = spec.cells(domain)
    return nx, ny, spec.cell_size


def autocorrelation(values, spec=GridSpec()):
    """Moran's I and Geary's C of a (rows x cols) grid of cell values.

    Returns (moran_i, geary_c), both None when the statistics are undefined:
    fewer than two cells or zero variance.
    """
    values = np.asarray(values, dtype=float)
    nrows, ncols = values.shape
    y = values.ravel()

    if y.size < 2 or np.ptp(y) == 0:
        return None, None

    w = libpysal.weights.lat2W(nrows, ncols, rook=(spec.adjacency == 'rook'))
    transformation = 'b' if spec.weights == 'binary' else 'r'

    with warnings.catch_warnings():
        # libpysal and esda warn about disconnected weights and small samples
        warnings.simplefilter('ignore')
        moran = esda.Moran(y, w, transformation=transformation, permutations=0)
        geary = esda.Geary(y, w, transformation=transformation, permutations=0)

    return float(moran.I), float(geary.C)


def _grid_summary(p, spec, full_threshold):
    moran_i, geary_c = autocorrelation(p, spec)
    flat = p.ravel()

    return {
        'moran_i': moran_i,
        'geary_c': geary_c,
        'subarea_sum': float(flat.mean()),
        'n_full_cells': int(np.count_nonzero(flat >= full_threshold)),
        'n_empty_cells': int(np.count_nonzero(flat == 0)),
        'subarea_variance': float(flat.var(ddof=1)) if flat.size > 1 else 0.0,
    }


def grid_metrics(disks, spec=GridSpec(), samples_per_cell=50, seed=0):
    """Local-area statistics over the sub-domain grid.

    Each cell's covered proportion is estimated from ``samples_per_cell``
    uniform points. Undefined autocorrelation entries are None.
    """
    domain = disks.domain
    nx, ny, cs = _cell_grid(domain, spec)

    if disks.n == 0:
        p = np.zeros((ny, nx))
    else:
        rng = utils.substream(seed, 'grid')
        offsets = rng.random((ny, nx, samples_per_cell, 2)) * cs
        col, row = np.meshgrid(np.arange(nx), np.arange(ny))
        corners = np.stack([domain.x_min + col * cs, domain.y_min + row * cs], axis=-1)
        points = (corners[:, :, None, :] + offsets).reshape(-1, 2)
        p = covered(disks, points).reshape(ny, nx, samples_per_cell).mean(axis=2)

    return _grid_summary(p, spec, 1 - 1.0 / samples_per_cell)


def empirical_estimates(disks):
    """lambda_hat = n / A_D, mu_hat and sigma_hat the mean and sd of the radii.

    mu_hat is None for an empty set and sigma_hat is None for fewer than two disks.
    """
    n = disks.n
    radii = disks.radii
    return {
        'lambda_hat': n / disks.domain.area,
        'mu_hat': float(radii.mean()) if n > 0 else None,
        'sigma_hat': float(radii.std(ddof=1)) if n > 1 else None,
    }


def _assemble(parts, absent=()):
    values = []
    flags = set(absent)
    for name in METRIC_NAMES:
        val = parts.get(name)
        if val is None:
            flags.add(name)
            val = 0.0
        values.append(float(val))
    return MetricsVector(values, flags)


def metrics_vector(disks, spec=GridSpec(), config=MetricsConfig(), seed=0):
    """The full MetricsVector of a DiskSet.

    Undefined entries (autocorrelation of a constant grid, mu_hat/sigma_hat
    of too few disks) are set to 0 and flagged.
    """
    parts = {
        'area': disk_area_mc(disks, config.mc_samples, seed),
        'perimeter': disk_perimeter(disks, config.points_per_disk),
        'ncc': disk_ncc(disks),
        'holes': disk_holes(disks, config.hole_pixel),
    }
    parts.update(grid_metrics(disks, spec, config.samples_per_cell, seed))
    parts.update(empirical_estimates(disks))

    vec = _assemble(parts)
    log.debug("metrics for %d disks: %s", disks.n, utils.truncate(vec.values, 13))
    return vec


def metrics_from_raster(raster, spec=GridSpec()):
    """MetricsVector of a BinaryRaster.

    Grid cells take the fraction of their occupied pixels. The disk-only
    entries are flagged absent.
    """
    parts = raster_metrics(raster)

    domain = raster.domain
    nx, ny, cs = _cell_grid(domain, spec)
    nrows, ncols = raster.shape
    xs = raster.origin[0] + (np.arange(ncols) + 0.5) * raster.pixel_size
    ys = raster.origin[1] + (np.arange(nrows) + 0.5) * raster.pixel_size
    col = np.floor((xs - domain.x_min) / cs).astype(int)
    row = np.floor((ys - domain.y_min) / cs).astype(int)

    in_grid = (row[:, None] >= 0) & (row[:, None] < ny) & (col[None, :] >= 0) & (col[None, :] < nx)
    cell = (row[:, None] * nx + col[None, :])[in_grid]
    occupied = np.bincount(cell, weights=raster.bits[in_grid], minlength=nx * ny)
    count = np.bincount(cell, minlength=nx * ny)
    if np.any(count == 0):
        raise InputError("raster pixels are coarser than the %g m metric cells" % cs)

    p = (occupied / count).reshape(ny, nx)
    parts.update(_grid_summary(p, spec, 1.0))

    return _assemble(parts, absent=DISK_ONLY_METRICS)
