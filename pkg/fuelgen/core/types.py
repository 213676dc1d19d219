"""Value types shared by the model, metric and calibration code.

Everything here is immutable once built: namedtuples over read-only numpy
arrays, so realizations can be handed to worker threads freely.
"""

from collections import namedtuple
import math

import numpy as np

from fuelgen.exceptions import ParameterError, ValidationException


def _frozen(arr, dtype=float):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


class Domain(namedtuple('Domain', 'x_min y_min x_max y_max d')):
    """A rectangular domain in meters, referenced on a ``d`` x ``d`` GP grid.

    Grid nodes sit at cell centers, row-major with x varying fastest.
    """
    __slots__ = ()

    def __new__(cls, x_min=0.0, y_min=0.0, x_max=15.0, y_max=15.0, d=32):
        x_min, y_min, x_max, y_max = (float(v) for v in (x_min, y_min, x_max, y_max))
        if not (x_max > x_min and y_max > y_min):
            raise ParameterError("domain must have x_max > x_min and y_max > y_min; got %r"
                                 % ((x_min, y_min, x_max, y_max),))
        if int(d) != d or d < 2:
            raise ParameterError("grid resolution d must be an integer >= 2; got %r" % d)

        return super().__new__(cls, x_min, y_min, x_max, y_max, int(d))

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def area(self):
        return self.width * self.height

    @property
    def extent(self):
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def with_resolution(self, d):
        return Domain(self.x_min, self.y_min, self.x_max, self.y_max, d)

    def axes(self):
        """Return (xs, ys): node coordinates along each axis."""
        xs = self.x_min + (np.arange(self.d) + 0.5) * self.width / self.d
        ys = self.y_min + (np.arange(self.d) + 0.5) * self.height / self.d
        return xs, ys

    def nodes(self):
        """Return the d*d x 2 array of grid node coordinates."""
        xs, ys = self.axes()
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def contains(self, points):
        """Boolean mask of the points (n x 2) inside the closed domain."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return ((points[:, 0] >= self.x_min) & (points[:, 0] <= self.x_max) &
                (points[:, 1] >= self.y_min) & (points[:, 1] <= self.y_max))


class Theta(namedtuple('Theta', 'rho lam mu sigma')):
    """The four calibrated parameters.

    ``rho`` GP lengthscale (m), ``lam`` points per square meter,
    ``mu`` and ``sigma`` the radius mean and sd (m).
    """
    __slots__ = ()

    names = ('rho', 'lambda', 'mu', 'sigma')

    def __new__(cls, rho, lam, mu, sigma):
        vals = tuple(float(v) for v in (rho, lam, mu, sigma))
        return super().__new__(cls, *vals)

    def validate(self, allow_zero_lambda=True):
        for name, val in zip(self.names, self):
            if not math.isfinite(val):
                raise ParameterError("%s must be finite; received %r" % (name, val))
        if self.rho <= 0 or self.mu <= 0 or self.sigma <= 0:
            raise ParameterError("rho, mu and sigma must be positive; received %r" % (self,))
        if self.lam < 0 or (self.lam == 0 and not allow_zero_lambda):
            raise ParameterError("lambda must be non-negative; received %r" % self.lam)
        return self

    def as_array(self):
        return np.array(self, dtype=float)


class DiskSet(namedtuple('DiskSet', 'domain centers radii seed theta')):
    """A germ-grain realization: disk centers (n x 2) and radii (n,).

    ``theta`` is the generating parameter set, or None for observed data.
    """
    __slots__ = ()

    def __new__(cls, domain, centers=(), radii=(), seed=None, theta=None):
        centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        radii = np.asarray(radii, dtype=float).reshape(-1)
        if len(centers) != len(radii):
            raise ValueError("got %d centers but %d radii" % (len(centers), len(radii)))
        if np.any(radii <= 0):
            raise ParameterError("disk radii must be positive")
        return super().__new__(cls, domain, _frozen(centers), _frozen(radii), seed, theta)

    @property
    def n(self):
        return len(self.radii)

    def __len__(self):
        return self.n

    def disks(self):
        """Iterate (x, y, r) triples."""
        for (x, y), r in zip(self.centers, self.radii):
            yield (float(x), float(y), float(r))

    def __repr__(self):
        return "DiskSet(n=%d, domain=%r, seed=%r, theta=%r)" % (
            self.n, tuple(self.domain.extent), self.seed, self.theta)

    def __eq__(self, other):
        return (isinstance(other, DiskSet) and self.domain == other.domain and
                np.array_equal(self.centers, other.centers) and
                np.array_equal(self.radii, other.radii))

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class BinaryRaster(namedtuple('BinaryRaster', 'domain pixel_size bits origin')):
    """Occupancy bits, ``bits[row, col]`` with row 0 along the lowest y.

    ``origin`` is the (x, y) of the lower-left raster corner; it differs
    from the domain corner only for clipped viewports.
    """
    __slots__ = ()

    def __new__(cls, domain, pixel_size, bits, origin=None):
        if not pixel_size > 0:
            raise ParameterError("pixel size must be positive; received %r" % pixel_size)
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("raster bits must be 2-d")
        if origin is None:
            origin = (domain.x_min, domain.y_min)
        return super().__new__(cls, domain, float(pixel_size), _frozen(bits, dtype=bool),
                               (float(origin[0]), float(origin[1])))

    @property
    def shape(self):
        return self.bits.shape

    def __eq__(self, other):
        return (isinstance(other, BinaryRaster) and self.domain == other.domain and
                self.pixel_size == other.pixel_size and self.origin == other.origin and
                np.array_equal(self.bits, other.bits))

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class CovMatrix(namedtuple('CovMatrix', 'domain rho jitter matrix chol')):
    """Grid covariance for a lengthscale, with its lower Cholesky factor."""
    __slots__ = ()

    @property
    def size(self):
        return self.matrix.shape[0]

    __hash__ = None


class IntensityField(namedtuple('IntensityField', 'domain W omega rho seed')):
    """A gridded GP draw ``W`` and, once transformed, the relative intensity ``omega``."""
    __slots__ = ()

    def with_omega(self, omega):
        return self._replace(omega=_frozen(omega))

    __hash__ = None


class CovariateStack(namedtuple('CovariateStack', 'fields beta names')):
    """K covariate grids (K x d*d, values in [-1, 1]) and weights (beta_0, ..., beta_K).

    ``beta[0]`` multiplies the GP field.
    """
    __slots__ = ()

    def __new__(cls, fields=(), beta=(1.0,), names=None):
        fields = np.asarray(fields, dtype=float)
        if fields.size == 0:
            fields = np.zeros((0, 0))
        elif fields.ndim == 1:
            fields = fields.reshape(1, -1)
        beta = tuple(float(b) for b in beta)

        if len(beta) != len(fields) + 1:
            raise ValidationException("need %d weights for %d covariates, got %d"
                                      % (len(fields) + 1, len(fields), len(beta)), key='beta')
        if any(b < 0 or not math.isfinite(b) for b in beta):
            raise ParameterError("covariate weights must be finite and non-negative; got %r"
                                 % (beta,))
        if fields.size and (not np.all(np.isfinite(fields)) or
                            fields.min() < -1 or fields.max() > 1):
            raise ValidationException("covariate values must lie in [-1, 1]", key='covariates')
        if names is None:
            names = tuple('X%d' % (i + 1) for i in range(len(fields)))

        return super().__new__(cls, _frozen(fields), beta, tuple(names))

    @property
    def k(self):
        return len(self.fields)

    __hash__ = None


# fixed order of the metric vector
METRIC_NAMES = (
    'area', 'perimeter', 'ncc', 'holes',
    'moran_i', 'geary_c', 'subarea_sum', 'n_full_cells', 'n_empty_cells', 'subarea_variance',
    'lambda_hat', 'mu_hat', 'sigma_hat',
)

# entries that only exist for disk-based layouts
DISK_ONLY_METRICS = ('lambda_hat', 'mu_hat', 'sigma_hat')


class MetricsVector(namedtuple('MetricsVector', 'values flags')):
    """The k=13 summary vector in :data:`METRIC_NAMES` order.

    ``flags`` holds the names of entries that were undefined (and imputed
    as 0) or absent for the input type.
    """
    __slots__ = ()

    def __new__(cls, values, flags=()):
        values = _frozen(values)
        if values.shape != (len(METRIC_NAMES),):
            raise ValueError("a metrics vector has %d entries, got shape %s"
                             % (len(METRIC_NAMES), values.shape))
        unknown = set(flags) - set(METRIC_NAMES)
        if unknown:
            raise ValueError("unknown metric flags: %s" % sorted(unknown))
        return super().__new__(cls, values, frozenset(flags))

    def __getitem__(self, key):
        if isinstance(key, str):
            return float(self.values[METRIC_NAMES.index(key)])
        return super().__getitem__(key)

    def as_dict(self):
        return dict(zip(METRIC_NAMES, (float(v) for v in self.values)))

    def select(self, names):
        """Return (values, flag mask) restricted to ``names``."""
        idx = [METRIC_NAMES.index(n) for n in names]
        return (self.values[idx], np.array([n in self.flags for n in names], dtype=bool))

    def __eq__(self, other):
        return (isinstance(other, MetricsVector) and self.flags == other.flags and
                np.array_equal(self.values, other.values))

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class GridSpec(namedtuple('GridSpec', 'cell_size adjacency weights')):
    """Sub-domain grid for the local-area metrics.

    ``adjacency`` is 'rook' (Von Neumann) or 'queen' (Moore); ``weights`` is
    'binary' or 'row' (row-standardized).
    """
    __slots__ = ()

    def __new__(cls, cell_size=1.0, adjacency='rook', weights='binary'):
        if not cell_size > 0:
            raise ParameterError("cell size must be positive; received %r" % cell_size)
        if adjacency not in ('rook', 'queen'):
            raise ValidationException("adjacency must be 'rook' or 'queen'", key='adjacency')
        if weights not in ('binary', 'row'):
            raise ValidationException("weights must be 'binary' or 'row'", key='weights')
        return super().__new__(cls, float(cell_size), adjacency, weights)

    def cells(self, domain):
        """Return (ncols, nrows) of the cell grid on ``domain``."""
        nx = int(math.floor(domain.width / self.cell_size + 1e-9))
        ny = int(math.floor(domain.height / self.cell_size + 1e-9))
        if nx < 1 or ny < 1:
            raise ParameterError("cell size %g is larger than the domain" % self.cell_size)
        return nx, ny


class MetricsConfig(namedtuple('MetricsConfig',
                               'mc_samples points_per_disk samples_per_cell hole_pixel')):
    """Monte Carlo and resolution settings used by :func:`metrics_vector`."""
    __slots__ = ()

    def __new__(cls, mc_samples=20000, points_per_disk=256, samples_per_cell=50,
                hole_pixel=0.05):
        return super().__new__(cls, int(mc_samples), int(points_per_disk),
                               int(samples_per_cell), float(hole_pixel))


class MixtureComponent(namedtuple('MixtureComponent', 'x y sd weight')):
    """An isotropic 2-d Gaussian mixture component."""
    __slots__ = ()
