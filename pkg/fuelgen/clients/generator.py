from fuelgen.clients.shared import _Base
from fuelgen.core import generator, gp, metrics
from fuelgen.core.types import BinaryRaster, Theta
from fuelgen.protocol.svg import SvgFigure
from fuelgen.utils import utils


class Generator(_Base):
    """Draws disk layouts and computes their pattern metrics.

    The domain, covariates, grid and metric settings come from the
    client's :class:`fuelgen.protocol.config.RunConfig`.
    """

    def __init__(self, debug_logging=True, config=None, workers=None):
        super().__init__(self.__class__.__name__, debug_logging, config, workers)

    def generate(self, theta=None, count=1, seed=None):
        """Returns a list of ``count`` independent DiskSets.

        :param theta: a :class:`fuelgen.core.types.Theta`
          or (rho, lambda, mu, sigma); defaults to the config's ``theta.*``.
        :param seed: see :func:`resolve_seed`.

        Layout i depends only on ``seed`` and i.
        """
        theta = self.config.theta() if theta is None else Theta(*theta).validate()
        seed, _ = self.resolve_seed(seed)
        domain = self.domain(theta)

        self.logger.info("generating %d layout(s) at %r on %r", count, theta, domain.extent)
        cov = gp.cached_covariance(domain, theta.rho, self.config['gp.jitter'])
        return generator.generate_many(theta, domain, count, seed,
                                       self.covariates(domain), self.session, cov)

    def from_prior(self, count=1, seed=None):
        """Returns a list of (Theta, DiskSet), each Theta drawn from the configured priors."""
        seed, _ = self.resolve_seed(seed)
        domain = self.domain()
        priors = self.config.priors(domain)

        self.logger.info("drawing %d prior-predictive layout(s) under %r", count, priors)
        return generator.sample_prior(priors, domain, count, seed,
                                      self.covariates(domain), self.session)

    def rasterize(self, disks, pixel_size=None):
        """Returns the BinaryRaster of ``disks`` at ``pixel_size`` (default ``raster.pixel``)."""
        if pixel_size is None:
            pixel_size = self.config['raster.pixel']
        return generator.rasterize(disks, pixel_size)

    def metrics(self, layout, seed=0):
        """Returns the MetricsVector of a DiskSet or BinaryRaster.

        Raster inputs have the disk-only entries flagged absent.
        """
        spec = self.config.grid_spec()
        if isinstance(layout, BinaryRaster):
            return metrics.metrics_from_raster(layout, spec)

        vec = metrics.metrics_vector(layout, spec, self.config.metrics_config(), seed)
        self.logger.debug("metrics of %d disks: %s", layout.n, utils.truncate(vec.values, 13))
        return vec

    def render(self, disks, title=None):
        """Returns SVG text of ``disks``, over the covariate heat map when covariates are set."""
        covariates = self.covariates(disks.domain)
        underlay = None
        if covariates is not None:
            d = disks.domain.d
            eta = sum(b * f for b, f in zip(covariates.beta[1:], covariates.fields))
            underlay = eta.reshape(d, d) / max(1.0, sum(abs(b) for b in covariates.beta[1:]))

        return SvgFigure.format(disks, underlay=underlay, title=title)
