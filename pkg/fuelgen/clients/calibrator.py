from fuelgen.clients.shared import _Base
from fuelgen.core import calibration, metrics
from fuelgen.core.types import BinaryRaster
from fuelgen.exceptions import InputError
from fuelgen.protocol.chain import CovarianceFile
from fuelgen.utils import utils


class Calibrator(_Base):
    """Calibrates the layout model against observed layouts.

    A typical session::

        cal = Calibrator()
        y_obs = cal.observe(layouts, seed=1)
        samples, sigma = cal.calibrate(y_obs, seed=1)
        summary, ratios = cal.summarize(samples, y_obs)

    Calibration settings (J, iterations, augmentation, proposal scales)
    and priors come from the config.
    """

    def __init__(self, debug_logging=True, config=None, workers=None):
        super().__init__(self.__class__.__name__, debug_logging, config, workers)

    def priors(self, y_obs=None):
        """The PriorSpec for this config, with the lambda range scaled to the
        observed density when ``y_obs`` is given and ``prior.lam_max`` is auto."""
        lambda_hat = None
        if y_obs:
            lambda_hat = calibration.empirical_theta(y_obs)['lambda']
        return self.config.priors(self.domain(), lambda_hat)

    def observe(self, layouts, seed=0):
        """Returns the MetricsVectors of observed DiskSets or BinaryRasters.

        Observation i's Monte Carlo metrics use substream ('observation', i) of ``seed``.
        """
        config = self.config.calib_config()
        y_obs = []
        for i, layout in enumerate(layouts):
            if isinstance(layout, BinaryRaster):
                y_obs.append(metrics.metrics_from_raster(layout, config.grid))
            else:
                y_obs.append(metrics.metrics_vector(layout, config.grid, config.metrics,
                                                    utils.child_seed(seed, 'observation', i)))

        self.logger.info("computed metrics for %d observation(s)", len(y_obs))
        return y_obs

    def estimate_covariance(self, y_obs, seed=None):
        """Returns the MetricsCovariance of ``y_obs``, augmented with
        simulations around the empirical estimates unless ``calib.m_star`` or
        ``calib.K`` is 0. Estimates the observations lack (rasters carry no
        radii) are taken from the prior."""
        seed, _ = self.resolve_seed(seed)
        config = self.config.calib_config()
        domain = self.domain()

        theta_hat = calibration.empirical_theta(y_obs)
        self.logger.info("empirical estimates: %s", theta_hat)
        return calibration.estimate_covariance(y_obs, theta_hat, config, domain,
                                               utils.child_seed(seed, 'covariance'),
                                               self.covariates(domain), self.session,
                                               priors=self.priors(y_obs))

    @staticmethod
    def load_covariance(path):
        """Reads a MetricsCovariance written by :func:`save_covariance`."""
        return CovarianceFile.load(path)

    @staticmethod
    def save_covariance(sigma, path):
        CovarianceFile.dump(sigma, path)

    def calibrate(self, y_obs, seed=None, iterations=None, sigma=None, init=None):
        """Runs the sampler; returns (PosteriorSamples, MetricsCovariance).

        :param y_obs: observed MetricsVectors, see :func:`observe`.
        :param iterations: overrides ``calib.iterations``.
        :param sigma: a MetricsCovariance to reuse; estimated from ``y_obs``
          by default. Its metric names take precedence over ``metrics.include``.
        :param init: starting Theta; by default the clipped empirical estimates.
        """
        if not y_obs:
            raise InputError("no observations to calibrate against")

        seed, _ = self.resolve_seed(seed)
        config = self.config.calib_config()
        if iterations is not None:
            config = config._replace(iterations=iterations)

        if sigma is None:
            sigma = self.estimate_covariance(y_obs, seed)
        else:
            self.logger.info("reusing a %dx%d metrics covariance", sigma.k, sigma.k)
        config = config._replace(include=tuple(sigma.names))

        domain = self.domain()
        priors = self.priors(y_obs)
        self.logger.info("calibrating against %d observation(s) under %r", len(y_obs), priors)

        samples = calibration.mcmc_calibrate(y_obs, priors, sigma, config, domain,
                                             utils.child_seed(seed, 'chain'),
                                             self.covariates(domain), self.session, init=init)
        return samples, sigma

    def summarize(self, samples, y_obs=None, burn_in=None):
        """Returns (summary, ratios): per-parameter ParameterSummary and
        posterior-to-prior 95% interval width ratios."""
        if burn_in is None:
            burn_in = self.config['calib.burn_in']
        summary = calibration.posterior_summary(samples, burn_in)
        ratios = calibration.interval_width_ratio(summary, self.priors(y_obs))
        for name, s in summary.items():
            self.logger.info("%s: mode %.4g, 95%% interval [%.4g, %.4g], width ratio %.3f",
                             name, s.mode, s.lower, s.upper, ratios[name])
        return summary, ratios

    def predictive(self, samples, count=None, seed=None, burn_in=None):
        """Returns ``count`` (Theta, DiskSet) layouts at Thetas drawn from the chain."""
        if count is None:
            count = self.config['calib.predictive']
        if burn_in is None:
            burn_in = self.config['calib.burn_in']
        seed, _ = self.resolve_seed(seed)
        domain = self.domain()

        return calibration.posterior_predictive(samples, domain, count,
                                                utils.child_seed(seed, 'predictive'), burn_in,
                                                self.covariates(domain), self.session)
