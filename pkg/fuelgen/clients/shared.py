import logging

from fuelgen.core import gp
from fuelgen.core.types import Theta
from fuelgen.exceptions import InputError
from fuelgen.protocol.config import RunConfig
from fuelgen.protocol.disks import DiskFile
from fuelgen.protocol.raster import RasterFile
from fuelgen.protocol.shared import format_for
from fuelgen.session import Session
from fuelgen.utils import utils


class _Base(metaclass=utils.DocstringInheritMeta):
    """Factors out common client setup."""

    num_clients = 0  # used to disambiguate loggers

    def __init__(self, logger_basename, debug_logging, config, workers):
        """

        :param debug_logging: each client has a ``logger`` member.
          The logger is named ``fuelgen.<client class><client number>`` and
          will propagate to the ``fuelgen`` root logger.

          If this param is ``True``, handlers will be configured to send
          this client's debug log output to disk,
          with warnings and above printed to stderr.
          `Appdirs <https://pypi.python.org/pypi/appdirs>`__
          ``user_log_dir`` is used by default. Users can run::

              from fuelgen.utils import utils
              print(utils.log_filepath)

          to see the exact location on their system.

          If ``False``, no handlers will be configured;
          users must create their own handlers.

        :param config: a :class:`fuelgen.protocol.config.RunConfig`,
          or ``None`` for the defaults.

        :param workers: number of worker threads for independent realizations;
          ``None`` uses ``workers`` from the config.
          Results do not depend on this value.
        """
        # this isn't correct if init is called more than once, so we log the
        # client name below to avoid confusion for people reading logs
        _Base.num_clients += 1

        logger_name = "fuelgen.%s%s" % (logger_basename, _Base.num_clients)
        self.logger = logging.getLogger(logger_name)
        self.config = config if config is not None else RunConfig()

        if workers is None:
            workers = self.config['workers']
        self.session = Session(workers)
        self._covariates = {}

        if debug_logging:
            utils.configure_debug_log_handlers(self.logger)

        self.logger.info("initialized with %d worker(s)", self.session.workers)

    def resolve_seed(self, seed=None):
        """Returns (seed, was_drawn): ``seed``, then the config's, then
        ``FUELGEN_SEED``, then fresh entropy."""
        if seed is None:
            seed = self.config['seed']
        seed, drawn = utils.resolve_seed(seed)
        if drawn:
            self.logger.info("drew seed %d", seed)
        return seed, drawn

    def domain(self, theta=None):
        """The configured Domain.

        With ``domain.grid = auto`` the grid is fine enough for ``theta.rho``
        when a theta is given, otherwise for the prior's smallest lengthscale.
        """
        return self.config.domain(None if theta is None else Theta(*theta).rho)

    def covariates(self, domain):
        """The configured CovariateStack on ``domain``, or None without covariate files."""
        paths = self.config.covariate_files
        if not paths:
            return None

        if domain not in self._covariates:
            self._covariates[domain] = gp.load_covariates(paths, self.config.covariate_betas,
                                                          domain)
        return self._covariates[domain]

    def load_layout(self, path):
        """Reads a DiskSet CSV or PGM raster, chosen by extension.

        Files without a domain header get the configured domain.
        """
        fmt = format_for(path, (DiskFile, RasterFile))
        if fmt is None:
            raise InputError("unrecognized layout file %r; expected .csv or .pgm" % str(path))
        if fmt is DiskFile:
            return fmt.load(path, default_domain=self.domain())
        return fmt.load(path)

    def close(self):
        """Shuts down the worker pool and detaches the log handlers. Returns ``True``."""
        self.session.close()
        self.logger.info("closed")
        utils.remove_log_handlers(self.logger)
        return True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
