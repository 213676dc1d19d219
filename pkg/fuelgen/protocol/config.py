"""Run configuration: flat ``key = value`` text.

    # 15 m plot, prior-mean layout
    domain.x_max = 15
    theta.lambda = 2
    calib.iterations = 5000

Keys are dotted and every key has a default in DEFAULTS. Keys defaulting
to None take the word ``auto`` and are filled from the data or domain.
Unknown keys are rejected.
"""

import validictory

from fuelgen.core.calibration import CalibConfig
from fuelgen.core.gp import default_grid_resolution
from fuelgen.core.priors import default_priors
from fuelgen.core.types import METRIC_NAMES, Domain, GridSpec, MetricsConfig, Theta
from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat

DEFAULTS = {
    'domain.x_min': 0.0,
    'domain.y_min': 0.0,
    'domain.x_max': 15.0,
    'domain.y_max': 15.0,
    'domain.grid': None,
    'gp.jitter': 1e-8,

    'theta.rho': 3.0,
    'theta.lambda': 2.0,
    'theta.mu': 0.5,
    'theta.sigma': 0.2,

    'covariates.files': '',
    'covariates.beta': '1',

    'output.raster': 1,
    'output.svg': 1,
    'raster.pixel': 0.05,

    'metrics.cell_size': 1.0,
    'metrics.adjacency': 'rook',
    'metrics.weights': 'binary',
    'metrics.mc_samples': 20000,
    'metrics.points_per_disk': 256,
    'metrics.samples_per_cell': 50,
    'metrics.hole_pixel': 0.05,
    'metrics.include': '',

    'prior.rho_min': None,
    'prior.rho_max': None,
    'prior.mu_mean': 1.5,
    'prior.mu_sd': 0.5,
    'prior.mu_low': 0.0,
    'prior.mu_high': 3.0,
    'prior.sigma2_shape': 1.0,
    'prior.sigma2_rate': 0.001,
    'prior.lam_min': 0.0,
    'prior.lam_max': None,

    'calib.J': 25,
    'calib.iterations': 5000,
    'calib.m_star': 25,
    'calib.K': 25,
    'calib.rho_s': 'uniform',
    'calib.rho_s_a': 0.0,
    'calib.rho_s_b': 10.0,
    'calib.scale_rho': 0.1,
    'calib.scale_lambda': 0.1,
    'calib.scale_mu': 0.1,
    'calib.scale_sigma': 0.1,
    'calib.adapt_iterations': 500,
    'calib.adapt_interval': 50,
    'calib.burn_in': 0.5,
    'calib.predictive': 5,

    'ingest.z_min': 0.1,
    'ingest.z_max': 3.0,
    'ingest.max_components': 100,
    'ingest.sd_min': 0.1,
    'ingest.sd_max': 1.5,
    'ingest.weight_floor': None,
    'ingest.restarts': 5,
    'ingest.max_iter': 200,

    'seed': None,
    'workers': 1,
}

_positive = {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True}
_nonneg = {'type': 'number', 'minimum': 0}
_count = {'type': 'integer', 'minimum': 1}
_nonneg_count = {'type': 'integer', 'minimum': 0}
_flag = {'type': 'integer', 'enum': [0, 1]}
_auto_positive = {'type': ['number', 'null'], 'minimum': 0, 'exclusiveMinimum': True}

schema = {
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'domain.x_min': {'type': 'number'},
        'domain.y_min': {'type': 'number'},
        'domain.x_max': {'type': 'number'},
        'domain.y_max': {'type': 'number'},
        'domain.grid': {'type': ['integer', 'null'], 'minimum': 2},
        'gp.jitter': _nonneg,

        'theta.rho': _positive,
        'theta.lambda': _nonneg,
        'theta.mu': _positive,
        'theta.sigma': _positive,

        'covariates.files': {'type': 'string', 'blank': True},
        'covariates.beta': {'type': 'string'},

        'output.raster': _flag,
        'output.svg': _flag,
        'raster.pixel': _positive,

        'metrics.cell_size': _positive,
        'metrics.adjacency': {'type': 'string', 'enum': ['rook', 'queen']},
        'metrics.weights': {'type': 'string', 'enum': ['binary', 'row']},
        'metrics.mc_samples': {'type': 'integer', 'minimum': 1000},
        'metrics.points_per_disk': {'type': 'integer', 'minimum': 64},
        'metrics.samples_per_cell': _count,
        'metrics.hole_pixel': _positive,
        'metrics.include': {'type': 'string', 'blank': True},

        'prior.rho_min': _auto_positive,
        'prior.rho_max': _auto_positive,
        'prior.mu_mean': {'type': 'number'},
        'prior.mu_sd': _positive,
        'prior.mu_low': _nonneg,
        'prior.mu_high': _positive,
        'prior.sigma2_shape': _positive,
        'prior.sigma2_rate': _positive,
        'prior.lam_min': _nonneg,
        'prior.lam_max': _auto_positive,

        'calib.J': _count,
        'calib.iterations': _count,
        'calib.m_star': _nonneg_count,
        'calib.K': _nonneg_count,
        'calib.rho_s': {'type': 'string', 'enum': ['uniform', 'gamma']},
        'calib.rho_s_a': _nonneg,
        'calib.rho_s_b': _positive,
        'calib.scale_rho': _nonneg,
        'calib.scale_lambda': _nonneg,
        'calib.scale_mu': _nonneg,
        'calib.scale_sigma': _nonneg,
        'calib.adapt_iterations': _nonneg_count,
        'calib.adapt_interval': _count,
        'calib.burn_in': {'type': 'number', 'minimum': 0, 'maximum': 1, 'exclusiveMaximum': True},
        'calib.predictive': _nonneg_count,

        'ingest.z_min': {'type': 'number'},
        'ingest.z_max': {'type': 'number'},
        'ingest.max_components': _count,
        'ingest.sd_min': _positive,
        'ingest.sd_max': _positive,
        'ingest.weight_floor': {'type': ['number', 'null'], 'minimum': 0},
        'ingest.restarts': _count,
        'ingest.max_iter': _count,

        'seed': {'type': ['integer', 'null'], 'minimum': 0},
        'workers': _count,
    },
}


def _kind(key):
    kinds = schema['properties'][key]['type']
    if isinstance(kinds, str):
        kinds = [kinds]
    return [k for k in kinds if k != 'null'][0]


def coerce(key, raw):
    """Convert the text value for key to its schema type."""
    if key not in DEFAULTS:
        raise ValidationException("unknown config key %r" % key, key=key)

    raw = raw.strip()
    if DEFAULTS[key] is None and raw.lower() == 'auto':
        return None

    kind = _kind(key)
    try:
        if kind == 'integer':
            return int(raw)
        if kind == 'number':
            return float(raw)
    except ValueError as e:
        raise ValidationException("%s: expected %s, got %r" % (key, kind, raw), key=key) from e
    return raw


class RunConfig:
    """A validated run configuration; values are looked up by dotted key."""

    def __init__(self, values=None):
        self.values = dict(DEFAULTS)
        for key, val in (values or {}).items():
            if key not in DEFAULTS:
                raise ValidationException("unknown config key %r" % key, key=key)
            self.values[key] = val
        self.validate()

    @classmethod
    def load(cls, path):
        return ConfigFile.load(path)

    def validate(self):
        for key, val in self.values.items():
            try:
                validictory.validate({key: val}, schema, required_by_default=False)
            except ValueError as e:
                raise ValidationException(str(e), key=key) from e
        for lo, hi in (('domain.x_min', 'domain.x_max'), ('domain.y_min', 'domain.y_max'),
                       ('ingest.z_min', 'ingest.z_max'), ('ingest.sd_min', 'ingest.sd_max'),
                       ('prior.mu_low', 'prior.mu_high')):
            if not self.values[lo] < self.values[hi]:
                raise ValidationException("%s must be less than %s" % (lo, hi), key=lo)
        for name in self.include:
            if name not in METRIC_NAMES:
                raise ValidationException("unknown metric %r" % name, key='metrics.include')
        if len(self.covariate_betas) != len(self.covariate_files) + 1:
            raise ValidationException("covariates.beta needs one weight for the field plus one"
                                      " per covariate file", key='covariates.beta')
        return self

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **overrides):
        """Copy with keys given as keyword args, dots replaced by double underscores."""
        values = dict(self.values)
        values.update({k.replace('__', '.'): v for k, v in overrides.items()})
        return RunConfig(values)

    @staticmethod
    def _split(text):
        return [t.strip() for t in text.split(',') if t.strip()]

    @property
    def covariate_files(self):
        return self._split(self.values['covariates.files'])

    @property
    def covariate_betas(self):
        try:
            return tuple(float(b) for b in self._split(self.values['covariates.beta']))
        except ValueError as e:
            raise ValidationException(str(e), key='covariates.beta') from e

    @property
    def include(self):
        return tuple(self._split(self.values['metrics.include'])) or METRIC_NAMES

    def domain(self, rho_min=None):
        """The Domain; an auto grid resolves rho_min (default: the prior lower bound) to d."""
        v = self.values
        base = Domain(v['domain.x_min'], v['domain.y_min'], v['domain.x_max'], v['domain.y_max'])
        if v['domain.grid'] is not None:
            return base.with_resolution(v['domain.grid'])

        if rho_min is None:
            rho_min = self.priors(base).rho_min
        return base.with_resolution(default_grid_resolution(base, rho_min))

    def theta(self):
        v = self.values
        return Theta(v['theta.rho'], v['theta.lambda'], v['theta.mu'], v['theta.sigma'])

    def priors(self, domain, lambda_hat=None):
        v = self.values
        overrides = {name: v['prior.' + name]
                     for name in ('mu_mean', 'mu_sd', 'mu_low', 'mu_high', 'sigma2_shape',
                                  'sigma2_rate', 'lam_min', 'rho_min', 'rho_max', 'lam_max')
                     if v['prior.' + name] is not None}
        return default_priors(domain, lambda_hat, **overrides)

    def grid_spec(self):
        v = self.values
        return GridSpec(v['metrics.cell_size'], v['metrics.adjacency'], v['metrics.weights'])

    def metrics_config(self):
        v = self.values
        return MetricsConfig(v['metrics.mc_samples'], v['metrics.points_per_disk'],
                             v['metrics.samples_per_cell'], v['metrics.hole_pixel'])

    def calib_config(self):
        v = self.values
        return CalibConfig(
            J=v['calib.J'], iterations=v['calib.iterations'], m_star=v['calib.m_star'],
            K=v['calib.K'], rho_s=v['calib.rho_s'], rho_s_a=v['calib.rho_s_a'],
            rho_s_b=v['calib.rho_s_b'],
            scales=(v['calib.scale_rho'], v['calib.scale_lambda'], v['calib.scale_mu'],
                    v['calib.scale_sigma']),
            adapt_iterations=v['calib.adapt_iterations'], adapt_interval=v['calib.adapt_interval'],
            include=self.include, grid=self.grid_spec(), metrics=self.metrics_config())


class ConfigFile(FileFormat):
    extensions = ('.cfg', '.conf', '.txt')

    @classmethod
    def parse(cls, text):
        meta = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ParseException("expected 'key = value'", lineno=lineno)

            key, raw = (part.strip() for part in line.split('=', 1))
            if key in meta:
                raise ParseException("duplicate key %r" % key, lineno=lineno)
            meta[key] = coerce(key, raw)
        return meta, []

    @classmethod
    def validate(cls, meta, records):
        unknown = sorted(set(meta) - set(DEFAULTS))
        if unknown:
            raise ValidationException("unknown config key %r" % unknown[0], key=unknown[0])

    @classmethod
    def build(cls, meta, records):
        return RunConfig(meta)

    @classmethod
    def format(cls, config):
        return ''.join('%s = %s\n' % (key, 'auto' if val is None else val)
                       for key, val in sorted(config.values.items()))
