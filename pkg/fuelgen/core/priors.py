"""Prior distributions over Theta."""

from collections import namedtuple
import math

import numpy as np
from scipy import stats

from fuelgen.core.types import Theta
from fuelgen.exceptions import ParameterError


class PriorSpec(namedtuple('PriorSpec', [
        'rho_min', 'rho_max',
        'mu_mean', 'mu_sd', 'mu_low', 'mu_high',
        'sigma2_shape', 'sigma2_rate',
        'lam_min', 'lam_max'])):
    """Independent priors on the four parameters.

    rho ~ Uniform(rho_min, rho_max); mu ~ Normal(mu_mean, mu_sd^2) truncated
    to [mu_low, mu_high]; sigma^2 ~ Gamma(sigma2_shape, rate=sigma2_rate);
    lambda ~ Uniform(lam_min, lam_max).
    """
    __slots__ = ()

    def __new__(cls, rho_min=1.0, rho_max=10.0, mu_mean=1.5, mu_sd=0.5, mu_low=0.0,
                mu_high=3.0, sigma2_shape=1.0, sigma2_rate=0.001, lam_min=0.0, lam_max=10.0):
        vals = [float(v) for v in (rho_min, rho_max, mu_mean, mu_sd, mu_low, mu_high,
                                   sigma2_shape, sigma2_rate, lam_min, lam_max)]
        self = super().__new__(cls, *vals)

        if not 0 <= self.rho_min < self.rho_max:
            raise ParameterError("rho prior needs 0 <= rho_min < rho_max; got (%g, %g)"
                                 % (self.rho_min, self.rho_max))
        if not 0 <= self.mu_low < self.mu_high or self.mu_sd <= 0:
            raise ParameterError("mu prior needs 0 <= mu_low < mu_high and mu_sd > 0")
        if self.sigma2_shape <= 0 or self.sigma2_rate <= 0:
            raise ParameterError("sigma^2 prior needs positive shape and rate")
        if not 0 <= self.lam_min < self.lam_max:
            raise ParameterError("lambda prior needs 0 <= lam_min < lam_max; got (%g, %g)"
                                 % (self.lam_min, self.lam_max))
        return self

    def _mu_dist(self):
        a = (self.mu_low - self.mu_mean) / self.mu_sd
        b = (self.mu_high - self.mu_mean) / self.mu_sd
        return stats.truncnorm(a, b, loc=self.mu_mean, scale=self.mu_sd)

    def _sigma2_dist(self):
        return stats.gamma(self.sigma2_shape, scale=1.0 / self.sigma2_rate)

    def interval(self, name, level=0.95):
        """Equal-tail prior interval for one parameter (sigma, not sigma^2)."""
        lo, hi = (1 - level) / 2, (1 + level) / 2
        if name == 'rho':
            return (self.rho_min + lo * (self.rho_max - self.rho_min),
                    self.rho_min + hi * (self.rho_max - self.rho_min))
        if name == 'lambda':
            return (self.lam_min + lo * (self.lam_max - self.lam_min),
                    self.lam_min + hi * (self.lam_max - self.lam_min))
        if name == 'mu':
            return tuple(float(v) for v in self._mu_dist().ppf([lo, hi]))
        if name == 'sigma':
            return tuple(float(v) for v in np.sqrt(self._sigma2_dist().ppf([lo, hi])))
        raise KeyError(name)


def default_priors(domain, lambda_hat=None, **overrides):
    """Weakly informative defaults scaled to ``domain``.

    rho ~ Uniform(width / 15, 2/3 min(width, height)), ie (1, 10) on a 15 m
    square. lambda ~ Uniform(0, max(4 lambda_hat, 1)) when an empirical
    density is known, else Uniform(0, 10).
    """
    kw = dict(rho_min=domain.width / 15.0,
              rho_max=2.0 / 3.0 * min(domain.width, domain.height))
    if lambda_hat is not None:
        kw['lam_max'] = max(4.0 * float(lambda_hat), 1.0)
    kw.update(overrides)
    return PriorSpec(**kw)


def prior_components(theta, priors):
    """Per-parameter log densities.

    The 'sigma2' entry is the Gamma log density of sigma^2; 'sigma_jacobian'
    is log|d sigma^2 / d sigma| = log(2 sigma), so their sum is the log
    density of sigma.
    """
    rho, lam, mu, sigma = Theta(*theta)
    out = {}

    if priors.rho_min <= rho <= priors.rho_max and rho > 0:
        out['rho'] = -math.log(priors.rho_max - priors.rho_min)
    else:
        out['rho'] = -np.inf

    if priors.lam_min <= lam <= priors.lam_max:
        out['lambda'] = -math.log(priors.lam_max - priors.lam_min)
    else:
        out['lambda'] = -np.inf

    if priors.mu_low <= mu <= priors.mu_high and mu > 0:
        out['mu'] = float(priors._mu_dist().logpdf(mu))
    else:
        out['mu'] = -np.inf

    if sigma > 0:
        out['sigma2'] = float(priors._sigma2_dist().logpdf(sigma * sigma))
        out['sigma_jacobian'] = math.log(2.0 * sigma)
    else:
        out['sigma2'] = out['sigma_jacobian'] = -np.inf

    return out


def prior_logpdf(theta, priors):
    """Sum of the component log densities; -inf outside the support."""
    comps = prior_components(theta, priors)
    if any(v == -np.inf for v in comps.values()):
        return -np.inf
    return float(sum(comps.values()))


def in_support(theta, priors):
    return prior_logpdf(theta, priors) > -np.inf


def sample_theta(priors, rng):
    """One Theta drawn from ``priors`` with the numpy Generator ``rng``."""
    rho = rng.uniform(max(priors.rho_min, np.finfo(float).tiny), priors.rho_max)
    lam = rng.uniform(priors.lam_min, priors.lam_max)
    mu = float(priors._mu_dist().rvs(random_state=rng))
    sigma2 = float(priors._sigma2_dist().rvs(random_state=rng))
    sigma = math.sqrt(max(sigma2, np.finfo(float).tiny))
    mu = max(mu, np.finfo(float).tiny)
    return Theta(rho, lam, mu, sigma)
