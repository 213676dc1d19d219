"""Bayesian calibration of Theta against observed metric vectors.

The likelihood compares every observed metric vector with every vector
generated at a candidate Theta under a multivariate normal form. Its
covariance is estimated once from the observations, augmented with
simulations around the empirical estimates. The posterior is explored by
random-walk Metropolis-Hastings in a transformed space, with the
likelihood at the current state drawn afresh at every iteration.
"""

from collections import defaultdict, namedtuple
import math
import warnings

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import expit, logit
from scipy.stats import gaussian_kde

from fuelgen.core.generator import generate_realization
from fuelgen.core.metrics import metrics_vector
from fuelgen.core.priors import prior_logpdf
from fuelgen.core.types import METRIC_NAMES, GridSpec, MetricsConfig, Theta
from fuelgen.exceptions import (
    ConditioningError, FuelgenWarning, GenerationError, InitializationError,
    InputError, NumericalError, ParameterError,
)
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

_LOG_2PI = math.log(2 * math.pi)

# below this many observations the posterior can be very wide
SMALL_M = 10
MIN_SUMMARY_DRAWS = 100


class CalibConfig(namedtuple('CalibConfig', [
        'J', 'iterations', 'm_star', 'K', 'rho_s', 'rho_s_a', 'rho_s_b',
        'scales', 'adapt_iterations', 'adapt_interval', 'include', 'grid', 'metrics'])):
    """Sampler and covariance-augmentation settings.

    ``rho_s`` is 'uniform' (on [rho_s_a, rho_s_b]) or 'gamma' (shape
    rho_s_a, scale rho_s_b). ``scales`` are the initial proposal sds on the
    transformed parameters (log rho, log lambda, logit mu, log sigma).
    ``include`` lists the metric names that enter the likelihood.
    """
    __slots__ = ()

    def __new__(cls, J=25, iterations=5000, m_star=25, K=25, rho_s='uniform',
                rho_s_a=0.0, rho_s_b=10.0, scales=(0.1, 0.1, 0.1, 0.1),
                adapt_iterations=500, adapt_interval=50, include=METRIC_NAMES,
                grid=GridSpec(), metrics=MetricsConfig()):
        if J < 1 or iterations < 1:
            raise ParameterError("J and iterations must be at least 1")
        if m_star < 0 or K < 0:
            raise ParameterError("m_star and K must be non-negative")
        if rho_s not in ('uniform', 'gamma'):
            raise ParameterError("rho_s must be 'uniform' or 'gamma'; received %r" % rho_s)
        scales = tuple(float(s) for s in scales)
        if len(scales) != 4 or any(s < 0 for s in scales):
            raise ParameterError("need four non-negative proposal scales; received %r" % (scales,))
        include = tuple(include)
        unknown = set(include) - set(METRIC_NAMES)
        if unknown or not include:
            raise ParameterError("bad metric selection %r" % (include,))
        # keep the canonical order regardless of how the subset was written
        include = tuple(n for n in METRIC_NAMES if n in include)

        return super().__new__(cls, int(J), int(iterations), int(m_star), int(K), rho_s,
                               float(rho_s_a), float(rho_s_b), scales, int(adapt_iterations),
                               max(1, int(adapt_interval)), include, grid, metrics)

    @property
    def augmented(self):
        return self.m_star > 0 and self.K > 0


class MetricsCovariance(namedtuple('MetricsCovariance',
                                   'matrix names m m_star K shrinkage floored')):
    """Covariance of the metrics over ``names`` with its provenance.

    ``shrinkage`` is the weight moved onto the diagonal to make the matrix
    positive definite; ``floored`` names the metrics whose zero variance was
    raised to a small floor first.
    """
    __slots__ = ()

    def __new__(cls, matrix, names=METRIC_NAMES, m=0, m_star=0, K=0, shrinkage=0.0,
                floored=()):
        matrix = np.array(matrix, dtype=float, ndmin=2)
        names = tuple(names)
        if matrix.shape != (len(names), len(names)):
            raise ValueError("covariance of shape %s does not match %d metric names"
                             % (matrix.shape, len(names)))
        matrix.setflags(write=False)
        return super().__new__(cls, matrix, names, int(m), int(m_star), int(K),
                               float(shrinkage), tuple(floored))

    @property
    def k(self):
        return len(self.names)

    __hash__ = None


class PosteriorSamples(namedtuple('PosteriorSamples',
                                  'thetas loglik accepted failures scales seed')):
    """The chain: ``thetas`` (n x 4), ``loglik`` and ``accepted`` per iteration.

    ``failures`` counts likelihood evaluations that broke down (treated as -inf).
    ``scales`` are the frozen proposal scales after warm-up.
    """
    __slots__ = ()

    @property
    def n(self):
        return len(self.loglik)

    @property
    def acceptance_rate(self):
        return float(np.mean(self.accepted)) if self.n else 0.0

    def theta(self, i):
        return Theta(*self.thetas[i])

    def rows(self):
        """Yield (iter, Theta, loglik, accepted)."""
        for i in range(self.n):
            yield i, self.theta(i), float(self.loglik[i]), bool(self.accepted[i])


class ParameterSummary(namedtuple('ParameterSummary', 'mode mean lower upper')):
    __slots__ = ()

    @property
    def width(self):
        return self.upper - self.lower


def _selected(vectors, names):
    values, flags = zip(*(v.select(names) for v in vectors))
    return np.array(values), np.array(flags)


def log_likelihood(y_obs, y_gen, sigma):
    """Stochastic log-likelihood of observed against generated metric vectors.

    log L = -(k/2) log 2 pi - 1/2 log det Sigma
            - 1/2 sum_i sum_j (y_obs_i - y_gen_j)' Sigma^-1 (y_obs_i - y_gen_j)

    over the metrics named by ``sigma``. Metrics flagged in either vector of
    a pair are left out of that pair's quadratic form, which then uses the
    matching sub-covariance.

    Raise ConditioningError if ``sigma`` is not positive definite.
    """
    names = sigma.names
    try:
        chol = cholesky(sigma.matrix, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConditioningError("metrics covariance is singular: %s" % e,
                                context='log_likelihood') from e

    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    loglik = -0.5 * sigma.k * _LOG_2PI - 0.5 * logdet

    if not y_obs or not y_gen:
        return float(loglik)

    obs, obs_flags = _selected(y_obs, names)
    gen, gen_flags = _selected(y_gen, names)

    groups = defaultdict(list)
    for i in range(len(obs)):
        masks = gen_flags | obs_flags[i]
        diffs = obs[i] - gen
        for mask, diff in zip(masks, diffs):
            groups[mask.tobytes()].append(diff)

    quad = 0.0
    for key, diffs in groups.items():
        keep = ~np.frombuffer(key, dtype=bool)
        if not keep.any():
            continue
        D = np.array(diffs)[:, keep]
        L = chol if keep.all() else cholesky(sigma.matrix[np.ix_(keep, keep)], lower=True)
        z = solve_triangular(L, D.T, lower=True, check_finite=False)
        quad += float(np.sum(z * z))

    return float(loglik - 0.5 * quad)


def empirical_theta(y_obs):
    """Average lambda_hat, mu_hat and sigma_hat over observations.

    Returns a dict with keys 'lambda', 'mu', 'sigma'; entries flagged in
    every observation are None.
    """
    out = {}
    for key, name in (('lambda', 'lambda_hat'), ('mu', 'mu_hat'), ('sigma', 'sigma_hat')):
        vals = [v[name] for v in y_obs if name not in v.flags]
        out[key] = float(np.mean(vals)) if vals else None
    return out


def _positive_normal(rng, center, rel_sd=0.1):
    while True:
        val = rng.normal(center, rel_sd * center)
        if val > 0:
            return float(val)


def _draw_rho_s(rng, config):
    while True:
        if config.rho_s == 'uniform':
            val = rng.uniform(config.rho_s_a, config.rho_s_b)
        else:
            val = rng.gamma(config.rho_s_a, config.rho_s_b)
        if val > 0:
            return float(val)


def augmentation_thetas(theta_hat, config, seed):
    """The m_star Theta samples used to augment the covariance estimate.

    lambda, mu and sigma are drawn from normals with 10% standard error
    around the empirical estimates; rho from the configured distribution.
    Non-positive draws are redrawn. Use :func:`fill_from_prior` first when
    some estimates are missing.
    """
    for name in ('lambda', 'mu', 'sigma'):
        if theta_hat.get(name) is None or not theta_hat[name] > 0:
            raise InputError("no positive %s estimate to augment around (%r); raster-only "
                             "observations need a prior fallback" % (name, theta_hat.get(name)))

    thetas = []
    for s in range(config.m_star):
        rng = utils.substream(seed, 'augment', s)
        lam = _positive_normal(rng, theta_hat['lambda'])
        mu = _positive_normal(rng, theta_hat['mu'])
        sigma = _positive_normal(rng, theta_hat['sigma'])
        thetas.append(Theta(_draw_rho_s(rng, config), lam, mu, sigma))
    return thetas


def fill_from_prior(theta_hat, y_obs, priors):
    """Returns (filled theta_hat, names of the filled entries).

    Estimates missing from every observation (raster observations flag
    lambda_hat, mu_hat and sigma_hat) are replaced by the prior-centred
    start of :func:`initial_theta`.
    """
    missing = [name for name in ('lambda', 'mu', 'sigma')
               if theta_hat.get(name) is None or not theta_hat[name] > 0]
    if not missing:
        return dict(theta_hat), []

    start = initial_theta(y_obs, priors)
    fallback = {'lambda': start.lam, 'mu': start.mu, 'sigma': start.sigma}
    filled = dict(theta_hat)
    filled.update((name, fallback[name]) for name in missing)
    log.info("no observed estimate of %s; augmenting around the prior instead (%s)",
             ', '.join(missing), ', '.join('%s=%.4g' % (n, filled[n]) for n in missing))
    return filled, missing


def simulate_metrics(theta, domain, seeds, config, covariates=None, session=None):
    """Metric vectors of realizations at ``theta``, one per seed.

    Realizations that fail to generate yield None.
    """
    def one(s):
        try:
            disks = generate_realization(theta, domain, covariates, s)
            return metrics_vector(disks, config.grid, config.metrics, s)
        except (GenerationError, NumericalError) as e:
            log.debug("realization at %r failed: %s", theta, e)
            return None

    if session is None:
        return [one(s) for s in seeds]
    return session.map(one, seeds)


def _shrink_to_pd(cov, steps=20):
    """Returns (matrix, shrinkage, indices of floored diagonal entries).

    Zero variances are raised to a small floor first; only then is the
    matrix shrunk toward its diagonal until Cholesky succeeds.
    """
    cov = np.array(cov, dtype=float)
    if not np.all(np.isfinite(cov)):
        raise ConditioningError("metrics covariance has non-finite entries",
                                context='estimate_covariance')

    d = np.diag(cov)
    scale = max(float(d[d > 0].mean()) if np.any(d > 0) else 0.0, 1.0)
    # constant columns come out of np.cov as zero up to rounding
    floored = np.flatnonzero(d <= 1e-12 * scale)
    if floored.size:
        cov[floored, :] = 0.0
        cov[:, floored] = 0.0
        cov[floored, floored] = 1e-6 * scale

    diag = np.diag(np.diag(cov))
    for alpha in np.linspace(0.0, 1.0, steps + 1):
        candidate = (1 - alpha) * cov + alpha * diag
        try:
            cholesky(candidate, lower=True)
            return candidate, float(alpha), floored.tolist()
        except np.linalg.LinAlgError:
            continue

    # the diagonal is positive, so alpha = 1 always factors
    raise ConditioningError("metrics covariance could not be made positive definite",
                            context='estimate_covariance')


def estimate_covariance(y_obs, theta_hat, config, domain, seed, covariates=None, session=None,
                        priors=None):
    """Estimate the metrics covariance from observations plus augmentation.

    Each of ``config.m_star`` Theta samples (see :func:`augmentation_thetas`)
    contributes ``config.K`` generated metric vectors, so the sample
    covariance is over m + m_star * K vectors. Metrics with zero variance get
    a small diagonal floor, then the result is shrunk toward its diagonal
    until positive definite.

    :param theta_hat: dict of empirical estimates, see :func:`empirical_theta`.
    :param priors: a PriorSpec to augment around where ``theta_hat`` has
      no estimate, as for raster-only observations. Without it such
      observations cannot be augmented.
    """
    m = len(y_obs)
    if m == 0:
        raise InputError("no observations to estimate the metrics covariance from")
    if m < SMALL_M:
        msg = "only %d observation(s); posterior uncertainty may be large" % m
        log.warning(msg)
        warnings.warn(msg, FuelgenWarning)

    names = config.include
    rows, _ = _selected(y_obs, names)
    rows = [rows]

    if config.augmented:
        if priors is not None:
            theta_hat, _ = fill_from_prior(theta_hat, y_obs, priors)
        thetas = augmentation_thetas(theta_hat, config, seed)
        for s, theta in enumerate(thetas):
            seeds = [utils.child_seed(seed, 'augment', s, 'realization', k) for k in range(config.K)]
            vecs = [v for v in simulate_metrics(theta, domain, seeds, config, covariates, session)
                    if v is not None]
            if vecs:
                rows.append(_selected(vecs, names)[0])
        log.debug("augmented %d observations with %d simulated vectors",
                  m, sum(len(r) for r in rows[1:]))

    data = np.concatenate(rows)
    if len(data) < 2:
        cov = np.zeros((len(names), len(names)))
    else:
        cov = np.atleast_2d(np.cov(data, rowvar=False, ddof=1))

    cov, shrinkage, floored = _shrink_to_pd(cov)
    floored = tuple(names[i] for i in floored)
    if floored:
        log.info("zero variance in %s; floored before shrinkage", ', '.join(floored))
    if shrinkage > 0:
        log.info("metrics covariance shrunk toward its diagonal by %.2f", shrinkage)

    return MetricsCovariance(cov, names, m, config.m_star if config.augmented else 0,
                             config.K if config.augmented else 0, shrinkage, floored)


class _Transform:
    """Maps Theta to an unconstrained vector and back.

    (log rho, log lambda, logit((mu - lo) / (hi - lo)), log sigma)
    """

    def __init__(self, mu_low, mu_high):
        self.lo = mu_low
        self.hi = mu_high

    def forward(self, theta):
        rho, lam, mu, sigma = theta
        return np.array([math.log(rho), math.log(lam),
                         float(logit((mu - self.lo) / (self.hi - self.lo))), math.log(sigma)])

    def inverse(self, u):
        mu = self.lo + (self.hi - self.lo) * float(expit(u[2]))
        return Theta(math.exp(u[0]), math.exp(u[1]), mu, math.exp(u[3]))

    def log_jacobian(self, theta):
        """log |d theta / d u|"""
        rho, lam, mu, sigma = theta
        width = self.hi - self.lo
        return (math.log(rho) + math.log(lam) + math.log(sigma) +
                math.log((mu - self.lo) * (self.hi - mu) / width))


def initial_theta(y_obs, priors):
    """Start at the empirical estimates, clipped into the prior support.

    rho cannot be estimated from a layout and starts at the middle of its prior.
    """
    est = empirical_theta(y_obs)

    def clip(val, lo, hi, default):
        if val is None:
            val = default
        eps = 1e-6 * (hi - lo)
        return min(max(val, lo + eps), hi - eps)

    rho = 0.5 * (priors.rho_min + priors.rho_max)
    lam = clip(est['lambda'], priors.lam_min, priors.lam_max,
               0.5 * (priors.lam_min + priors.lam_max))
    mu = clip(est['mu'], priors.mu_low, priors.mu_high, priors.mu_mean)
    sigma = est['sigma'] if est['sigma'] else 0.5 * mu
    return Theta(rho, lam, mu, sigma)


def mcmc_calibrate(y_obs, priors, sigma, config, domain, seed, covariates=None, session=None,
                   init=None, loglik_fn=None):
    """Random-walk Metropolis-Hastings over Theta.

    Every iteration draws J realizations at both the current and the proposed
    Theta and compares their stochastic likelihoods. Proposals are Gaussian
    in the transformed space of :class:`_Transform` with the Jacobian in the
    acceptance ratio. Proposal scales adapt toward 15-40% acceptance during
    the first ``config.adapt_iterations`` iterations, then stay fixed.

    :param init: starting Theta; by default :func:`initial_theta`.
    :param loglik_fn: replaces the stochastic likelihood with
      ``loglik_fn(theta)``, eg to check the sampler against a known posterior.

    Raise InitializationError if the starting Theta has zero prior density.
    Likelihood failures at a Theta count as -inf and are tallied.
    """
    if not y_obs and loglik_fn is None:
        raise InputError("no observations to calibrate against")

    transform = _Transform(priors.mu_low, priors.mu_high)
    theta = Theta(*init) if init is not None else initial_theta(y_obs, priors)
    lp = prior_logpdf(theta, priors)
    if lp == -np.inf:
        raise InitializationError("initial state %r has zero prior density" % (theta,))
    try:
        u = transform.forward(theta)
        lj = transform.log_jacobian(theta)
    except ValueError as e:
        raise InitializationError("initial state %r is on the support boundary" % (theta,)) from e

    scales = np.array(config.scales)
    n_iter = config.iterations
    thetas = np.empty((n_iter, 4))
    logliks = np.empty(n_iter)
    accepted = np.zeros(n_iter, dtype=bool)
    failures = [0]

    def evaluate(pairs, t):
        """Log-likelihoods for [(theta, label)] at iteration t."""
        if loglik_fn is not None:
            return [float(loglik_fn(th)) for th, _ in pairs]

        out = []
        for th, label in pairs:
            seeds = [utils.child_seed(seed, 'iteration', t, label, j) for j in range(config.J)]
            batch = simulate_metrics(th, domain, seeds, config, covariates, session)
            if any(v is None for v in batch):
                failures[0] += 1
                out.append(-np.inf)
            else:
                out.append(log_likelihood(y_obs, batch, sigma))
        return out

    log.info("starting %d iterations at %r (J=%d, scales=%s)", n_iter, theta, config.J, scales)
    window_accepts = 0

    for t in range(n_iter):
        rng = utils.substream(seed, 'proposal', t)
        u_prop = u + scales * rng.standard_normal(4)
        log_u = math.log(rng.random())

        theta_prop = transform.inverse(u_prop)
        lp_prop = prior_logpdf(theta_prop, priors)
        if lp_prop > -np.inf:
            try:
                lj_prop = transform.log_jacobian(theta_prop)
            except ValueError:
                # mu saturated onto a bound of its support
                lp_prop = -np.inf

        if lp_prop == -np.inf:
            ll_cur, = evaluate([(theta, 'current')], t)
            accept = False
        else:
            ll_cur, ll_prop = evaluate([(theta, 'current'), (theta_prop, 'proposed')], t)
            if ll_prop == -np.inf:
                accept = False
            elif ll_cur == -np.inf:
                accept = True
            else:
                log_alpha = (ll_prop + lp_prop + lj_prop) - (ll_cur + lp + lj)
                accept = log_u < log_alpha

        if accept:
            theta, u, lp, lj, ll_cur = theta_prop, u_prop, lp_prop, lj_prop, ll_prop
            window_accepts += 1

        thetas[t] = theta
        logliks[t] = ll_cur
        accepted[t] = accept

        if t < config.adapt_iterations and (t + 1) % config.adapt_interval == 0:
            rate = window_accepts / config.adapt_interval
            if rate < 0.15:
                scales = scales * 0.8
            elif rate > 0.40:
                scales = scales * 1.25
            log.debug("iteration %d: window acceptance %.2f, scales now %s", t + 1, rate, scales)
            window_accepts = 0

    samples = PosteriorSamples(thetas, logliks, accepted, failures[0], tuple(scales), seed)
    log.info("finished: acceptance rate %.3f, %d failed likelihood evaluations",
             samples.acceptance_rate, samples.failures)
    return samples


def _post_burn_in(samples, burn_in):
    if not 0 <= burn_in < 1:
        raise ParameterError("burn-in fraction must be in [0, 1); received %r" % burn_in)
    start = int(math.floor(burn_in * samples.n))
    return samples.thetas[start:]


def _kde_mode(draws):
    if np.ptp(draws) == 0:
        return float(draws[0])
    try:
        kde = gaussian_kde(draws)
    except (np.linalg.LinAlgError, ValueError):
        return float(np.median(draws))
    grid = np.linspace(draws.min(), draws.max(), 512)
    return float(grid[np.argmax(kde(grid))])


def posterior_summary(samples, burn_in=0.5):
    """Per-parameter KDE mode, mean and 95% equal-tail interval.

    Returns a dict keyed by 'rho', 'lambda', 'mu', 'sigma'.
    Raise InputError when fewer than 100 draws remain after burn-in.
    """
    draws = _post_burn_in(samples, burn_in)
    if len(draws) < MIN_SUMMARY_DRAWS:
        raise InputError("need at least %d draws after burn-in; have %d"
                         % (MIN_SUMMARY_DRAWS, len(draws)))

    summary = {}
    for col, name in enumerate(Theta.names):
        x = draws[:, col]
        lower, upper = np.quantile(x, [0.025, 0.975])
        summary[name] = ParameterSummary(_kde_mode(x), float(x.mean()),
                                         float(lower), float(upper))
    return summary


def interval_width_ratio(summary, priors):
    """Posterior 95% interval width over the prior's, per parameter."""
    ratios = {}
    for name, s in summary.items():
        lo, hi = priors.interval(name)
        ratios[name] = s.width / (hi - lo) if hi > lo else np.inf
    return ratios


def posterior_predictive(samples, domain, count, seed, burn_in=0.5, covariates=None,
                         session=None):
    """``count`` layouts, each at a Theta drawn from the post-burn-in chain.

    Returns a list of (Theta, DiskSet).
    """
    draws = _post_burn_in(samples, burn_in)
    if len(draws) == 0:
        raise InputError("no draws after burn-in")

    def one(i):
        attempt = 0
        while True:
            rng = utils.substream(seed, 'predictive', i, attempt)
            theta = Theta(*draws[rng.integers(len(draws))])
            s = utils.child_seed(seed, 'predictive', i, attempt, 'realization')
            try:
                return theta, generate_realization(theta, domain, covariates, s)
            except GenerationError as e:
                log.info("posterior draw %r could not be realized (%s); redrawing", theta, e)
                attempt += 1

    if session is None:
        return [one(i) for i in range(count)]
    return session.map(one, range(count))
