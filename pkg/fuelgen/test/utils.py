"""Utilities used in testing."""

import logging
import os
import shutil
import tempfile

import numpy as np
from proboscis.asserts import fail

from fuelgen.core.types import DiskSet, Domain, MetricsVector, METRIC_NAMES
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

# the 15 m square used throughout
plot_domain = Domain(0, 0, 15, 15, 32)


class NoticeLogging(logging.Handler):
    """A log handler that, if asked to emit, will set
    ``self.seen_message`` to True.
    """

    def __init__(self):
        logging.Handler.__init__(self)
        self.seen_message = False

    def emit(self, record):
        self.seen_message = True


class TempDir:
    """A scratch directory removed on exit."""

    def __enter__(self):
        self.path = tempfile.mkdtemp(prefix='fuelgen-test-')
        return self

    def __exit__(self, *exc):
        shutil.rmtree(self.path, ignore_errors=True)
        return False

    def join(self, *parts):
        return os.path.join(self.path, *parts)

    def write(self, name, text):
        path = self.join(name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def read(self, name):
        with open(self.join(name), encoding='utf-8') as f:
            return f.read()


def disks(centers, radii, domain=plot_domain):
    return DiskSet(domain, centers, radii)


def two_unit_disks(domain=plot_domain):
    """Unit disks one meter apart, clear of the domain edges."""
    return disks([(7.0, 7.5), (8.0, 7.5)], [1.0, 1.0], domain)


def triangle_of_disks(side, radius=1.0, center=(7.5, 7.5), domain=plot_domain):
    """Three disks on an equilateral triangle with the given side, centroid at ``center``."""
    cx, cy = center
    h = side * np.sqrt(3) / 2
    centers = [(cx - side / 2, cy - h / 3), (cx + side / 2, cy - h / 3), (cx, cy + 2 * h / 3)]
    return disks(centers, [radius] * 3, domain)


def metrics_with(overrides=None, flags=()):
    """A MetricsVector of ones with some entries replaced."""
    values = dict.fromkeys(METRIC_NAMES, 1.0)
    values.update(overrides or {})
    return MetricsVector([values[n] for n in METRIC_NAMES], flags)


def clustered_cloud(centers, sd, per_cluster, seed, z=(0.5, 2.5)):
    """(n x 3) points in isotropic clusters with z uniform in ``z``."""
    rng = np.random.default_rng(seed)
    parts = []
    for cx, cy in centers:
        xy = rng.normal((cx, cy), sd, size=(per_cluster, 2))
        zs = rng.uniform(z[0], z[1], size=(per_cluster, 1))
        parts.append(np.hstack([xy, zs]))
    return np.vstack(parts)


def assert_close(actual, expected, rel=None, abs_tol=None, message=None):
    """Fail unless ``actual`` is within ``rel`` (relative) or ``abs_tol`` of ``expected``."""
    tol = 0.0
    if rel is not None:
        tol = max(tol, rel * abs(expected))
    if abs_tol is not None:
        tol = max(tol, abs_tol)

    if not abs(actual - expected) <= tol:
        fail(message or "%r is not within %g of %r" % (actual, tol, expected))


def assert_in(item, container, message=None):
    if item not in container:
        fail(message or "%r not found in %s" % (item, utils.truncate(container)))
