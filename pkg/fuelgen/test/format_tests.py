"""
Tests of the file formats, run configuration, clients and command line.
"""

from contextlib import redirect_stderr, redirect_stdout
from datetime import datetime, timezone
import io
import os
import re
from unittest.mock import patch

import numpy as np
from proboscis.asserts import (
    assert_equal, assert_false, assert_is_none, assert_raises, assert_true, Check
)
from proboscis import test

from fuelgen import cli
from fuelgen.clients import Calibrator, Generator, Ingestor
from fuelgen.core.calibration import MetricsCovariance, ParameterSummary, PosteriorSamples
from fuelgen.core.types import (
    DISK_ONLY_METRICS, METRIC_NAMES, BinaryRaster, DiskSet, Domain, Theta,
)
from fuelgen.exceptions import InputError, ParseException, ValidationException
from fuelgen.protocol.chain import ChainFile, CovarianceFile, SummaryCsv, SummaryReport
from fuelgen.protocol.config import ConfigFile, RunConfig
from fuelgen.protocol.disks import DiskFile
from fuelgen.protocol.grid import AsciiGridFile
from fuelgen.protocol.metrics import MetricsFile
from fuelgen.protocol.pointcloud import PointCloudFile
from fuelgen.protocol.raster import RasterFile
from fuelgen.protocol.shared import fmt_float, format_for
from fuelgen.protocol.svg import SvgFigure, underlay_png
from fuelgen.test.utils import (
    TempDir, assert_in, clustered_cloud, disks, metrics_with, plot_domain, two_unit_disks,
)

# All tests end up in the local group.
test = test(groups=['local'])

# a quick 5 m plot for client and command line runs
SMALL_CONFIG = """\
# 5 m plot with light Monte Carlo settings
domain.x_max = 5
domain.y_max = 5
domain.grid = 8
theta.rho = 1.5
theta.lambda = 1
theta.mu = 0.3
theta.sigma = 0.1
metrics.mc_samples = 1000
metrics.points_per_disk = 64
metrics.samples_per_cell = 10
prior.mu_mean = 0.3
prior.mu_sd = 0.2
prior.mu_high = 1
calib.J = 2
calib.m_star = 2
calib.K = 2
calib.iterations = 10
calib.adapt_iterations = 0
calib.predictive = 1
output.svg = 0
"""


def small_config(**overrides):
    return ConfigFile.loads(SMALL_CONFIG).with_overrides(**overrides)


def run_cli(*argv):
    """Returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


#
# shared helpers
#


@test
def formats_chosen_by_extension():
    with Check() as check:
        check.true(format_for('plots/obs_1.CSV', (DiskFile, RasterFile)) is DiskFile)
        check.true(format_for('obs.pgm', (DiskFile, RasterFile)) is RasterFile)
        check.true(format_for('obs.txt', (DiskFile, RasterFile)) is None)


@test
def no_negative_zero():
    assert_equal(fmt_float(-1e-9), '0.000000')
    assert_equal(fmt_float(-1.5, 2), '-1.50')


#
# disks
#


@test
def disks_with_header():
    text = ("# fuelgen disks domain=0,0,5,4 d=8\n"
            "x,y,r\n"
            "1.0,2.0,0.5\n"
            "\n"
            "4.5,3.5,0.25\n")
    layout = DiskFile.loads(text)

    assert_equal(layout.domain, Domain(0, 0, 5, 4, 8))
    assert_equal(layout.n, 2)
    assert_true(np.array_equal(layout.radii, [0.5, 0.25]))


@test
def disks_without_header_use_default_domain():
    text = "x, y, r\n1,1,0.5\n"
    assert_equal(DiskFile.loads(text).domain, Domain())

    small = Domain(0, 0, 5, 5, 8)
    assert_equal(DiskFile.loads(text, default_domain=small).domain, small)


@test
def disk_file_text():
    text = DiskFile.format(disks([(1, 2)], [0.5]))
    assert_equal(text, "# fuelgen disks domain=0.0,0.0,15.0,15.0 d=32\nx,y,r\n"
                       "1.000000,2.000000,0.500000\n")
    assert_equal(DiskFile.loads(text), disks([(1, 2)], [0.5]))


@test
def empty_disk_file():
    layout = DiskFile.loads(DiskFile.format(DiskSet(plot_domain)))
    assert_equal(layout.n, 0)


@test
def bad_disk_files():
    try:
        DiskFile.loads("x,y,r\n1,1,0.5\n1,1\n")
    except ParseException as e:
        assert_equal(e.lineno, 3)
    else:
        raise AssertionError("expected ParseException")

    with Check() as check:
        check.raises(ParseException, DiskFile.loads, "a,b,c\n1,1,1\n")
        check.raises(ParseException, DiskFile.loads, "")
        check.raises(ParseException, DiskFile.loads, "x,y,r\n1,one,1\n")
        check.raises(ValidationException, DiskFile.loads, "x,y,r\n1,1,0\n")
        check.raises(ValidationException, DiskFile.loads, "x,y,r\n20,1,1\n")


@test
def parse_errors_carry_the_path():
    with TempDir() as tmp:
        path = tmp.write('bad.csv', "x,y,r\n1,1,x\n")
        try:
            DiskFile.load(path)
        except ParseException as e:
            assert_equal((e.path, e.lineno), (path, 2))
            assert_in('bad.csv:2', str(e))
        else:
            raise AssertionError("expected ParseException")


@test
def unreadable_inputs_are_input_errors():
    with TempDir() as tmp:
        binary = tmp.join('binary.csv')
        with open(binary, 'wb') as f:
            f.write(b'\xff\xfe\x00x,y,r\n')

        with Check() as check:
            check.raises(InputError, DiskFile.load, tmp.join('missing.csv'))
            check.raises(InputError, DiskFile.load, tmp.path)
            check.raises(InputError, ConfigFile.load, tmp.join('missing.cfg'))
            check.raises(ParseException, DiskFile.load, binary)


#
# rasters
#


@test
def raster_file_is_north_up():
    bits = np.zeros((2, 3), dtype=bool)
    bits[0, 0] = True  # south-west corner
    raster = BinaryRaster(Domain(0, 0, 3, 2), 1.0, bits)

    text = RasterFile.format(raster)
    lines = text.splitlines()
    assert_equal(lines[0], 'P2')
    assert_equal(lines[2:], ['3 2', '1', '0 0 0', '1 0 0'])
    assert_equal(RasterFile.loads(text), raster)


@test
def raster_without_georeference():
    raster = RasterFile.loads("P2\n2 1\n255\n255 0\n")
    assert_equal(raster.domain.extent, (0.0, 0.0, 2.0, 1.0))
    assert_true(np.array_equal(raster.bits, [[True, False]]))


@test
def headers_keep_projected_coordinates():
    utm = Domain(500000.25, 4100000.25, 500015.25, 4100015.25)

    layout = disks([(500007.5, 4100007.5)], [0.5], utm)
    text = DiskFile.format(layout)
    assert_in("domain=500000.25,4100000.25,500015.25,4100015.25 d=32", text)
    assert_equal(DiskFile.loads(text), layout)

    bits = np.zeros((30, 30), dtype=bool)
    bits[14:16, 14:16] = True
    raster = BinaryRaster(utm, 0.5, bits)
    back = RasterFile.loads(RasterFile.format(raster))
    assert_equal(back, raster)
    assert_equal(back.domain.extent, utm.extent)
    assert_equal(back.origin, (500000.25, 4100000.25))


@test
def bad_rasters():
    with Check() as check:
        check.raises(ParseException, RasterFile.loads, "P5\n1 1\n1\n0\n")
        check.raises(ParseException, RasterFile.loads, "P2\n2 2\n1\n0 1 1\n")
        check.raises(ParseException, RasterFile.loads, "P2\n2\n")
        check.raises(ValidationException, RasterFile.loads, "P2\n2 1\n1\n0 3\n")


#
# covariate grids
#


@test
def ascii_grid_scaling_and_nodata():
    text = ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
            "nodata_value -9999\nscale_min 0\nscale_max 40\n"
            "0 40\n-9999 20\n")
    grid = AsciiGridFile.loads(text)

    assert_true(np.allclose(grid.values, [[-1, 1], [0, 0]]))
    assert_equal(grid.origin, (0.0, 0.0))
    assert_equal(grid.cellsize, 1.0)


@test
def bad_ascii_grids():
    header = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
    with Check() as check:
        check.raises(ValidationException, AsciiGridFile.loads, header + "0 0.5\n2 0\n")
        check.raises(ValidationException, AsciiGridFile.loads, header + "0 0.5\n")
        check.raises(ValidationException, AsciiGridFile.loads,
                     header + "scale_min 0\n0 0.5\n0 0\n")
        check.raises(ParseException, AsciiGridFile.loads, header + "0 0.5\n0\n")
        check.raises(ParseException, AsciiGridFile.loads, "ncols 2\nrows 2\n")

    try:
        AsciiGridFile.loads(header + "0 0.5\n0\n")
    except ParseException as e:
        assert_equal(e.lineno, 7)


#
# metrics, chains and covariances
#


@test
def metrics_file_keeps_flags():
    rows = [('a.csv', metrics_with({'ncc': 3.0}, flags=['moran_i', 'geary_c'])),
            ('b.pgm', metrics_with(flags=DISK_ONLY_METRICS))]
    text = MetricsFile.format(rows)

    assert_true(text.splitlines()[0].startswith('layout,area,perimeter,ncc,holes,moran_i'))
    assert_true(text.splitlines()[1].endswith(',moran_i;geary_c'))
    assert_equal(MetricsFile.loads(text), rows)


@test
def bad_metrics_files():
    header = MetricsFile.format([]).strip()
    with Check() as check:
        check.raises(ParseException, MetricsFile.loads, "layout,area\nx,1\n")
        check.raises(ParseException, MetricsFile.loads, header + "\nx,1,2\n")
        check.raises(ValidationException, MetricsFile.loads,
                     header + "\nx" + ",0" * 13 + ",bogus\n")


def _samples():
    thetas = np.array([[3, 2, 0.5, 0.2], [3.5, 2, 0.5, 0.2], [3.5, 2, 0.5, 0.2]])
    return PosteriorSamples(thetas, np.array([-1.5, -1.25, -1.25]),
                            np.array([True, True, False]), 0, (0.1,) * 4, 0)


@test
def chain_file_rows():
    text = ChainFile.format(_samples())
    lines = text.splitlines()
    assert_equal(lines[0], 'iter,rho,lambda,mu,sigma,loglik,accepted')
    assert_equal(lines[1], '0,3,2,0.5,0.2,-1.5,1')
    assert_equal(lines[3], '2,3.5,2,0.5,0.2,-1.25,0')

    chain = ChainFile.loads(text)
    assert_equal(chain.n, 3)
    assert_true(np.array_equal(chain.thetas, _samples().thetas))
    assert_true(np.array_equal(chain.accepted, [True, True, False]))

    with Check() as check:
        check.raises(ParseException, ChainFile.loads, lines[0] + "\n0,1,1,1,1,0,yes\n")
        check.raises(ParseException, ChainFile.loads, "iter,rho\n")


@test
def covariance_file_provenance():
    cov = MetricsCovariance([[0.5, 0.1], [0.1, 2.0]], names=('area', 'ncc'), m=3, m_star=2,
                            K=4, shrinkage=0.25, floored=('ncc',))
    text = CovarianceFile.format(cov)
    assert_true(text.startswith('# fuelgen covariance m=3 m_star=2 K=4 shrinkage=0.25 floored=ncc'))

    back = CovarianceFile.loads(text)
    assert_equal(back.names, ('area', 'ncc'))
    assert_true(np.array_equal(back.matrix, cov.matrix))
    assert_equal((back.m, back.m_star, back.K, back.shrinkage, back.floored),
                 (3, 2, 4, 0.25, ('ncc',)))
    assert_equal(CovarianceFile.loads(CovarianceFile.format(cov._replace(floored=()))).floored, ())

    with Check() as check:
        check.raises(ValidationException, CovarianceFile.loads, "area,ncc\n1,0\n")
        check.raises(ValidationException, CovarianceFile.loads, "area,bogus\n1,0\n0,1\n")
        check.raises(ParseException, CovarianceFile.loads, "# nothing\n")


@test
def summary_outputs():
    summary = dict((name, ParameterSummary(1.0, 1.1, 0.5, 1.5)) for name in Theta.names)
    ratios = dict.fromkeys(Theta.names, 0.25)

    report = SummaryReport.format(summary, samples=_samples(), ratios=ratios, burn_in=0.5)
    assert_in('acceptance rate:  0.6667', report)
    assert_equal(len([l for l in report.splitlines() if l.startswith(('rho', 'lambda'))]), 2)

    rows = SummaryCsv.format(summary, ratios).splitlines()
    assert_equal(rows[0], 'parameter,mode,mean,lower,upper,width_ratio')
    assert_equal(rows[2], 'lambda,1,1.1,0.5,1.5,0.25')


#
# point clouds
#


@test
def point_cloud_text():
    cloud = PointCloudFile.loads("# scan 1\n1 2 0.5\n\n3.5  4 1.25\n").points
    assert_true(np.array_equal(cloud, [[1, 2, 0.5], [3.5, 4, 1.25]]))
    assert_equal(PointCloudFile.loads("").points.shape, (0, 3))


@test
def bad_point_clouds():
    for text, lineno in (("1 2 3\n1 2\n", 2), ("# x\n\n1 2 nan\n", 3), ("1 2 z\n", 1)):
        try:
            PointCloudFile.loads(text)
        except ParseException as e:
            assert_equal(e.lineno, lineno)
        else:
            raise AssertionError("expected ParseException for %r" % text)


#
# configuration
#


@test
def config_parsing():
    config = ConfigFile.loads("theta.lambda = 0\ndomain.grid = auto  # from the prior\n"
                              "\nworkers = 2\nmetrics.include = ncc, area\n")
    assert_equal(config['theta.lambda'], 0.0)
    assert_is_none(config['domain.grid'])
    assert_equal(config['workers'], 2)
    assert_equal(config.include, ('ncc', 'area'))
    assert_equal(config.calib_config().include, ('area', 'ncc'))
    assert_equal(config['calib.J'], 25)


@test
def config_errors_name_the_key():
    cases = (("theta.rho = abc\n", 'theta.rho'),
             ("theta.rho = -1\n", 'theta.rho'),
             ("bogus.key = 1\n", 'bogus.key'),
             ("metrics.adjacency = hex\n", 'metrics.adjacency'),
             ("domain.x_min = 20\n", 'domain.x_min'),
             ("metrics.include = area, bogus\n", 'metrics.include'),
             ("covariates.files = slope.asc\n", 'covariates.beta'))
    for text, key in cases:
        try:
            ConfigFile.loads(text)
        except ValidationException as e:
            assert_equal(e.key, key)
        else:
            raise AssertionError("expected ValidationException for %r" % text)

    with Check() as check:
        check.raises(ParseException, ConfigFile.loads, "theta.rho 3\n")
        check.raises(ParseException, ConfigFile.loads, "seed = 1\nseed = 2\n")


@test
def config_text_round_trip():
    config = small_config(seed=7)
    assert_equal(ConfigFile.loads(ConfigFile.format(config)).values, config.values)


@test
def default_config_validates():
    config = RunConfig()
    config.validate()

    assert_equal(config.covariate_files, [])
    assert_equal(config.include, METRIC_NAMES)
    assert_equal(ConfigFile.loads(ConfigFile.format(config)).values, config.values)
    assert_equal(RunConfig({'covariates.files': '', 'metrics.include': ''}).values,
                 config.values)


@test
def config_derived_settings():
    config = RunConfig()
    assert_equal(config.domain(), Domain(0, 0, 15, 15, 32))
    assert_equal(config.domain(rho_min=0.5).d, 60)
    assert_equal(config.theta(), Theta(3, 2, 0.5, 0.2))
    assert_equal(config.priors(config.domain(), lambda_hat=2.0).lam_max, 8.0)
    assert_equal(config.with_overrides(calib__J=3)['calib.J'], 3)

    small = small_config()
    assert_equal(small.domain(), Domain(0, 0, 5, 5, 8))
    assert_equal(small.calib_config().metrics.mc_samples, 1000)
    assert_equal(small.grid_spec().cell_size, 1.0)


#
# figures
#


@test
def svg_figure():
    stamp = datetime(2020, 1, 1, tzinfo=timezone.utc)
    svg = SvgFigure.format(two_unit_disks(), title='pair', timestamp=stamp)

    assert_true(svg.startswith('<?xml'))
    assert_equal(svg.count('<circle'), 2)
    assert_in('<circle cx="290.000" cy="310.000" r="40.000"/>', svg)
    assert_in('pair: fuelgen layout, 2 disks, generated 2020-01-01T00:00:00+00:00', svg)
    assert_false('<image' in svg)

    with_underlay = SvgFigure.format(two_unit_disks(), underlay=np.zeros((4, 4)), timestamp=stamp)
    assert_in('<image', with_underlay)


@test
def underlay_is_png():
    png = underlay_png(np.linspace(-1, 1, 16).reshape(4, 4))
    assert_true(png.startswith(b'\x89PNG'))


#
# clients
#


@test
def client_loggers_are_numbered():
    with Generator(debug_logging=False) as gen, Ingestor(debug_logging=False) as ing:
        assert_true(re.match(r'^fuelgen\.Generator\d+$', gen.logger.name))
        assert_true(re.match(r'^fuelgen\.Ingestor\d+$', ing.logger.name))
        assert_true(gen.logger.name != ing.logger.name)


@test
def generator_results_ignore_worker_count():
    config = small_config()
    with Generator(debug_logging=False, config=config) as one, \
            Generator(debug_logging=False, config=config, workers=3) as three:
        assert_equal(one.generate(count=3, seed=5), three.generate(count=3, seed=5))
        assert_equal(three.session.workers, 3)


@test
def generator_metrics_by_layout_kind():
    with Generator(debug_logging=False, config=small_config()) as gen:
        layout, = gen.generate(count=1, seed=2)
        assert_equal(layout.domain, Domain(0, 0, 5, 5, 8))

        raster = gen.rasterize(layout)
        assert_equal(raster.shape, (100, 100))

        assert_true(set(DISK_ONLY_METRICS) <= gen.metrics(raster).flags)
        assert_equal(gen.metrics(layout, seed=1)['ncc'], gen.metrics(layout, seed=1)['ncc'])


@test
def prior_layouts():
    with Generator(debug_logging=False, config=small_config(prior__lam_max=2)) as gen:
        drawn = gen.from_prior(count=2, seed=3)
        assert_equal(len(drawn), 2)
        for theta, layout in drawn:
            assert_true(1 / 3.0 <= theta.rho <= 10 / 3.0)
            assert_true(0 <= theta.lam <= 2)


@test
def calibrator_observes_both_kinds():
    config = small_config()
    with Generator(debug_logging=False, config=config) as gen:
        layout, = gen.generate(count=1, seed=4)
        raster = gen.rasterize(layout)

    with Calibrator(debug_logging=False, config=config) as cal:
        y_obs = cal.observe([layout, raster], seed=1)
        assert_equal(len(y_obs), 2)
        assert_false(y_obs[0].flags & set(DISK_ONLY_METRICS))
        assert_true(set(DISK_ONLY_METRICS) <= y_obs[1].flags)
        assert_raises(InputError, cal.calibrate, [])


@test
def ingestor_turns_clusters_into_disks():
    centers = [(2, 2), (2, 12), (7.5, 7.5), (12, 3), (12, 12)]
    cloud = clustered_cloud(centers, 0.3, 100, seed=4)
    high = np.array([[7.5, 7.5, 5.0], [1.0, 1.0, 0.01]])
    config = RunConfig().with_overrides(ingest__max_components=10)

    with Ingestor(debug_logging=False, config=config) as ing:
        result = ing.ingest(np.vstack([cloud, high]), seed=1)

    assert_equal(result.n_points, 502)
    assert_equal(result.n_clipped, 2)
    assert_equal(result.n_dropped, 0)
    assert_equal(result.disks.n, len(result.components))
    assert_equal(result.disks.n, 5)


@test
def ingestor_rejects_empty_band():
    with Ingestor(debug_logging=False) as ing:
        assert_raises(InputError, ing.ingest, np.array([[1.0, 1.0, 10.0]]), 0)


#
# command line
#


@test
def cli_generate_is_seeded():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        for out in ('a', 'b'):
            code, stdout, _ = run_cli('generate', '--config', cfg, '--count', '2', '--seed', '3',
                                      '--out', tmp.join(out), '--quiet')
            assert_equal(code, cli.EXIT_OK)
            assert_equal(len(stdout.splitlines()), 2)

        for name in ('layout_000.csv', 'layout_001.csv'):
            assert_equal(tmp.read(os.path.join('a', name)), tmp.read(os.path.join('b', name)))
        assert_true(os.path.exists(tmp.join('a', 'layout_000.pgm')))
        assert_false(os.path.exists(tmp.join('a', 'layout_000.svg')))


@test
def cli_zero_intensity_gives_empty_layouts():
    with TempDir() as tmp:
        cfg = tmp.write('empty.cfg', SMALL_CONFIG.replace('theta.lambda = 1', 'theta.lambda = 0'))
        code, stdout, _ = run_cli('generate', '--config', cfg, '--count', '3', '--seed', '1',
                                  '--out', tmp.path, '--quiet')

        assert_equal(code, cli.EXIT_OK)
        for i in range(3):
            path = tmp.join('layout_%03d.csv' % i)
            assert_equal(DiskFile.load(path).n, 0)
        assert_in('layout_000.csv: 0 disks', stdout)


@test
def cli_prints_drawn_seeds():
    with TempDir() as tmp, patch.dict(os.environ):
        os.environ.pop('FUELGEN_SEED', None)
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        code, stdout, _ = run_cli('generate', '--config', cfg, '--out', tmp.path, '--quiet')

        assert_equal(code, cli.EXIT_OK)
        assert_true(re.match(r'^seed: \d+$', stdout.splitlines()[0]))


@test
def cli_metrics_of_raster_flags_disk_entries():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        run_cli('generate', '--config', cfg, '--seed', '2', '--out', tmp.path, '--quiet')

        code, _, _ = run_cli('metrics', '--config', cfg, '--seed', '1',
                             '--in', tmp.join('layout_000.csv'), tmp.join('layout_000.pgm'),
                             '--out', tmp.join('metrics.csv'), '--quiet')
        assert_equal(code, cli.EXIT_OK)

        (disk_label, from_disks), (raster_label, from_raster) = \
            MetricsFile.load(tmp.join('metrics.csv'))
        assert_equal((disk_label, raster_label), ('layout_000.csv', 'layout_000.pgm'))
        assert_false(from_disks.flags & set(DISK_ONLY_METRICS))
        assert_true(set(DISK_ONLY_METRICS) <= from_raster.flags)


@test
def cli_metrics_and_ingest_repeat_byte_for_byte():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG + "ingest.max_components = 4\n")
        run_cli('generate', '--config', cfg, '--seed', '2', '--out', tmp.path, '--quiet')
        cloud = clustered_cloud([(1.5, 1.5), (3.5, 3.5)], 0.2, 60, seed=5)
        tmp.write('scan.xyz', ''.join('%.6f %.6f %.6f\n' % tuple(p) for p in cloud))

        for out in ('a', 'b'):
            os.mkdir(tmp.join(out))
            code, _, _ = run_cli('metrics', '--config', cfg, '--seed', '4',
                                 '--in', tmp.join('layout_000.csv'), tmp.join('layout_000.pgm'),
                                 '--out', tmp.join(out, 'metrics.csv'), '--quiet')
            assert_equal(code, cli.EXIT_OK)
            code, _, _ = run_cli('ingest', '--config', cfg, '--seed', '4',
                                 '--pointcloud', tmp.join('scan.xyz'),
                                 '--out', tmp.join(out, 'disks.csv'), '--quiet')
            assert_equal(code, cli.EXIT_OK)

        for name in ('metrics.csv', 'disks.csv'):
            assert_equal(tmp.read(os.path.join('a', name)), tmp.read(os.path.join('b', name)))
        assert_true(DiskFile.load(tmp.join('a', 'disks.csv')).n >= 1)


@test
def cli_render_with_covariates():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        run_cli('generate', '--config', cfg, '--seed', '2', '--out', tmp.path, '--quiet')
        grid = tmp.write('slope.asc', "ncols 5\nnrows 5\nxllcorner 0\nyllcorner 0\ncellsize 1\n" +
                         "0.5 0.5 0.5 0.5 0.5\n" * 5)

        code, _, _ = run_cli('render', '--config', cfg, '--in', tmp.join('layout_000.csv'),
                             '--covariates', grid, '--out', tmp.join('fig.svg'), '--quiet')
        assert_equal(code, cli.EXIT_OK)
        assert_in('<image', tmp.read('fig.svg'))

        code, _, _ = run_cli('render', '--config', cfg, '--in', tmp.join('layout_000.pgm'),
                             '--out', tmp.join('raster.svg'), '--quiet')
        assert_equal(code, cli.EXIT_INPUT)


@test
def cli_exit_codes():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        bad_cfg = tmp.write('bad.cfg', "theta.rho = -2\n")
        empty = tmp.write('empty.xyz', "# no returns\n")
        blocker = tmp.write('blocker', "")
        os.mkdir(tmp.join('no_layouts'))
        run_cli('generate', '--config', cfg, '--seed', '2', '--out', tmp.path, '--quiet')

        with Check() as check:
            # bad or missing inputs
            check.equal(run_cli('metrics', '--in', tmp.join('layout.json'),
                                '--out', tmp.join('m.csv'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('generate', '--config', bad_cfg, '--out', tmp.path,
                                '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('generate', '--config', tmp.join('missing.cfg'),
                                '--out', tmp.path, '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('ingest', '--pointcloud', empty, '--seed', '1',
                                '--out', tmp.join('d.csv'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('ingest', '--pointcloud', tmp.join('missing.xyz'),
                                '--out', tmp.join('d.csv'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('metrics', '--config', cfg, '--in', tmp.join('missing.csv'),
                                '--out', tmp.join('m.csv'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('render', '--config', cfg, '--in', tmp.join('layout_000.csv'),
                                '--covariates', tmp.join('missing.asc'),
                                '--out', tmp.join('fig.svg'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('calibrate', '--config', cfg, '--obs', tmp.join('nothing'),
                                '--out', tmp.join('calib'), '--quiet')[0], cli.EXIT_INPUT)
            check.equal(run_cli('calibrate', '--config', cfg, '--obs', tmp.join('no_layouts'),
                                '--out', tmp.join('calib'), '--quiet')[0], cli.EXIT_INPUT)

            # outputs that cannot be written
            check.equal(run_cli('generate', '--config', cfg, '--seed', '1',
                                '--out', os.path.join(blocker, 'sub'), '--quiet')[0], cli.EXIT_IO)
            check.equal(run_cli('metrics', '--config', cfg, '--seed', '1',
                                '--in', tmp.join('layout_000.csv'),
                                '--out', os.path.join(blocker, 'm.csv'), '--quiet')[0],
                        cli.EXIT_IO)


@test
def observations_are_one_file_per_layout():
    with TempDir() as tmp:
        for name in ('layout_000.csv', 'layout_000.pgm', 'layout_001.PGM', 'notes.txt'):
            tmp.write(name, "")

        assert_equal(cli._observation_paths(tmp.path),
                     [tmp.join('layout_000.csv'), tmp.join('layout_001.PGM')])
        assert_equal(cli._observation_paths(tmp.join('layout_000.pgm')),
                     [tmp.join('layout_000.pgm')])
        assert_raises(InputError, cli._observation_paths, tmp.join('missing'))


@test
def cli_calibrates_against_rasters_alone():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        obs = tmp.join('obs')
        run_cli('generate', '--config', cfg, '--count', '2', '--seed', '8', '--out', obs,
                '--quiet')
        for i in range(2):
            os.remove(os.path.join(obs, 'layout_%03d.csv' % i))

        code, _, stderr = run_cli('calibrate', '--config', cfg, '--obs', obs, '--seed', '1',
                                  '--iters', '10', '--out', tmp.join('calib'), '--quiet')
        assert_equal(code, cli.EXIT_OK, stderr)

        cov = CovarianceFile.load(tmp.join('calib', 'covariance.csv'))
        assert_equal((cov.m, cov.m_star, cov.K), (2, 2, 2))
        assert_true(np.all(np.linalg.eigvalsh(cov.matrix) > 0))


@test
def cli_calibrate_smoke():
    with TempDir() as tmp:
        cfg = tmp.write('small.cfg', SMALL_CONFIG)
        obs = tmp.join('obs')
        run_cli('generate', '--config', cfg, '--count', '2', '--seed', '8', '--out', obs,
                '--quiet')

        code, stdout, _ = run_cli('calibrate', '--config', cfg, '--obs', obs, '--seed', '1',
                                  '--iters', '10', '--out', tmp.join('calib'), '--quiet')
        assert_equal(code, cli.EXIT_OK)
        assert_in('10 iterations', stdout)

        chain = ChainFile.load(tmp.join('calib', 'chain.csv'))
        assert_equal(chain.n, 10)
        assert_true(np.all(chain.thetas > 0))

        cov = CovarianceFile.load(tmp.join('calib', 'covariance.csv'))
        assert_equal(cov.m, 2)
        assert_true(np.all(np.linalg.eigvalsh(cov.matrix) > 0))

        assert_in('too few draws', tmp.read(os.path.join('calib', 'summary.txt')))
        assert_true(os.path.exists(tmp.join('calib', 'predictive_000.svg')))

        code, _, _ = run_cli('calibrate', '--config', cfg, '--obs', obs, '--seed', '1',
                             '--iters', '10', '--covariance', tmp.join('calib', 'covariance.csv'),
                             '--out', tmp.join('again'), '--quiet')
        assert_equal(code, cli.EXIT_OK)
        assert_equal(tmp.read(os.path.join('calib', 'chain.csv')),
                     tmp.read(os.path.join('again', 'chain.csv')))
