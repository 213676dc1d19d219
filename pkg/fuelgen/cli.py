"""The ``fuelgen`` command line.

    fuelgen generate --out layouts/ --count 5 --seed 1
    fuelgen metrics --in layouts/layout_000.csv --out metrics.csv
    fuelgen calibrate --obs layouts/ --out calib/ --iters 5000
    fuelgen ingest --pointcloud plot.xyz --out observed.csv
    fuelgen render --in observed.csv --covariates slope.asc --out observed.svg

Exit codes: 0 success, 1 input or config error (missing and unreadable inputs included),
2 error writing outputs, 3 numerical failure.
"""

import argparse
import logging
import os
import sys

from fuelgen import __version__
from fuelgen.clients import Calibrator, Generator, Ingestor
from fuelgen.core.types import DiskSet, Theta
from fuelgen.exceptions import FuelgenError, InputError, NumericalError
from fuelgen.protocol.chain import ChainFile, SummaryCsv, SummaryReport
from fuelgen.protocol.config import RunConfig
from fuelgen.protocol.disks import DiskFile
from fuelgen.protocol.metrics import MetricsFile
from fuelgen.protocol.raster import RasterFile
from fuelgen.utils import utils

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

_LAYOUT_EXTENSIONS = DiskFile.extensions + RasterFile.extensions


def _client(cls, args, config):
    return cls(debug_logging=args.debug, config=config)


def _write(fmt, obj, path, **kwargs):
    fmt.dump(obj, path, **kwargs)
    return path


def _write_text(text, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    return path


def cmd_generate(args, config, seed):
    utils.make_sure_path_exists(args.out)

    with _client(Generator, args, config) as gen:
        if args.from_prior:
            drawn = gen.from_prior(args.count, seed)
        else:
            drawn = [(None, disks) for disks in gen.generate(count=args.count, seed=seed)]

        for i, (theta, disks) in enumerate(drawn):
            base = os.path.join(args.out, 'layout_%03d' % i)
            _write(DiskFile, disks, base + '.csv')
            if config['output.raster']:
                _write(RasterFile, gen.rasterize(disks), base + '.pgm')
            if config['output.svg']:
                _write_text(gen.render(disks, title='layout %d' % i), base + '.svg')

            line = '%s.csv: %d disks' % (os.path.basename(base), disks.n)
            if theta is not None:
                line += ' at rho=%.4g lambda=%.4g mu=%.4g sigma=%.4g' % tuple(theta)
            print(line)

    return EXIT_OK


def cmd_metrics(args, config, seed):
    rows = []
    with _client(Generator, args, config) as gen:
        for i, path in enumerate(args.inputs):
            layout = gen.load_layout(path)
            rows.append((os.path.basename(path),
                         gen.metrics(layout, utils.child_seed(seed, 'layout', i))))

    _write(MetricsFile, rows, args.out)
    for label, vec in rows:
        print('%s: %s' % (label, ', '.join('%s=%.4g' % kv for kv in vec.as_dict().items()
                                           if kv[0] not in vec.flags)))
    return EXIT_OK


def _observation_paths(obs):
    """One path per observed layout; a disk CSV wins over a raster of the same stem."""
    if os.path.isfile(obs):
        return [obs]
    if not os.path.isdir(obs):
        raise InputError("no such observation file or directory: %r" % obs)

    by_stem = {}
    for name in os.listdir(obs):
        stem, ext = os.path.splitext(name)
        ext = ext.lower()
        if ext not in _LAYOUT_EXTENSIONS:
            continue
        if stem not in by_stem or _LAYOUT_EXTENSIONS.index(ext) < \
                _LAYOUT_EXTENSIONS.index(os.path.splitext(by_stem[stem])[1].lower()):
            by_stem[stem] = name

    return [os.path.join(obs, by_stem[stem]) for stem in sorted(by_stem)]


def cmd_calibrate(args, config, seed):
    paths = _observation_paths(args.obs)
    if not paths:
        raise InputError("no observation layouts (.csv or .pgm) found in %r" % args.obs)
    utils.make_sure_path_exists(args.out)

    with _client(Calibrator, args, config) as cal:
        layouts = [cal.load_layout(p) for p in paths]
        y_obs = cal.observe(layouts, utils.child_seed(seed, 'observed'))

        sigma = cal.load_covariance(args.covariance) if args.covariance else None
        samples, sigma = cal.calibrate(y_obs, seed, iterations=args.iters, sigma=sigma)

        _write(ChainFile, samples, os.path.join(args.out, 'chain.csv'))
        cal.save_covariance(sigma, os.path.join(args.out, 'covariance.csv'))

        burn_in = config['calib.burn_in']
        try:
            summary, ratios = cal.summarize(samples, y_obs, burn_in)
        except InputError as e:
            cal.logger.warning("no posterior summary: %s", e)
            summary = ratios = None

        report = os.path.join(args.out, 'summary.txt')
        if summary is not None:
            _write(SummaryReport, summary, report, samples=samples, ratios=ratios, cov=sigma,
                   burn_in=burn_in)
            _write(SummaryCsv, summary, os.path.join(args.out, 'summary.csv'), ratios=ratios)
        else:
            _write_text('fuelgen calibration summary\n\niterations: %d\nacceptance rate: %.4f\n'
                        'too few draws after burn-in to summarize\n'
                        % (samples.n, samples.acceptance_rate), report)

        predictive = cal.predictive(samples, seed=seed, burn_in=burn_in)

    with _client(Generator, args, config) as gen:
        for i, (theta, disks) in enumerate(predictive):
            path = os.path.join(args.out, 'predictive_%03d.svg' % i)
            _write_text(gen.render(disks, title='posterior draw %d' % i), path)

    print('%d iterations, acceptance rate %.3f, %d failed likelihood evaluations'
          % (samples.n, samples.acceptance_rate, samples.failures))
    if summary is not None:
        for name in Theta.names:
            s = summary[name]
            print('%-7s mode %.4g  95%% [%.4g, %.4g]  width ratio %.3f'
                  % (name, s.mode, s.lower, s.upper, ratios[name]))
    return EXIT_OK


def cmd_ingest(args, config, seed):
    with _client(Ingestor, args, config) as ing:
        result = ing.ingest_file(args.pointcloud, seed)

    _write(DiskFile, result.disks, args.out)
    print('%d components, %d disks written; %d of %d points clipped; %d components dropped'
          % (len(result.components), result.disks.n, result.n_clipped, result.n_points,
             result.n_dropped))
    return EXIT_OK


def cmd_render(args, config, seed):
    if args.covariates:
        betas = args.beta or '1,' + ','.join('1' for _ in args.covariates)
        config = config.with_overrides(covariates__files=','.join(args.covariates),
                                       covariates__beta=betas)

    with _client(Generator, args, config) as gen:
        disks = gen.load_layout(args.input)
        if not isinstance(disks, DiskSet):
            raise InputError("render takes a disk CSV, not %r" % args.input)
        _write_text(gen.render(disks, title=os.path.basename(args.input)), args.out)

    print('%s: %d disks' % (args.out, disks.n))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="key = value run configuration file")
    common.add_argument('--seed', type=int,
                        help="random seed; defaults to the config's seed, then $FUELGEN_SEED,"
                             " then a fresh one, which is printed")
    common.add_argument('--workers', type=int,
                        help="worker threads; results do not depend on this")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--debug', action='store_true',
                           help="write debug logs to %s" % utils.log_filepath)
    verbosity.add_argument('--quiet', action='store_true', help="only log errors")

    parser = argparse.ArgumentParser(
        prog='fuelgen',
        description="Generate, measure and calibrate heterogeneous mid-story fuel layouts.")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('generate', parents=[common], help="draw disk layouts")
    p.add_argument('--count', type=int, default=1, help="number of layouts (default 1)")
    p.add_argument('--out', required=True, help="output directory")
    p.add_argument('--from-prior', action='store_true',
                   help="draw each layout's parameters from the prior instead of theta.*")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('metrics', parents=[common], help="compute pattern metrics")
    p.add_argument('--in', dest='inputs', nargs='+', required=True,
                   help="disk CSV or PGM raster files")
    p.add_argument('--out', required=True, help="metrics CSV")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser('calibrate', parents=[common], help="calibrate against observed layouts")
    p.add_argument('--obs', required=True,
                   help="directory of observed layouts (.csv or .pgm), or a single file")
    p.add_argument('--iters', type=int, help="iterations (default calib.iterations)")
    p.add_argument('--covariance', help="reuse a metrics covariance CSV")
    p.add_argument('--out', required=True, help="output directory")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser('ingest', parents=[common], help="turn a point cloud into disks")
    p.add_argument('--pointcloud', required=True, help="whitespace-delimited x y z file")
    p.add_argument('--out', required=True, help="disk CSV")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser('render', parents=[common], help="draw a disk layout as SVG")
    p.add_argument('--in', dest='input', required=True, help="disk CSV")
    p.add_argument('--covariates', nargs='*', default=[],
                   help="ASCII grid covariates drawn underneath")
    p.add_argument('--beta', help="comma-separated weights: field, then one per covariate")
    p.add_argument('--out', required=True, help="SVG file")
    p.set_defaults(func=cmd_render)

    return parser


def _configure_logging(args):
    if args.debug:
        return None  # the clients attach their own handlers

    handler = logging.StreamHandler()
    handler.setLevel(logging.ERROR if args.quiet else logging.WARNING)
    handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    logging.getLogger('fuelgen').addHandler(handler)
    return handler


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = _configure_logging(args)

    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
        if args.workers is not None:
            config = config.with_overrides(workers=args.workers)

        seed, drawn = utils.resolve_seed(args.seed if args.seed is not None else config['seed'])
        if drawn:
            print('seed: %d' % seed)

        return args.func(args, config, seed)

    except NumericalError as e:
        print('numerical failure: %s' % e, file=sys.stderr)
        return EXIT_NUMERICAL
    except FuelgenError as e:
        print('error: %s' % e, file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print('i/o error: %s' % e, file=sys.stderr)
        return EXIT_IO
    finally:
        if handler is not None:
            logging.getLogger('fuelgen').removeHandler(handler)


if __name__ == '__main__':
    sys.exit(main())
