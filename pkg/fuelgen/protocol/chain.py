"""Calibration outputs: the chain, the metrics covariance and the summary report."""

import numpy as np

from fuelgen.core.calibration import MetricsCovariance, PosteriorSamples
from fuelgen.core.types import METRIC_NAMES, Theta
from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat

CHAIN_HEADER = 'iter,rho,lambda,mu,sigma,loglik,accepted'
_COV_MARKER = '# fuelgen covariance'


class ChainFile(FileFormat):
    extensions = ('.csv',)

    _record_schema = {
        'type': 'object',
        'properties': {
            'iter': {'type': 'integer', 'minimum': 0},
            'theta': {'type': 'array', 'minItems': 4, 'maxItems': 4,
                      'items': {'type': 'number'}},
            'loglik': {'type': 'number'},
            'accepted': {'type': 'boolean'},
        },
    }

    @classmethod
    def parse(cls, text):
        lines = [(n, l.strip()) for n, l in enumerate(text.splitlines(), 1) if l.strip()]
        if not lines or lines[0][1] != CHAIN_HEADER:
            raise ParseException("expected header %r" % CHAIN_HEADER, lineno=1)

        records = []
        for lineno, line in lines[1:]:
            fields = line.split(',')
            if len(fields) != 7:
                raise ParseException("expected 7 fields, found %d" % len(fields), lineno=lineno)
            try:
                it = int(fields[0])
                accepted = {'0': False, '1': True}[fields[6]]
            except (ValueError, KeyError) as e:
                raise ParseException("bad iteration or accepted field: %s" % e,
                                     lineno=lineno) from e
            vals = cls._floats(fields[1:6], lineno)
            records.append({'iter': it, 'theta': vals[:4], 'loglik': vals[4],
                            'accepted': accepted})
        return {}, records

    @classmethod
    def build(cls, meta, records):
        thetas = np.array([r['theta'] for r in records], dtype=float).reshape(-1, 4)
        loglik = np.array([r['loglik'] for r in records], dtype=float)
        accepted = np.array([r['accepted'] for r in records], dtype=bool)
        return PosteriorSamples(thetas, loglik, accepted, 0, None, None)

    @classmethod
    def format(cls, samples):
        lines = [CHAIN_HEADER]
        for i, theta, ll, acc in samples.rows():
            lines.append('%d,%s,%.10g,%d' % (i, ','.join('%.10g' % v for v in theta), ll, acc))
        return '\n'.join(lines) + '\n'


class CovarianceFile(FileFormat):
    """k x k metrics covariance with a provenance comment.

        # fuelgen covariance m=25 m_star=25 K=25 shrinkage=0 floored=-
        area,perimeter,...
        <k rows of k values>
    """
    extensions = ('.csv',)

    _meta_schema = {
        'type': 'object',
        'properties': {
            'm': {'type': 'integer', 'minimum': 0},
            'm_star': {'type': 'integer', 'minimum': 0},
            'K': {'type': 'integer', 'minimum': 0},
            'shrinkage': {'type': 'number', 'minimum': 0, 'maximum': 1},
            'floored': {'type': 'array',
                        'items': {'type': 'string', 'enum': list(METRIC_NAMES)}},
            'names': {'type': 'array', 'minItems': 1,
                      'items': {'type': 'string', 'enum': list(METRIC_NAMES)}},
        },
    }

    @classmethod
    def parse(cls, text):
        meta = {}
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(_COV_MARKER):
                pairs = cls._header_pairs(line[len(_COV_MARKER):])
                try:
                    for key in ('m', 'm_star', 'K'):
                        if key in pairs:
                            meta[key] = int(pairs[key])
                    if 'shrinkage' in pairs:
                        meta['shrinkage'] = float(pairs['shrinkage'])
                    if 'floored' in pairs:
                        meta['floored'] = [n for n in pairs['floored'].split(',')
                                           if n not in ('', '-')]
                except ValueError as e:
                    raise ParseException(str(e), lineno=lineno) from e
                continue
            if line.startswith('#'):
                continue
            if 'names' not in meta:
                meta['names'] = line.split(',')
                continue
            rows.append(cls._floats(line.split(','), lineno, len(meta['names'])))

        if 'names' not in meta:
            raise ParseException("missing metric names line")
        return meta, rows

    @classmethod
    def validate(cls, meta, records):
        super().validate(meta, records)
        if len(records) != len(meta['names']):
            raise ValidationException("expected %d rows, found %d"
                                      % (len(meta['names']), len(records)), key='names')

    @classmethod
    def build(cls, meta, records):
        return MetricsCovariance(np.array(records), meta['names'], meta.get('m', 0),
                                 meta.get('m_star', 0), meta.get('K', 0),
                                 meta.get('shrinkage', 0.0), meta.get('floored', ()))

    @classmethod
    def format(cls, cov):
        lines = ['%s m=%d m_star=%d K=%d shrinkage=%r floored=%s'
                 % (_COV_MARKER, cov.m, cov.m_star, cov.K, cov.shrinkage,
                    ','.join(cov.floored) or '-'),
                 ','.join(cov.names)]
        lines.extend(','.join('%r' % float(v) for v in row) for row in cov.matrix)
        return '\n'.join(lines) + '\n'


class SummaryReport(FileFormat):
    """Plain-text calibration report; write only."""
    extensions = ('.txt',)

    @classmethod
    def format(cls, summary, samples=None, ratios=None, cov=None, burn_in=None):
        lines = ['fuelgen calibration summary', '']
        if samples is not None:
            lines.append('iterations:       %d' % samples.n)
            lines.append('acceptance rate:  %.4f' % samples.acceptance_rate)
            lines.append('failed likelihood evaluations: %d' % samples.failures)
        if burn_in is not None:
            lines.append('burn-in fraction: %g' % burn_in)
        if cov is not None:
            lines.append('covariance: k=%d m=%d m_star=%d K=%d shrinkage=%g%s'
                         % (cov.k, cov.m, cov.m_star, cov.K, cov.shrinkage,
                            ' (floored: %s)' % ', '.join(cov.floored) if cov.floored else ''))
        lines.append('')
        lines.append('%-8s %12s %12s %12s %12s %10s'
                     % ('param', 'mode', 'mean', '2.5%', '97.5%', 'width/prior'))
        for name in Theta.names:
            s = summary[name]
            ratio = '%10.4f' % ratios[name] if ratios else '%10s' % '-'
            lines.append('%-8s %12.6g %12.6g %12.6g %12.6g %s'
                         % (name, s.mode, s.mean, s.lower, s.upper, ratio))
        return '\n'.join(lines) + '\n'


class SummaryCsv(FileFormat):
    """Per-parameter summary rows; write only."""
    extensions = ('.csv',)

    @classmethod
    def format(cls, summary, ratios=None):
        lines = ['parameter,mode,mean,lower,upper,width_ratio']
        for name in Theta.names:
            s = summary[name]
            ratio = '%.10g' % ratios[name] if ratios else ''
            lines.append('%s,%.10g,%.10g,%.10g,%.10g,%s'
                         % (name, s.mode, s.mean, s.lower, s.upper, ratio))
        return '\n'.join(lines) + '\n'
