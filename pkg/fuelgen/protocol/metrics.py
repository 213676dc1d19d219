"""Metric vectors as CSV, one row per layout.

    layout,area,perimeter,...,sigma_hat,flags
    obs_000.csv,0.412,...,0.2,moran_i;geary_c

Flagged entries are written as their imputed 0; ``flags`` lists them
separated by ';'.
"""

from fuelgen.core.types import METRIC_NAMES, MetricsVector
from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat

HEADER = ','.join(('layout',) + METRIC_NAMES + ('flags',))


class MetricsFile(FileFormat):
    extensions = ('.csv',)

    @classmethod
    def parse(cls, text):
        records = []
        lines = [(n, l.strip()) for n, l in enumerate(text.splitlines(), 1) if l.strip()]
        if not lines or lines[0][1] != HEADER:
            raise ParseException("expected the metrics header", lineno=lines[0][0] if lines else 1)

        for lineno, line in lines[1:]:
            fields = line.split(',')
            if len(fields) != len(METRIC_NAMES) + 2:
                raise ParseException("expected %d fields, found %d"
                                     % (len(METRIC_NAMES) + 2, len(fields)), lineno=lineno)
            values = cls._floats(fields[1:-1], lineno)
            flags = [f for f in fields[-1].split(';') if f]
            records.append({'layout': fields[0], 'values': values, 'flags': flags})

        return {}, records

    @classmethod
    def validate(cls, meta, records):
        for i, rec in enumerate(records):
            unknown = set(rec['flags']) - set(METRIC_NAMES)
            if unknown:
                raise ValidationException("record %d: unknown flags %s" % (i + 1, sorted(unknown)),
                                          key='flags')

    @classmethod
    def build(cls, meta, records):
        return [(rec['layout'], MetricsVector(rec['values'], rec['flags'])) for rec in records]

    @classmethod
    def format(cls, rows):
        """:param rows: iterable of (layout label, MetricsVector)."""
        lines = [HEADER]
        for label, vec in rows:
            flags = ';'.join(n for n in METRIC_NAMES if n in vec.flags)
            lines.append(','.join([str(label)] + ['%.10g' % v for v in vec.values] + [flags]))
        return '\n'.join(lines) + '\n'
