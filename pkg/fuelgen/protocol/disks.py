"""DiskSet CSV files.

    # fuelgen disks domain=0.0,0.0,15.0,15.0 d=32
    x,y,r
    7.500000,7.500000,1.000000

The comment line is optional; without it the domain is supplied by the caller.
"""

from fuelgen.core.types import DiskSet, Domain
from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat, fmt_exact, fmt_float

HEADER = 'x,y,r'
_MARKER = '# fuelgen disks'


class DiskFile(FileFormat):
    extensions = ('.csv',)

    _meta_schema = {
        'type': 'object',
        'properties': {
            'domain': {'type': 'array', 'minItems': 4, 'maxItems': 4,
                       'items': {'type': 'number'}},
            'd': {'type': 'integer', 'minimum': 2},
        },
    }

    _record_schema = {
        'type': 'object',
        'additionalProperties': False,
        'properties': {
            'x': {'type': 'number', 'required': True},
            'y': {'type': 'number', 'required': True},
            'r': {'type': 'number', 'required': True,
                  'minimum': 0, 'exclusiveMinimum': True},
        },
    }

    @classmethod
    def parse(cls, text):
        meta = {}
        records = []
        seen_header = False

        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                if line.startswith(_MARKER):
                    pairs = cls._header_pairs(line[len(_MARKER):])
                    if 'domain' in pairs:
                        meta['domain'] = cls._floats(pairs['domain'].split(','), lineno, 4)
                    if 'd' in pairs:
                        try:
                            meta['d'] = int(pairs['d'])
                        except ValueError as e:
                            raise ParseException(str(e), lineno=lineno) from e
                continue
            if not seen_header:
                if line.replace(' ', '') != HEADER:
                    raise ParseException("expected header %r, found %r" % (HEADER, line),
                                         lineno=lineno)
                seen_header = True
                continue

            x, y, r = cls._floats(line.split(','), lineno, 3)
            records.append({'x': x, 'y': y, 'r': r})

        if not seen_header:
            raise ParseException("missing %r header" % HEADER)

        return meta, records

    @classmethod
    def build(cls, meta, records, domain=None, default_domain=None):
        """
        :param domain: overrides the header's domain.
        :param default_domain: used when there is no header; Domain() by default.
        """
        if domain is None:
            if 'domain' in meta:
                domain = Domain(*meta['domain'], d=meta.get('d', 32))
            else:
                domain = default_domain if default_domain is not None else Domain()

        centers = [(rec['x'], rec['y']) for rec in records]
        disks = DiskSet(domain, centers, [rec['r'] for rec in records])

        outside = (~domain.contains(disks.centers)).sum() if disks.n else 0
        if outside:
            raise ValidationException("%d disk center(s) lie outside the domain %r"
                                      % (outside, domain.extent), key='x,y')
        return disks

    @classmethod
    def format(cls, disks):
        d = disks.domain
        lines = ['%s domain=%s d=%d' % (_MARKER, ','.join(map(fmt_exact, d.extent)), d.d),
                 HEADER]
        lines.extend(','.join(fmt_float(v) for v in disk) for disk in disks.disks())
        return '\n'.join(lines) + '\n'
