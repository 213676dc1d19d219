"""BinaryRaster files as plain PGM (P2).

Occupied pixels are 1, empty 0, maxval 1. The first raster row is the
northern edge. A comment carries the georeference:

    P2
    # fuelgen raster domain=0.0,0.0,15.0,15.0 pixel=0.05 origin=0.0,0.0
    300 300
    1
"""

import numpy as np

from fuelgen.core.types import BinaryRaster, Domain
from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat, fmt_exact

_MARKER = '# fuelgen raster'


class RasterFile(FileFormat):
    extensions = ('.pgm',)

    _meta_schema = {
        'type': 'object',
        'properties': {
            'ncols': {'type': 'integer', 'minimum': 1, 'required': True},
            'nrows': {'type': 'integer', 'minimum': 1, 'required': True},
            'maxval': {'type': 'integer', 'minimum': 1, 'required': True},
            'domain': {'type': 'array', 'minItems': 4, 'maxItems': 4,
                       'items': {'type': 'number'}},
            'pixel': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True},
            'origin': {'type': 'array', 'minItems': 2, 'maxItems': 2,
                       'items': {'type': 'number'}},
        },
    }

    @classmethod
    def parse(cls, text):
        meta = {}
        tokens = []

        for lineno, line in enumerate(text.splitlines(), 1):
            if line.startswith(_MARKER):
                pairs = cls._header_pairs(line[len(_MARKER):])
                for key, count in (('domain', 4), ('origin', 2)):
                    if key in pairs:
                        meta[key] = cls._floats(pairs[key].split(','), lineno, count)
                if 'pixel' in pairs:
                    meta['pixel'] = cls._floats([pairs['pixel']], lineno, 1)[0]
            line = line.split('#', 1)[0]
            tokens.extend((tok, lineno) for tok in line.split())

        if not tokens or tokens[0][0] != 'P2':
            raise ParseException("not a plain PGM file (missing P2 magic)", lineno=1)
        if len(tokens) < 4:
            raise ParseException("truncated PGM header")

        try:
            ncols, nrows, maxval = (int(tok) for tok, _ in tokens[1:4])
        except ValueError as e:
            raise ParseException("bad PGM header: %s" % e, lineno=tokens[1][1]) from e
        meta.update(ncols=ncols, nrows=nrows, maxval=maxval)

        values = tokens[4:]
        if len(values) != ncols * nrows:
            raise ParseException("expected %d pixel values, found %d"
                                 % (ncols * nrows, len(values)))
        try:
            pixels = [int(tok) for tok, _ in values]
        except ValueError as e:
            raise ParseException(str(e), lineno=values[0][1]) from e

        return meta, pixels

    @classmethod
    def validate(cls, meta, records):
        super().validate(meta, records)
        if records and (min(records) < 0 or max(records) > meta['maxval']):
            raise ValidationException("pixel values must lie in [0, %d]" % meta['maxval'])

    @classmethod
    def build(cls, meta, records, domain=None, pixel_size=None):
        ncols, nrows = meta['ncols'], meta['nrows']

        if pixel_size is None:
            pixel_size = meta.get('pixel')
        if domain is None and 'domain' in meta:
            domain = Domain(*meta['domain'])
        if pixel_size is None and domain is not None:
            pixel_size = domain.width / ncols
        if domain is None:
            pixel_size = pixel_size or 1.0
            domain = Domain(0, 0, ncols * pixel_size, nrows * pixel_size)

        # north-up on disk, row 0 at the lowest y in memory
        values = np.array(records, dtype=int).reshape(nrows, ncols)[::-1]
        bits = values > (meta['maxval'] / 2.0)
        return BinaryRaster(domain, pixel_size, bits, origin=meta.get('origin'))

    @classmethod
    def format(cls, raster):
        nrows, ncols = raster.shape
        extent = ','.join(map(fmt_exact, raster.domain.extent))
        origin = ','.join(map(fmt_exact, raster.origin))
        lines = ['P2',
                 '%s domain=%s pixel=%s origin=%s' % (_MARKER, extent,
                                                      fmt_exact(raster.pixel_size), origin),
                 '%d %d' % (ncols, nrows),
                 '1']
        for row in raster.bits[::-1]:
            # plain PGM lines should stay under 70 characters
            cells = ['1' if b else '0' for b in row]
            for start in range(0, len(cells), 32):
                lines.append(' '.join(cells[start:start + 32]))
        return '\n'.join(lines) + '\n'
