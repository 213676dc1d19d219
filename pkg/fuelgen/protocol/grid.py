"""Covariate rasters in ESRI ASCII grid form.

    ncols 15
    nrows 15
    xllcorner 0
    yllcorner 0
    cellsize 1
    nodata_value -9999
    scale_min 0
    scale_max 40
    <nrows lines of ncols values, north row first>

``scale_min``/``scale_max`` are optional and map values affinely onto
[-1, 1]. Cells equal to ``nodata_value`` become 0, which leaves the
intensity unchanged there.
"""

from collections import namedtuple

import numpy as np

from fuelgen.exceptions import ParseException, ValidationException
from fuelgen.protocol.shared import FileFormat
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)

_INT_KEYS = ('ncols', 'nrows')
_FLOAT_KEYS = ('xllcorner', 'yllcorner', 'cellsize', 'nodata_value', 'scale_min', 'scale_max')


class AsciiGrid(namedtuple('AsciiGrid', 'values origin cellsize')):
    """Values in [-1, 1], row 0 at the north edge; ``origin`` the lower-left corner."""
    __slots__ = ()

    @classmethod
    def load(cls, path):
        return AsciiGridFile.load(path)

    __hash__ = None


class AsciiGridFile(FileFormat):
    extensions = ('.asc',)

    _meta_schema = {
        'type': 'object',
        'additionalProperties': False,
        'properties': {
            'ncols': {'type': 'integer', 'minimum': 1, 'required': True},
            'nrows': {'type': 'integer', 'minimum': 1, 'required': True},
            'xllcorner': {'type': 'number', 'required': True},
            'yllcorner': {'type': 'number', 'required': True},
            'cellsize': {'type': 'number', 'minimum': 0, 'exclusiveMinimum': True,
                         'required': True},
            'nodata_value': {'type': 'number'},
            'scale_min': {'type': 'number'},
            'scale_max': {'type': 'number'},
        },
    }

    @classmethod
    def parse(cls, text):
        meta = {}
        rows = []

        for lineno, line in enumerate(text.splitlines(), 1):
            fields = line.split()
            if not fields:
                continue

            key = fields[0].lower()
            if not rows and (key in _INT_KEYS or key in _FLOAT_KEYS):
                if len(fields) != 2:
                    raise ParseException("header line needs a key and a value", lineno=lineno)
                try:
                    meta[key] = int(fields[1]) if key in _INT_KEYS else float(fields[1])
                except ValueError as e:
                    raise ParseException(str(e), lineno=lineno) from e
                continue
            if not rows and key.isalpha():
                raise ParseException("unknown header key %r" % fields[0], lineno=lineno)

            row = cls._floats(fields, lineno, meta.get('ncols'))
            rows.append(row)

        return meta, rows

    @classmethod
    def validate(cls, meta, records):
        super().validate(meta, records)

        if len(records) != meta['nrows']:
            raise ValidationException("expected %d rows, found %d" % (meta['nrows'], len(records)),
                                      key='nrows')
        if ('scale_min' in meta) != ('scale_max' in meta):
            raise ValidationException("scale_min and scale_max must be given together",
                                      key='scale_min')
        if 'scale_min' in meta and not meta['scale_max'] > meta['scale_min']:
            raise ValidationException("scale_max must exceed scale_min", key='scale_max')

    @classmethod
    def build(cls, meta, records):
        values = np.array(records, dtype=float)

        nodata = np.zeros(values.shape, dtype=bool)
        if 'nodata_value' in meta:
            nodata = values == meta['nodata_value']
            if nodata.any():
                log.debug("%d nodata cells set to 0", np.count_nonzero(nodata))

        if 'scale_min' in meta:
            lo, hi = meta['scale_min'], meta['scale_max']
            values = 2.0 * (values - lo) / (hi - lo) - 1.0
        values[nodata] = 0.0

        if not np.all(np.isfinite(values)) or values.min() < -1 or values.max() > 1:
            raise ValidationException("covariate values must lie in [-1, 1]; found [%g, %g]"
                                      % (np.nanmin(values), np.nanmax(values)), key='values')

        values.setflags(write=False)
        return AsciiGrid(values, (meta['xllcorner'], meta['yllcorner']), meta['cellsize'])

    @classmethod
    def format(cls, grid):
        nrows, ncols = grid.values.shape
        lines = ['ncols %d' % ncols,
                 'nrows %d' % nrows,
                 'xllcorner %r' % float(grid.origin[0]),
                 'yllcorner %r' % float(grid.origin[1]),
                 'cellsize %r' % float(grid.cellsize)]
        lines.extend(' '.join('%.6g' % v for v in row) for row in grid.values)
        return '\n'.join(lines) + '\n'
