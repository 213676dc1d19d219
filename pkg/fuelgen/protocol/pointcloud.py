"""Point clouds as whitespace-delimited ``x y z`` text; '#' starts a comment line."""

from collections import namedtuple

import numpy as np

from fuelgen.exceptions import ParseException
from fuelgen.protocol.shared import FileFormat

PointCloud = namedtuple('PointCloud', 'points')


class PointCloudFile(FileFormat):
    extensions = ('.xyz', '.txt')

    @classmethod
    def parse(cls, text):
        records = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue

            x, y, z = cls._floats(line.split(), lineno, 3)
            if not all(np.isfinite((x, y, z))):
                raise ParseException("non-finite coordinate", lineno=lineno)
            records.append((x, y, z))

        return {}, records

    @classmethod
    def build(cls, meta, records):
        return PointCloud(np.array(records, dtype=float).reshape(-1, 3))

    @classmethod
    def format(cls, points):
        return ''.join('%.4f %.4f %.4f\n' % tuple(p) for p in np.asarray(points).reshape(-1, 3))
