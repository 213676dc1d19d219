"""SVG figures of disk layouts.

The domain is drawn as a frame with y pointing up, disks as filled
circles clipped to the frame, and optionally a covariate heat map
underneath as an embedded PNG.
"""

import base64
from datetime import datetime, timezone
import io

import numpy as np
from PIL import Image

from fuelgen.protocol.shared import FileFormat

# low and high ends of the underlay color ramp
_RAMP_LOW = np.array([246, 239, 214])
_RAMP_HIGH = np.array([74, 124, 89])


class SvgBuilder:
    """Accumulates SVG markup in a domain-to-pixel frame."""

    def __init__(self, domain, scale=40.0, margin=10.0):
        self.domain = domain
        self.scale = scale
        self.margin = margin
        self.width = domain.width * scale + 2 * margin
        self.height = domain.height * scale + 2 * margin
        self.svg = ''

    def x(self, x):
        return self.margin + (x - self.domain.x_min) * self.scale

    def y(self, y):
        return self.margin + (self.domain.y_max - y) * self.scale

    def header(self, comment=None):
        self.svg += ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
                     '<svg version="1.1" width="%.1f" height="%.1f" viewBox="0 0 %.1f %.1f" '
                     'xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink">\n'
                     % (self.width, self.height, self.width, self.height))
        if comment:
            self.svg += '<!-- %s -->\n' % comment.replace('--', '-')
        self.svg += ('<defs><clipPath id="domain"><rect x="%.3f" y="%.3f" width="%.3f" '
                     'height="%.3f"/></clipPath></defs>\n'
                     % (self.margin, self.margin, self.domain.width * self.scale,
                        self.domain.height * self.scale))

    def image(self, png_bytes):
        data = base64.b64encode(png_bytes).decode('ascii')
        self.svg += ('<image x="%.3f" y="%.3f" width="%.3f" height="%.3f" '
                     'preserveAspectRatio="none" xlink:href="data:image/png;base64,%s"/>\n'
                     % (self.margin, self.margin, self.domain.width * self.scale,
                        self.domain.height * self.scale, data))

    def group_start(self, **attrs):
        self.svg += '<g %s>\n' % ' '.join('%s="%s"' % (k.replace('_', '-'), v)
                                          for k, v in attrs.items())

    def group_end(self):
        self.svg += '</g>\n'

    def circle(self, x, y, r):
        self.svg += '<circle cx="%.3f" cy="%.3f" r="%.3f"/>\n' % (self.x(x), self.y(y),
                                                                   r * self.scale)

    def frame(self):
        self.svg += ('<rect x="%.3f" y="%.3f" width="%.3f" height="%.3f" fill="none" '
                     'stroke="black" stroke-width="1"/>\n'
                     % (self.margin, self.margin, self.domain.width * self.scale,
                        self.domain.height * self.scale))

    def get_svg(self):
        return self.svg + '</svg>\n'


def underlay_png(values, max_pixels=512):
    """PNG bytes of a (rows x cols) grid in [-1, 1], row 0 at the south edge."""
    values = np.clip(np.asarray(values, dtype=float), -1, 1)
    t = ((values + 1) / 2)[::-1, :, None]
    rgb = (_RAMP_LOW + t * (_RAMP_HIGH - _RAMP_LOW)).round().astype(np.uint8)

    img = Image.fromarray(rgb)
    factor = max(1, max_pixels // max(img.size))
    if factor > 1:
        img = img.resize((img.size[0] * factor, img.size[1] * factor), Image.Resampling.NEAREST)

    buf = io.BytesIO()
    img.save(buf, format='PNG')
    return buf.getvalue()


class SvgFigure(FileFormat):
    """Disk layout figure; write only."""
    extensions = ('.svg',)

    @classmethod
    def format(cls, disks, underlay=None, title=None, scale=40.0, timestamp=None):
        """
        :param underlay: optional (rows x cols) values in [-1, 1] on the
          domain, row 0 at the south edge, drawn beneath the disks.
        :param timestamp: datetime for the header comment; now by default.
        """
        if timestamp is None:
            timestamp = datetime.now(timezone.utc)

        svg = SvgBuilder(disks.domain, scale=scale)
        comment = 'fuelgen layout, %d disks, generated %s' % (disks.n, timestamp.isoformat())
        if title:
            comment = '%s: %s' % (title, comment)
        svg.header(comment)

        if underlay is not None:
            svg.image(underlay_png(underlay))

        svg.group_start(id='disks', fill='#2f5d3a', fill_opacity='0.85', clip_path='url(#domain)')
        for x, y, r in disks.disks():
            svg.circle(x, y, r)
        svg.group_end()
        svg.frame()

        return svg.get_svg()
