"""Definitions shared by multiple file formats."""

import validictory

from fuelgen.exceptions import InputError, ParseException, ValidationException
from fuelgen.utils import utils

log = utils.DynamicClientLogger(__name__)


class FileFormat:
    """
    Clients should use FileFormat.load() and FileFormat.dump().

    A format turns text into objects in three steps:
        parse: text -> (meta, records), meta a dict from the header and
          records a list of dicts, one per data line.
        validate: check meta and records against the validictory schemas
          in _meta_schema and _record_schema.
        build: (meta, records) -> the object callers want (a DiskSet, ...).

    Writing is the single step format: object -> text.

    Formats declare their file extensions, used by :func:`format_for`.
    Parse problems raise ParseException carrying the path and line number;
    schema problems raise ValidationException, and a missing or unreadable
    file raises InputError.
    """

    extensions = ()
    gets_logged = True

    # validictory schemas; None skips the check
    _meta_schema = None
    _record_schema = None

    @classmethod
    def parse(cls, text):
        """Parse text to (meta, records)."""
        raise NotImplementedError

    @classmethod
    def build(cls, meta, records, **kwargs):
        return meta, records

    @classmethod
    def format(cls, obj, **kwargs):
        """Return the text for obj."""
        raise NotImplementedError

    @classmethod
    def validate(cls, meta, records):
        """Raise ValidationException on problems."""
        if cls._meta_schema is not None:
            cls._validate_schema(meta, cls._meta_schema, 'header')

        if cls._record_schema is not None:
            for i, rec in enumerate(records):
                cls._validate_schema(rec, cls._record_schema, 'record %d' % (i + 1))

    @classmethod
    def loads(cls, text, path=None, validate=True, **kwargs):
        name = cls.__name__

        try:
            meta, records = cls.parse(text)
        except ParseException as e:
            if e.path is None and path is not None:
                raise ParseException(Exception.__str__(e), path, e.lineno) from e
            raise

        if cls.gets_logged:
            log.debug("%s: parsed %d records from %s (header %s)",
                      name, len(records), path or '<text>', utils.truncate(meta))

        if validate:
            cls.validate(meta, records)

        return cls.build(meta, records, **kwargs)

    @classmethod
    def load(cls, path, validate=True, **kwargs):
        """Read, parse, validate and build the contents of path.

        :param validate: if False, do not validate.
        kwargs are passed to build.
        """
        try:
            with open(path, encoding='utf-8') as f:
                text = f.read()
        except UnicodeDecodeError as e:
            raise ParseException("not a text file (%s)" % e.reason, path) from e
        except OSError as e:
            raise InputError("cannot read input: %s" % (e.strerror or e), context=str(path)) from e

        return cls.loads(text, path=path, validate=validate, **kwargs)

    @classmethod
    def dump(cls, obj, path, **kwargs):
        text = cls.format(obj, **kwargs)

        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)

        if cls.gets_logged:
            log.debug("%s: wrote %s (%d bytes)", cls.__name__, path, len(text))

    @staticmethod
    def _validate_schema(data, schema, where):
        try:
            validictory.validate(data, schema, required_by_default=False)
        except ValueError as e:
            raise ValidationException("%s: %s" % (where, e)) from e

    @staticmethod
    def _floats(fields, lineno, count=None):
        if count is not None and len(fields) != count:
            raise ParseException("expected %d fields, found %d" % (count, len(fields)),
                                 lineno=lineno)
        try:
            return [float(f) for f in fields]
        except ValueError as e:
            raise ParseException(str(e), lineno=lineno) from e

    @staticmethod
    def _header_pairs(comment):
        """Parse 'key=value' tokens of a comment line into a dict of strings."""
        pairs = {}
        for token in comment.split():
            if '=' in token:
                key, val = token.split('=', 1)
                pairs[key] = val
        return pairs


def format_for(path, formats):
    """Return the format in ``formats`` claiming the extension of path, or None."""
    lower = str(path).lower()
    for fmt in formats:
        if any(lower.endswith(ext) for ext in fmt.extensions):
            return fmt
    return None


def fmt_float(x, places=6):
    """Fixed-point text with no negative zero."""
    text = '%.*f' % (places, x)
    if text.startswith('-') and float(text) == 0:
        text = text[1:]
    return text


def fmt_exact(x):
    """Shortest text that reads back as the same float, with no negative zero."""
    text = repr(float(x))
    return '0.0' if text == '-0.0' else text
