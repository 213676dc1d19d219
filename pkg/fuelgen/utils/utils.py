"""Utility functions used across fuelgen code."""

import functools
import inspect
import itertools
import logging
import numbers
import os
import secrets
import zlib

from decorator import decorator
import numpy as np

from fuelgen import __version__
from fuelgen.exceptions import ParameterError

try:
    from appdirs import user_log_dir
    _log_dir = user_log_dir('fuelgen', 'fuelgen')
except ImportError:
    print('warning: could not import appdirs; will log to the current directory')
    _log_dir = '.'

# this controls the logging setup that checks the callstack;
#  it should be monkey-patched to False after importing to disable it.
# when False, static code will simply log in the standard way under its module name.
per_client_logging = True

log_filepath = os.path.join(_log_dir, 'fuelgen.log')
printed_log_start_message = False  # global, set in configure_debug_log_handlers

_client_classes = ('Generator', 'Calibrator', 'Ingestor')


class DynamicClientLogger:
    """Dynamically proxies to the logger of a client higher in the call stack.

    Logging is per-client from a user's point of view, so static code
    (core, protocol) needs to log with the config of the calling client.
    Rather than threading a logger through every numerical routine, the
    callstack is searched at call time for a client instance.

    Work submitted to a Session's worker threads has no client on its stack;
    those records go to the module logger, which still propagates to ``fuelgen``.
    """

    def __init__(self, caller_name):
        self.caller_name = caller_name

    def __getattr__(self, name):
        logger = logging.getLogger(self.caller_name)

        if per_client_logging:
            for frame_rec in inspect.getouterframes(inspect.currentframe()):
                frame = frame_rec[0]

                try:
                    if 'self' in frame.f_locals:
                        f_self = frame.f_locals['self']

                        # can't import and check against classes; that causes an import cycle
                        if (f_self is not None and
                            type(f_self).__module__.startswith('fuelgen.clients') and
                                type(f_self).__name__ in _client_classes):
                            logger = f_self.logger
                            break
                finally:
                    del frame  # avoid circular references

        return getattr(logger, name)


log = DynamicClientLogger(__name__)


def dual_decorator(func):
    """This is a decorator that converts a paramaterized decorator for no-param use.

    source: http://stackoverflow.com/questions/3888158.
    """
    @functools.wraps(func)
    def inner(*args, **kw):
        if (len(args) == 1 and not kw and callable(args[0]) and
                not (type(args[0]) == type and issubclass(args[0], BaseException))):
            return func()(args[0])
        else:
            return func(*args, **kw)
    return inner


def _check_params(function, args, kw, names, predicate, description):
    bound = inspect.signature(function).bind(*args, **kw)
    bound.apply_defaults()

    for name in names:
        val = bound.arguments[name]
        if val is None:
            continue
        if not isinstance(val, numbers.Real) or not predicate(val):
            raise ParameterError("%s must be %s; received %r" % (name, description, val),
                                 context=function.__name__)


def require_positive(*names):
    """Verifies that the named numeric params are strictly positive.

    ``None`` is let through so optional params can default later.
    Raise ParameterError otherwise.
    """

    @decorator
    def wrapper(function, *args, **kw):
        _check_params(function, args, kw, names, lambda v: v > 0, 'positive')
        return function(*args, **kw)

    return wrapper


def require_nonnegative(*names):
    """Like :func:`require_positive`, but zero is allowed."""

    @decorator
    def wrapper(function, *args, **kw):
        _check_params(function, args, kw, names, lambda v: v >= 0, 'non-negative')
        return function(*args, **kw)

    return wrapper


@dual_decorator
def escalate(parameter='jitter', exceptions=(np.linalg.LinAlgError,),
             start=1e-8, factor=10, limit=1e-4, logger=None):
    """Retry the decorated function with a geometrically growing keyword param.

    Modeled on a retry-with-backoff: the call is first made with the given
    value of ``parameter``; on one of ``exceptions`` the value is raised to
    ``max(value * factor, start)`` until it would exceed ``limit``.
    An exception from the final attempt propagates.

    :param parameter: name of the keyword param to escalate.
    :param exceptions: exception (or tuple of exceptions) to escalate on.
    :param start: value to jump to when the caller passed zero.
    :param factor: escalation multiplier.
    :param limit: largest value that is attempted.
    :param logger: logger to use. If None, use the 'fuelgen.utils' logger.
    """

    if logger is None:
        logger = log

    @decorator
    def escalate_wrapper(f, *args, **kwargs):
        bound = inspect.signature(f).bind(*args, **kwargs)
        bound.apply_defaults()
        value = bound.arguments[parameter]

        while True:
            bound.arguments[parameter] = value
            try:
                return f(*bound.args, **bound.kwargs)
            except exceptions as e:
                nxt = max(value * factor, start)
                if nxt > limit * (1 + 1e-12):
                    raise
                logger.debug("%s failed with %s=%g (%s); retrying with %g",
                             f.__name__, parameter, value, e, nxt)
                value = nxt

    return escalate_wrapper


def make_sure_path_exists(path, mode=0o777):
    os.makedirs(path, mode, exist_ok=True)


def configure_debug_log_handlers(logger):
    """Warnings and above to stderr, below to fuelgen.log when possible.
    Output includes line number."""

    global printed_log_start_message

    logger.setLevel(logging.DEBUG)

    logging_to_file = True
    try:
        make_sure_path_exists(os.path.dirname(log_filepath), 0o700)
        debug_handler = logging.FileHandler(log_filepath, encoding='utf-8')
    except OSError:
        logging_to_file = False
        debug_handler = logging.StreamHandler()

    debug_handler.setLevel(logging.DEBUG)

    important_handler = logging.StreamHandler()
    important_handler.setLevel(logging.WARNING)

    logger.addHandler(debug_handler)
    logger.addHandler(important_handler)

    if not printed_log_start_message:
        # print out startup message without verbose formatting
        logger.info("!-- begin debug log --!")
        logger.info("version: " + __version__)
        if logging_to_file:
            logger.info("logging to: " + log_filepath)

        printed_log_start_message = True

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s (%(module)s:%(lineno)s) [%(levelname)s]: %(message)s'
    )
    debug_handler.setFormatter(formatter)
    important_handler.setFormatter(formatter)


def remove_log_handlers(logger):
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def _key_to_int(key):
    if isinstance(key, str):
        return zlib.crc32(key.encode('utf-8'))
    if isinstance(key, (bool, np.bool_)) or not isinstance(key, numbers.Integral):
        raise TypeError("substream keys must be str or int, not %r" % (key,))
    if key < 0:
        raise ValueError("substream keys must be non-negative")
    return int(key)


def child_seed(seed, *keys):
    """Return a SeedSequence for the substream of ``seed`` named by ``keys``.

    Keys are strings (hashed with crc32) or non-negative ints, so a stream
    is addressed by what it is for (eg ``('realization', 3, 'radii')``)
    rather than by the order in which streams were requested. This keeps
    results independent of how work is spread over workers.

    :param seed: an int or a SeedSequence returned by a previous call.
    """
    extra = tuple(_key_to_int(k) for k in keys)

    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + extra)

    if seed is None or isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise TypeError("seed must be an int or SeedSequence, not %r" % (seed,))

    return np.random.SeedSequence(int(seed), spawn_key=extra)


def substream(seed, *keys):
    """Return a numpy Generator for the substream named by ``keys``."""
    return np.random.default_rng(child_seed(seed, *keys))


def resolve_seed(seed=None, env_var='FUELGEN_SEED'):
    """Return (seed, was_drawn).

    Explicit seeds win, then the environment, then fresh OS entropy.
    """
    if seed is not None:
        return int(seed), False

    env_val = os.environ.get(env_var)
    if env_val not in (None, ''):
        try:
            return int(env_val), False
        except ValueError:
            raise ParameterError("%s must be an integer; received %r" % (env_var, env_val))

    return secrets.randbits(32), True


def truncate(x, max_els=8):
    """Return a shorter version of a sequence or array, useful for logging."""

    if isinstance(x, np.ndarray):
        if x.size > max_els:
            return np.array2string(x.ravel()[:max_els], precision=4) + '...(%d total)' % x.size
        return np.array2string(x, precision=4)

    is_tuple = isinstance(x, tuple) and not hasattr(x, '_fields')
    if isinstance(x, (list, tuple)) and not hasattr(x, '_fields') and len(x) > max_els:
        trunc = list(itertools.islice(x, max_els)) + ['...']
        return tuple(trunc) if is_tuple else trunc

    if isinstance(x, str) and len(x) > max_els * 10:
        return x[:max_els * 10] + '...'

    return x


# from http://stackoverflow.com/a/8101118/1231454
class DocstringInheritMeta(type):
    """A variation on
    http://groups.google.com/group/comp.lang.python/msg/26f7b4fcb4d66c95
    by Paul McGuire
    """

    def __new__(meta, name, bases, clsdict):
        if not('__doc__' in clsdict and clsdict['__doc__']):
            for mro_cls in (mro_cls for base in bases for mro_cls in base.mro()):
                doc = mro_cls.__doc__
                if doc:
                    clsdict['__doc__'] = doc
                    break
        for attr, attribute in clsdict.items():
            if not getattr(attribute, '__doc__', None) and callable(attribute):
                for mro_cls in (mro_cls for base in bases for mro_cls in base.mro()
                                if hasattr(mro_cls, attr)):
                    doc = getattr(getattr(mro_cls, attr), '__doc__')
                    if doc:
                        try:
                            attribute.__doc__ = doc
                        except AttributeError:
                            pass
                        break
        return type.__new__(meta, name, bases, clsdict)
