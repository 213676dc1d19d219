"""Custom exceptions used across the project."""


class FuelgenError(Exception):
    """Base for all fuelgen errors.

    Attributes:
        context -- optional short description of where the failure happened
    """
    def __init__(self, message, context=None):
        Exception.__init__(self, message)

        self.context = context

    def __str__(self):
        if self.context is None:
            return Exception.__str__(self)
        return "%s: %s" % (self.context, Exception.__str__(self))


class ParameterError(FuelgenError, ValueError):
    """A model parameter is outside its domain (eg a non-positive lengthscale)."""
    pass


class ValidationException(FuelgenError):
    """Thrown when a config or parsed record fails its schema.

    Attributes:
        key -- the offending config key or field, if known
    """
    def __init__(self, message, key=None):
        super().__init__(message, context=key)
        self.key = key


class ParseException(FuelgenError):
    """Thrown by the file formats on malformed input."""

    def __init__(self, message, path=None, lineno=None):
        context = None
        if path is not None:
            context = str(path) if lineno is None else "%s:%s" % (path, lineno)
        elif lineno is not None:
            context = "line %s" % lineno

        super().__init__(message, context=context)
        self.path = path
        self.lineno = lineno


class InputError(FuelgenError):
    """Inputs are structurally unusable (no observations, too few points, ...)."""
    pass


class InitializationError(FuelgenError):
    """The sampler cannot start, eg the initial state has zero prior density."""
    pass


class NumericalError(FuelgenError):
    """A numerical routine broke down, eg Cholesky failed after jitter escalation."""
    pass


class ConditioningError(NumericalError):
    def __init__(self, message, context=None):
        message += " (try raising the covariance shrinkage or adding augmentation draws)"
        super().__init__(message, context=context)


class GenerationError(FuelgenError):
    """Point placement stalled before the requested count was accepted.

    Attributes:
        acceptance_rate -- accepted / proposed at the time of failure
        proposals -- number of candidates drawn
    """
    def __init__(self, message, acceptance_rate, proposals):
        message += " (acceptance rate %.3g after %d proposals)" % (acceptance_rate, proposals)
        super().__init__(message)
        self.acceptance_rate = acceptance_rate
        self.proposals = proposals


class FuelgenWarning(UserWarning):
    pass
