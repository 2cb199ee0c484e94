"""
Exceptions raised by the library. Each one also derives from the builtin
a caller would naturally catch, so `except ValueError` keeps working.
"""


class RndaError(Exception):
    '''Base class for everything raised on purpose by `rnda`'''


class DomainError(RndaError, ValueError):
    '''An argument lies outside the domain of the function'''


class DivergentIntegralError(DomainError):
    '''The radial integral of a generator function does not converge'''


class ParameterError(RndaError, ValueError):
    '''Series or sampler parameters that cannot be used'''


class DimensionError(RndaError, ValueError):
    '''Shapes that do not conform'''


class ValidationError(RndaError, ValueError):
    '''
    Malformed input document.

    Parameters
    ----------
    message : str
        what went wrong
    field : str or None
        the offending field of the input document
    '''

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UnsupportedAlgebraError(RndaError, NotImplementedError):
    '''Linear algebra over an algebra we cannot handle (octonions)'''


class ConvergenceError(RndaError, RuntimeError):
    '''
    A partition series did not meet its tolerance before `max_degree`.
    The `report` attribute holds the `ConvergenceReport` of the attempt.
    '''

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
