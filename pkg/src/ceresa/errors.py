"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class CeresaError(Exception):
    """Base class for all package errors."""


class DomainError(CeresaError, ValueError):
    """An argument lies outside the domain an operation supports."""


class DivergenceError(DomainError):
    """A hypergeometric series was asked for at a divergent parameter set."""


class NotPrime(DomainError):
    pass


class WrongResidueClass(DomainError):
    pass


class KOutOfRange(DomainError):
    pass


class IndexSetError(DomainError, IndexError):
    """A pair (a, b) is not in the index set {a, b, a+b all nonzero mod N}."""


class PrecisionError(CeresaError):
    """The requested accuracy was not reached within the configured budget.

    ``best`` holds the tightest ball that was obtained, so callers can still
    decide whether it is good enough for them.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class InconsistencyError(CeresaError):
    """Two independent evaluation routes returned disjoint balls.

    This indicates a bug in one of the kernels, never bad user input.
    """

    def __init__(self, message: str, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second
