"""Exception hierarchy shared by every module."""


class MahlerError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(MahlerError, ValueError):
    pass


class ParseError(InvalidInput):
    pass


class LevelExhausted(MahlerError):
    """Child generation was requested for a factorization of alpha itself."""


class CapacityExceeded(MahlerError):
    pass


class AlphaMismatch(MahlerError):
    pass


class NotFound(MahlerError, LookupError):
    """No homomorphism exists between two factorization trees."""
