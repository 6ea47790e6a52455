"""Exception types shared by all modules."""


class GeoRoughError(Exception):
    """Base class for domain errors raised by georough."""


class InvalidInput(GeoRoughError, ValueError):
    """Rejected input: shape mismatch, wrong level 0, malformed arguments."""


class NotGroupLike(InvalidInput):
    """The element failed the group-likeness certificate."""


class Unsupported(GeoRoughError, NotImplementedError):
    """The request is outside the constructive range of the library."""
