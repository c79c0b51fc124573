"""
Error hierarchy for the wild-data toolkit.

Every failure raised by the numerical pipeline derives from WildDataError,
so the command-line driver can map a whole family of problems onto one exit
code. Errors that describe a bad argument also derive from ValueError so
callers that only know the standard library still catch them.

Philosophy:
- Pure functions raise; report-producing checks return pass/fail records
- One class per kind of failure, named after what went wrong
- Messages name the offending quantity and its value
"""


class WildDataError(Exception):
    """Base class for all toolkit errors."""


class DomainError(WildDataError, ValueError):
    """An argument lies outside the domain of a formula (e.g. f0 at x >= 1)."""


class GeometryError(WildDataError, ValueError):
    """Profile pieces overlap, a bridge is not monotone, or a stitch is broken."""


class CharacteristicsError(WildDataError):
    """No characteristic foot could be bracketed or the root search stalled."""


class ShockConeError(CharacteristicsError):
    """The query point lies inside the post-collapse cone of the shock."""


class RadicandError(WildDataError, ValueError):
    """The closed-form interface branch has a nonpositive radicand."""


class ContractionError(WildDataError):
    """The Picard iteration stopped contracting or ran out of iterations."""


class ConfigError(WildDataError, ValueError):
    """A scenario file could not be parsed or failed validation."""
