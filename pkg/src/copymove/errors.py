"""Exception hierarchy shared by every module.

All data-level failures derive from :class:`CopyMoveError` so the CLI can map
them onto a single exit status.
"""


class CopyMoveError(Exception):
    """Base class for recoverable data errors."""


class MalformedImage(CopyMoveError):
    pass


class UnsupportedFormat(CopyMoveError):
    pass


class DimensionMismatch(CopyMoveError):
    pass


class ImageTooSmall(CopyMoveError):
    pass


class OffsetWouldClip(CopyMoveError):
    pass


class EmptyBand(CopyMoveError):
    pass


class NotEnoughRegions(CopyMoveError):
    pass


class GeometryViolation(CopyMoveError):
    pass


class SampleExhausted(CopyMoveError):
    pass


class LayoutError(CopyMoveError):
    pass
