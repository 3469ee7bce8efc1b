"""Exception types shared across the toolkit."""


class HsindtError(Exception):
    """Base class for all toolkit errors."""


class EnviFormatError(HsindtError, ValueError):
    """Malformed or unsupported ENVI header/binary pair."""


class ShapeMismatchError(HsindtError, ValueError):
    """Operands whose spatial/spectral dimensions disagree."""


class DegenerateInputError(HsindtError, ValueError):
    """Statistics requested on constant or otherwise degenerate data."""


class PipelineConfigError(HsindtError, ValueError):
    """Pipeline configuration rejected at parse time."""
