"""Exception hierarchy shared by all stages.

Every stage failure derives from SeamTakeError so callers (CLI, service)
can map errors to exit codes / HTTP statuses uniformly.
"""


class SeamTakeError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class IngestionError(SeamTakeError):
    """A frame file is missing or unreadable."""

    exit_code = 2


class StructuralError(SeamTakeError):
    """Inputs have inconsistent shapes (frame sizes, counts, masks)."""

    exit_code = 3


class ModelError(SeamTakeError):
    """A geometric model could not be fit (degenerate or singular)."""

    exit_code = 4


class MatchError(SeamTakeError):
    """Block matching had no valid overlap to compare."""

    exit_code = 5


class AlignmentError(SeamTakeError):
    """Video alignment failed (bad anchor, unusable band, ...)."""

    exit_code = 6


class ConstraintConflictError(SeamTakeError):
    """A pixel is constrained to both labels at full resolution."""

    exit_code = 7


class AppearanceError(SeamTakeError):
    """Blur/color equalization could not run (e.g. no qualifying pixels)."""

    exit_code = 8


class CropError(SeamTakeError):
    """The crop rectangle collapsed to an empty region."""

    exit_code = 9


class ConfigurationError(SeamTakeError):
    """Unknown parameter name or invalid parameter value."""

    exit_code = 10


class ProjectFormatError(SeamTakeError):
    """Project file is corrupt or has an unsupported version."""

    exit_code = 11
