"""Exception types shared across the simulator stack."""


class AeronavError(Exception):
    """Base class for all library errors."""


class OutOfExtent(AeronavError):
    """A coordinate fell outside the scene (or padded map) bounds."""


class InvalidParams(AeronavError):
    """Generator or configuration parameters violate a minimum."""


class NotFound(AeronavError):
    """Lookup by name or id matched nothing."""


class Ambiguous(AeronavError):
    """Lookup matched more than one candidate with equal score."""


class NoValidStart(AeronavError):
    """Start sampling could not place a pose inside the scene."""


class SessionDone(AeronavError):
    """An action was applied to a finished session."""


class NoLandmarkFound(AeronavError):
    """A description references no landmark present in the scene."""


class Unreachable(AeronavError):
    """The planner exceeded its step budget before reaching the goal."""


class DivergenceDetected(AeronavError):
    """Replay produced a pose that differs from the recorded one."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"replay diverged from log at pose index {index}")


class TooFewScenes(AeronavError):
    """Split construction needs more scenes than were provided."""


class UnknownEpisode(AeronavError):
    """A trajectory log references an episode id that is not in the index."""


class LengthMismatch(AeronavError):
    """A trajectory log's pose and action sequences have inconsistent lengths."""
