# shots/exceptions.py
from __future__ import annotations


class ShotLabError(Exception):
    """
    Base for every pipeline failure.

    ``code`` is the stable identifier used in skip reports, CLI messages and
    API responses (it is simply the class name).
    """

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)

    @property
    def code(self) -> str:
        return self.__class__.__name__


# ---------- CONFIG / TYPES ----------

class ConfigInvalid(ShotLabError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(message or f"invalid value for {field}")


class InvalidSample(ShotLabError):
    pass


class InvalidParams(ShotLabError):
    pass


# ---------- INGEST ----------

class EmptyFile(ShotLabError):
    pass


class MalformedLine(ShotLabError):
    def __init__(self, line_no: int, message: str = ""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message or 'malformed row'}")


class NonMonotoneTime(ShotLabError):
    def __init__(self, line_no: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: timestamp does not increase")


class FrameDecode(ShotLabError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class TooFewSamples(ShotLabError):
    pass


class GapTooLarge(ShotLabError):
    def __init__(self, start_index: int, missing: int = 0):
        self.start_index = start_index
        self.missing = missing
        super().__init__(f"gap of {missing} slots after sample {start_index}")


class SessionTooShort(ShotLabError):
    pass


# ---------- FILTERING ----------

class LengthMismatch(ShotLabError):
    pass


class AlphaOutOfRange(ShotLabError):
    pass


# ---------- SEGMENTATION ----------

class NoImpactDetected(ShotLabError):
    pass


class PhaseOutOfBounds(ShotLabError):
    pass


# ---------- TEMPLATE / MODEL ----------

class RankDeficient(ShotLabError):
    pass


class NoSuccessfulShots(ShotLabError):
    pass


class GridMismatch(ShotLabError):
    pass


class SingleClass(ShotLabError):
    pass
