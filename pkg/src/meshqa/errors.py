"""Exception types shared across the package.

Every error that is part of an operation's contract has a named class here so
callers can catch precisely, and so the CLI can map them to exit codes.
"""


class MeshQAError(Exception):
    """Base class for all errors raised by this package."""


# --- asset parsing / encoding ---------------------------------------------

class MalformedStatement(MeshQAError):
    def __init__(self, line_no, text):
        super().__init__(f"line {line_no}: cannot parse {text!r}")
        self.line_no = line_no
        self.text = text


class IndexOutOfRange(MeshQAError):
    def __init__(self, line_no, text):
        super().__init__(f"line {line_no}: index out of range in {text!r}")
        self.line_no = line_no
        self.text = text


class UnsupportedFormat(MeshQAError):
    pass


class TruncatedStream(MeshQAError):
    pass


class InvalidQuality(MeshQAError):
    pass


class UnsupportedJpegFeature(MeshQAError):
    pass


# --- distortion ------------------------------------------------------------

class TargetUnreachable(MeshQAError):
    pass


class NoUVs(MeshQAError):
    pass


# --- renderer ---------------------------------------------------------------

class EmptyMesh(MeshQAError):
    pass


# --- characterization -------------------------------------------------------

class ImageTooSmall(MeshQAError):
    pass


class EmptySaliency(MeshQAError):
    pass


# --- metric ------------------------------------------------------------------

class EmptyPatchSet(MeshQAError):
    pass


class ShapeMismatch(MeshQAError):
    pass


class EmptyDataset(MeshQAError):
    pass


class NonFiniteLoss(MeshQAError):
    pass


class TooFewModels(MeshQAError):
    pass


class ManifestMismatch(MeshQAError):
    pass


class DigestMismatch(MeshQAError):
    pass


# --- statistics --------------------------------------------------------------

class NoScores(MeshQAError):
    pass


class InsufficientVotes(MeshQAError):
    pass


class MissingGoldenUnit(MeshQAError):
    pass


class DegenerateFit(MeshQAError):
    pass


class ZeroVariance(MeshQAError):
    pass


class NoSignificantPairs(MeshQAError):
    pass


class NoSimilarPairs(MeshQAError):
    pass


class IncompleteFactorial(MeshQAError):
    pass


class InfeasibleConstraints(MeshQAError):
    pass


class UnknownStimulus(MeshQAError):
    pass


# --- study service -------------------------------------------------------------

class DeviceIncompatible(MeshQAError):
    pass


class OutOfOrder(MeshQAError):
    pass


class PlaybackIncomplete(MeshQAError):
    pass


class DuplicateVote(MeshQAError):
    pass


class SessionIncomplete(MeshQAError):
    pass
