"""Exception types shared across the toolkit."""


class SceneTokError(Exception):
    """Base class for every toolkit error."""


class SchemaError(SceneTokError):
    """Scene document or object violates the schema (missing/conflicting fields)."""


class StyleMixError(SchemaError):
    """Objects of different dataset styles mixed in one scene."""


class ShapeCodeLengthError(SchemaError):
    """A shape-code sequence does not have exactly the required length."""


class NonFiniteError(SceneTokError):
    """NaN or infinity fed to the quantizer."""


class UnknownTokenError(SceneTokError):
    """Token string or ID not present in the active vocabulary/grid."""


class DuplicateTokenError(SceneTokError):
    """The same token string claimed by two vocabulary entries."""


class GrammarError(SceneTokError):
    """Strict parse failure; carries the offending token position."""

    def __init__(self, position: int, message: str):
        super().__init__(f"at token {position}: {message}")
        self.position = position


class EmptyInputError(SceneTokError):
    """An operation requiring a non-empty input received none."""


class LengthMismatchError(SceneTokError):
    """Parallel inputs whose lengths must agree do not."""


class OddDimensionError(SceneTokError):
    """Sine-cosine tables need an even embedding dimension."""


class ShapeMismatchError(SceneTokError):
    """Matrix shapes disagree."""


class ImageLengthError(SceneTokError):
    """Image token payload has the wrong length."""


class StyleMismatchError(SceneTokError):
    """Ground-truth and predicted scenes have different dataset styles."""


class RaggedInputError(SceneTokError):
    """Sequences that must share one length do not (or the corpus is empty)."""


class OutOfRangeError(SceneTokError):
    """A codebook ID falls outside the declared range."""


class PlacementInfeasibleError(SceneTokError):
    """Object placement failed after the retry budget."""


class TargetNotFoundError(SceneTokError):
    """No scene object matches the edit reference."""


class AmbiguousReferenceError(SceneTokError):
    """More than one scene object matches a reference that must be unique."""
