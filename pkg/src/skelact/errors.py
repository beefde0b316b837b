"""Exception types raised across the package."""


class SkelActError(Exception):
    """Base class for all skelact errors."""


class FieldCountError(SkelActError):
    """A skeleton text record does not have the expected number of fields."""


class NonFiniteValueError(SkelActError):
    """A numeric field parsed to NaN or infinity."""


class NonOrthonormalError(SkelActError):
    """A rotation matrix deviates from orthonormality beyond the repair tolerance."""


class InvalidRotationError(SkelActError):
    """A matrix handed to a rotation operation is not a proper rotation."""


class EmptyScriptError(SkelActError):
    """A motion script defines no joint trajectories."""


class DegenerateBoxError(SkelActError):
    """A bounding box is empty or smaller than the descriptor minimum."""


class JointBehindCameraError(SkelActError):
    """A joint has non-positive depth and cannot be projected."""


class TooFewSamplesError(SkelActError):
    """Not enough samples to fit the requested number of clusters."""


class DegenerateClusterError(SkelActError):
    """A mixture component collapsed (weight below threshold) even after reseeding."""


class DimensionMismatchError(SkelActError):
    """Input dimensionality does not match the fitted model."""


class MissingActivityDataError(SkelActError):
    """No training sequence is available for an activity."""


class WindowTooLongError(SkelActError):
    """An observation window exceeds the configured substructure cap."""


class UninitializedStateError(SkelActError):
    """A detector state was used before initialization."""


class DegenerateLabelsError(SkelActError):
    """Classifier training labels have fewer than two classes or too few samples."""
