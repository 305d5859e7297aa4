"""Exception hierarchy for the pipeline.

Three families map onto the CLI exit codes: configuration problems (2),
malformed or inconsistent data (3), and numeric/degenerate conditions (4).
"""

from __future__ import annotations


class PeatcubeError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PeatcubeError):
    """Invalid run configuration or parameter choice."""


class DataFormatError(PeatcubeError):
    """Malformed or internally inconsistent input data."""


class NumericError(PeatcubeError):
    """Degenerate numeric condition detected at runtime."""


# --- header / cube I/O ---------------------------------------------------

class MissingFieldError(DataFormatError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"required header field missing: {name!r}")


class MalformedValueError(DataFormatError):
    def __init__(self, key: str, value: str = ""):
        self.key = key
        super().__init__(f"malformed value for header field {key!r}: {value!r}")


class WavelengthCountMismatchError(DataFormatError):
    def __init__(self, n_wavelengths: int, bands: int):
        super().__init__(
            f"header lists {n_wavelengths} wavelengths but bands = {bands}"
        )


class PayloadSizeMismatchError(DataFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"payload is {actual} bytes, header implies {expected}")


class NonFiniteInputError(DataFormatError):
    """Input array contains NaN or infinity."""


class ShapeMismatchError(DataFormatError):
    """Array shapes disagree with the declared geometry."""


class InvalidReferencesError(DataFormatError):
    """Reference frames violate the white >= dark sanity bound."""


# --- calibration / masking / sampling ------------------------------------

class AllReferencesDegenerateError(NumericError):
    """More than half of the (sample, band) entries have white - dark <= eps."""


class EmptyRoiError(NumericError):
    """Requested ROI fraction yields an empty spatial extent."""


class BandOutOfRangeError(ConfigError):
    def __init__(self, band: int, bands: int):
        super().__init__(f"band index {band} out of range for {bands}-band cube")


class DegenerateImageError(NumericError):
    """All intensities equal; no threshold exists."""


class InsufficientPixelsError(NumericError):
    def __init__(self, valid: int, group_size: int):
        super().__init__(
            f"mask has {valid} valid pixels, fewer than group_size = {group_size}"
        )


class EmptyClassError(NumericError):
    """A class has no samples to split."""


# --- learning -------------------------------------------------------------

class EmptyTrainingSetError(NumericError):
    """No samples to fit on."""


class SingleClassInputError(NumericError):
    """Binary training data contains only one label."""


class FoldsExceedClassCountError(ConfigError):
    def __init__(self, folds: int, smallest: int):
        super().__init__(
            f"{folds}-fold CV impossible: smallest class has {smallest} samples"
        )


class DimensionMismatchError(DataFormatError):
    def __init__(self, got: int, expected: int):
        super().__init__(f"spectrum has {got} bands, model expects {expected}")


class ConvergenceWarning(UserWarning):
    """SMO hit the iteration cap; the returned model is best-so-far."""


# --- metrics ---------------------------------------------------------------

class LengthMismatchError(DataFormatError):
    """Paired label/target sequences differ in length."""


class UnknownClassError(DataFormatError):
    def __init__(self, label):
        super().__init__(f"label {label!r} not in the declared class list")


class EmptyMatrixError(NumericError):
    """Confusion matrix has zero total count."""


class EmptyInputError(NumericError):
    """Metric requested on empty input."""


# --- synthesis -------------------------------------------------------------

class InvalidSpecError(ConfigError):
    """Synthetic cube specification violates its invariants."""
