"""Hyperspectral peat-quality analysis pipeline.

Calibrates pushbroom scans to reflectance, masks shadows with Otsu's
threshold, averages random pixel groups into spectral samples, grades them
with a one-vs-one SMO-trained SVM and predicts chemistry targets with
epsilon-SVR, reporting OA/AA/Kappa and MAE/RMSE/R2.
"""

from .hypercube import (
    RAW_COUNTS,
    REFLECTANCE,
    EnviHeader,
    Hypercube,
    ReferenceFrames,
    WavelengthAxis,
    calibrate_reflectance,
    crop_roi,
    encode_cube,
    format_envi_header,
    load_cube,
    parse_envi_header,
    read_cube,
    save_cube,
)
from .masking import (
    IntensityImage,
    PixelMask,
    build_mask,
    intensity_image,
    otsu_threshold,
)
from .metrics import (
    ConfusionMatrix,
    GradeReport,
    RegressReport,
    confusion_matrix,
    grade_report,
    regress_report,
)
from .sampling import (
    SampleSet,
    SpectralSample,
    draw_spectral_samples,
    split_train_test,
)
from .synth import GeneratedCube, SyntheticSpec, TargetRule, generate_cube

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix",
    "EnviHeader",
    "GeneratedCube",
    "GradeReport",
    "Hypercube",
    "IntensityImage",
    "PixelMask",
    "RAW_COUNTS",
    "REFLECTANCE",
    "ReferenceFrames",
    "RegressReport",
    "SampleSet",
    "SpectralSample",
    "SyntheticSpec",
    "TargetRule",
    "WavelengthAxis",
    "__version__",
    "build_mask",
    "calibrate_reflectance",
    "confusion_matrix",
    "crop_roi",
    "draw_spectral_samples",
    "encode_cube",
    "format_envi_header",
    "generate_cube",
    "grade_report",
    "intensity_image",
    "load_cube",
    "otsu_threshold",
    "parse_envi_header",
    "read_cube",
    "regress_report",
    "save_cube",
    "split_train_test",
]
