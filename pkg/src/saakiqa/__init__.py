"""Full-reference quality assessment of compressed grayscale images.

The pipeline learns a two-stage Saak transform (KLT kernels augmented with
their negatives) from each reference image, transforms reference and
distorted images into 496 spectral channels, and blends per-channel MSE and
correlation with energy-driven weights into one quality score. A batch
harness reproduces the usual benchmark protocol (logistic regression plus
PLCC/SRCC/KRCC per codec).
"""

from ._version import __version__
from .config import CODEC_LAMBDAS, QualityConfig
from .errors import (
    DegenerateInputError,
    DegenerateVarianceError,
    DimensionMismatchError,
    GeometryMismatchError,
    ImageTooSmallError,
    InsufficientSamplesError,
    InvalidPairError,
    LengthMismatchError,
    MalformedHeaderError,
    MalformedRowError,
    NoTrainingSamplesError,
    NoValidRecordsError,
    SaakIqaError,
    TruncatedDataError,
    UnsupportedMaxvalError,
)
from .harness import (
    CodecResult,
    EvalRecord,
    EvalReport,
    RecordResult,
    emit_report,
    parse_manifest,
    run_eval,
    synth_distort,
)
from .image import (
    FilterSpec,
    crop_to_multiple,
    gaussian_filter,
    read_pgm,
    write_pgm,
)
from .metric import (
    ChannelStats,
    assess,
    channel_stats,
    quality_from_stats,
    reference_energy_spectrum,
)
from .saak import (
    SaakModel,
    SaakStage,
    energy_spectrum,
    extract_feature_windows,
    extract_training_patches,
    forward,
    forward_stage,
    inverse,
    inverse_stage,
    ps_convert,
    sp_convert,
    train_model,
    train_stage,
)
from .stats import (
    LogisticFit,
    kendall_tau_b,
    logistic5_eval,
    logistic5_fit,
    pearson,
    plcc_after_regression,
    psnr,
    rankdata,
    spearman,
)

__all__ = [
    "__version__",
    "CODEC_LAMBDAS",
    "QualityConfig",
    "FilterSpec",
    "ChannelStats",
    "SaakModel",
    "SaakStage",
    "LogisticFit",
    "EvalRecord",
    "EvalReport",
    "RecordResult",
    "CodecResult",
    "read_pgm",
    "write_pgm",
    "crop_to_multiple",
    "gaussian_filter",
    "extract_training_patches",
    "extract_feature_windows",
    "train_stage",
    "train_model",
    "sp_convert",
    "ps_convert",
    "forward_stage",
    "inverse_stage",
    "forward",
    "inverse",
    "energy_spectrum",
    "channel_stats",
    "quality_from_stats",
    "assess",
    "reference_energy_spectrum",
    "pearson",
    "spearman",
    "kendall_tau_b",
    "rankdata",
    "psnr",
    "logistic5_eval",
    "logistic5_fit",
    "plcc_after_regression",
    "parse_manifest",
    "run_eval",
    "synth_distort",
    "emit_report",
    "SaakIqaError",
    "MalformedHeaderError",
    "UnsupportedMaxvalError",
    "TruncatedDataError",
    "ImageTooSmallError",
    "DimensionMismatchError",
    "GeometryMismatchError",
    "NoTrainingSamplesError",
    "InsufficientSamplesError",
    "InvalidPairError",
    "DegenerateInputError",
    "LengthMismatchError",
    "DegenerateVarianceError",
    "MalformedRowError",
    "NoValidRecordsError",
]
