"""Reference-based line-art colorization: Python bindings over the C++ core."""

from ._core import (
    ConfigError,
    Generator,
    TrainingDiverged,
    gram_matrix,
    load_image,
    ms_ssim,
    psnr,
    run_cli,
    save_image,
    tps_warp,
    total_generator_loss,
)

__all__ = [
    "ConfigError",
    "Generator",
    "TrainingDiverged",
    "gram_matrix",
    "load_image",
    "ms_ssim",
    "psnr",
    "run_cli",
    "save_image",
    "tps_warp",
    "total_generator_loss",
]
