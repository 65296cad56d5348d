"""Medical image super-resolution toolkit.

Images are 2-D float32 arrays of shape (height, width) with values in [0, 1].
"""

from ._medsr import (
    MedsrError,
    bench,
    brenner,
    degrade,
    evaluate,
    fsim,
    init_weights,
    laplacian_variance,
    load_image,
    load_weights,
    lpips_proxy,
    metric_names,
    odi,
    psnr,
    resample,
    save_image,
    save_weights,
    ssim,
    tenengrad,
    upscale,
    vif,
)

__version__ = "0.1.0"

__all__ = [
    "MedsrError",
    "bench",
    "brenner",
    "degrade",
    "evaluate",
    "fsim",
    "init_weights",
    "laplacian_variance",
    "load_image",
    "load_weights",
    "lpips_proxy",
    "metric_names",
    "odi",
    "psnr",
    "resample",
    "save_image",
    "save_weights",
    "ssim",
    "tenengrad",
    "upscale",
    "vif",
]
