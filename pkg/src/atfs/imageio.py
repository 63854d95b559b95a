"""8-bit RGB PNG loading and saving.

Pixels map to [0, 1] as v / 255 on load; saving is the exact inverse with
round-half-up, so a save/load round trip reproduces quantized values
exactly. Anything that is not an 8-bit RGB PNG is rejected.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    pass


def load_png(path: str) -> np.ndarray:
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ImageFormatError(f"{path}: not a PNG file (format={im.format})")
        if im.mode != "RGB":
            raise ImageFormatError(
                f"{path}: only 8-bit RGB PNGs are supported, got mode {im.mode}")
        arr = np.asarray(im, dtype=np.float64)  # (H, W, 3)
    return arr.transpose(2, 0, 1) / 255.0


def save_png(img: np.ndarray, path: str):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ImageFormatError(f"expected a (3, H, W) image, got {img.shape}")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ImageFormatError("pixel values must lie in [0, 1]")
    q = np.floor(img * 255.0 + 0.5).astype(np.uint8)  # round half up
    Image.fromarray(q.transpose(1, 2, 0), mode="RGB").save(path, format="PNG")
