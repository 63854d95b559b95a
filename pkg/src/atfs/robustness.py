"""Signal distortions applied to adversarial images before re-evaluation.

``jpeg_approx`` keeps only the lossy core of JPEG: per-channel 8x8 block
DCT-II, quantization by the standard luminance table under the conventional
quality scaling (scale = 5000/q for q < 50, else 200 - 2q, divided by 100,
table entries clamped to [1, 255]), rounding, dequantization and inverse
DCT. Chroma subsampling and entropy coding are omitted; they do not change
pixel values beyond this quantization.

``rescale`` is bilinear with half-pixel-aligned sample centers
(src = (dst + 0.5) / factor - 0.5, clamped to the border), down then back up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Lcg64

# ITU-T T.81 Annex K luminance quantization table
LUMA_QTABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)

_KINDS = ("jpeg", "gaussian_noise", "rescale")


@dataclass
class TransformSpec:
    kind: str
    quality: int | None = None
    sigma: float | None = None
    factor: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind == "jpeg":
            if self.quality is None:
                raise ValueError("jpeg transform needs a quality")
        elif self.kind == "gaussian_noise":
            if self.sigma is None:
                raise ValueError("gaussian_noise transform needs sigma")
        elif self.kind == "rescale":
            if self.factor is None:
                raise ValueError("rescale transform needs a factor")
        else:
            raise ValueError(f"unknown transform kind {self.kind!r}")

    def apply(self, img: np.ndarray) -> np.ndarray:
        if self.kind == "jpeg":
            return jpeg_approx(img, self.quality)
        if self.kind == "gaussian_noise":
            return add_gaussian_noise(img, self.sigma, self.seed)
        return rescale(img, self.factor)

    def label(self) -> str:
        if self.kind == "jpeg":
            return f"jpeg:{self.quality}"
        if self.kind == "gaussian_noise":
            return f"noise:{self.sigma}:{self.seed}"
        return f"rescale:{self.factor}"


def parse_transform_spec(spec: str) -> TransformSpec:
    """Parse "jpeg:75", "noise:0.05:SEED" or "rescale:0.5"."""
    parts = spec.split(":")
    try:
        if parts[0] == "jpeg" and len(parts) == 2:
            return TransformSpec("jpeg", quality=int(parts[1]))
        if parts[0] == "noise" and len(parts) in (2, 3):
            seed = int(parts[2]) if len(parts) == 3 else 0
            return TransformSpec("gaussian_noise", sigma=float(parts[1]), seed=seed)
        if parts[0] == "rescale" and len(parts) == 2:
            return TransformSpec("rescale", factor=float(parts[1]))
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ValueError) and "transform" in str(exc):
            raise
    raise ValueError(f"bad transform spec {spec!r}")


def _dct_matrix(n: int = 8) -> np.ndarray:
    # orthonormal DCT-II basis, rows indexed by frequency
    k = np.arange(n)
    m = np.cos(np.pi * (2 * k[None, :] + 1) * k[:, None] / (2 * n))
    m[0, :] *= np.sqrt(1.0 / n)
    m[1:, :] *= np.sqrt(2.0 / n)
    return m


_DCT8 = _dct_matrix(8)


def _quality_scale(quality: int) -> float:
    if quality < 50:
        return 5000.0 / quality
    return 200.0 - 2.0 * quality


def scaled_qtable(quality: int) -> np.ndarray:
    if not 1 <= quality <= 100:
        raise ValueError(f"jpeg quality must be in [1, 100], got {quality}")
    s = _quality_scale(quality)
    q = np.floor((LUMA_QTABLE * s + 50.0) / 100.0)
    return np.clip(q, 1.0, 255.0)


def jpeg_approx(img: np.ndarray, quality: int) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    q = scaled_qtable(quality)
    c, h, w = img.shape
    ph = (-h) % 8
    pw = (-w) % 8
    x = np.pad(img, ((0, 0), (0, ph), (0, pw)), mode="reflect") if (ph or pw) else img
    x = x * 255.0 - 128.0
    hh, ww = x.shape[1], x.shape[2]
    out = np.empty_like(x)
    for ch in range(c):
        blocks = x[ch].reshape(hh // 8, 8, ww // 8, 8).transpose(0, 2, 1, 3)
        coeff = _DCT8 @ blocks @ _DCT8.T
        coeff = np.round(coeff / q) * q
        rec = _DCT8.T @ coeff @ _DCT8
        out[ch] = rec.transpose(0, 2, 1, 3).reshape(hh, ww)
    out = (out + 128.0) / 255.0
    out = out[:, :h, :w]
    return np.clip(out, 0.0, 1.0)


def add_gaussian_noise(img: np.ndarray, sigma: float, seed: int = 0) -> np.ndarray:
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    img = np.asarray(img, dtype=np.float64)
    if sigma == 0:
        return img.copy()
    rng = Lcg64(seed)
    noise = rng.gaussians(img.size).reshape(img.shape) * sigma
    return np.clip(img + noise, 0.0, 1.0)


def _bilinear_resize_plane(plane: np.ndarray, oh: int, ow: int) -> np.ndarray:
    h, w = plane.shape
    ys = (np.arange(oh) + 0.5) * (h / oh) - 0.5
    xs = (np.arange(ow) + 0.5) * (w / ow) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = plane[np.ix_(y0, x0)] * (1 - fx) + plane[np.ix_(y0, x1)] * fx
    bot = plane[np.ix_(y1, x0)] * (1 - fx) + plane[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def rescale(img: np.ndarray, factor: float) -> np.ndarray:
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"rescale factor must be in (0, 1], got {factor}")
    img = np.asarray(img, dtype=np.float64)
    c, h, w = img.shape
    dh, dw = int(round(h * factor)), int(round(w * factor))
    if dh < 1 or dw < 1:
        raise ValueError(f"rescale factor {factor} degenerates {h}x{w}")
    out = np.empty_like(img)
    for ch in range(c):
        small = _bilinear_resize_plane(img[ch], dh, dw)
        out[ch] = _bilinear_resize_plane(small, h, w)
    return np.clip(out, 0.0, 1.0)
