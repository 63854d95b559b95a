"""PSNR, 5-scale MS-SSIM and perturbation norms.

MS-SSIM constants are fixed: 11x11 Gaussian window with sigma = 1.5
(reflect-padded separable filtering), K1 = 0.01, K2 = 0.03, data range 1.0,
scale weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), 2x2 mean pooling
between scales. Luminance enters only at the coarsest scale; channels are
scored independently and averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import ShapeError

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
K1 = 0.01
K2 = 0.03
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5


@dataclass
class MetricReport:
    ms_ssim: float
    psnr_db: float
    linf: float
    l2: float


def _check_pair(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ShapeError(f"metric: shapes {a.shape} vs {b.shape}")


def psnr(a, b) -> float:
    """10 * log10(1 / MSE) for [0, 1] images; returns inf when identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_pair(a, b)
    err = float(np.mean((a - b) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def _gaussian_kernel(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    k = np.exp(-(r ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


_KERNEL = _gaussian_kernel()


def _reflect_filter1d(x: np.ndarray, axis: int) -> np.ndarray:
    r = (len(_KERNEL) - 1) // 2
    pad = [(0, 0)] * x.ndim
    pad[axis] = (r, r)
    xp = np.pad(x, pad, mode="reflect")
    out = np.zeros_like(x)
    for i, kv in enumerate(_KERNEL):
        sl = [slice(None)] * x.ndim
        sl[axis] = slice(i, i + x.shape[axis])
        out += kv * xp[tuple(sl)]
    return out


def _blur(x: np.ndarray) -> np.ndarray:
    return _reflect_filter1d(_reflect_filter1d(x, 0), 1)


def _ssim_components(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Mean luminance term and mean contrast-structure term of one plane."""
    c1 = (K1 * 1.0) ** 2
    c2 = (K2 * 1.0) ** 2
    mu_a = _blur(a)
    mu_b = _blur(b)
    var_a = _blur(a * a) - mu_a ** 2
    var_b = _blur(b * b) - mu_b ** 2
    cov = _blur(a * b) - mu_a * mu_b
    lum = (2 * mu_a * mu_b + c1) / (mu_a ** 2 + mu_b ** 2 + c1)
    cs = (2 * cov + c2) / (var_a + var_b + c2)
    return float(lum.mean()), float(cs.mean())


def _downsample(x: np.ndarray) -> np.ndarray:
    h, w = x.shape
    x = x[: h - h % 2, : w - w % 2]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def _ms_ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    levels = len(MS_SSIM_WEIGHTS)
    value = 1.0
    for lvl in range(levels):
        lum, cs = _ssim_components(a, b)
        if lvl == levels - 1:
            value *= math.copysign(abs(lum * cs) ** MS_SSIM_WEIGHTS[lvl], lum * cs)
        else:
            value *= math.copysign(abs(cs) ** MS_SSIM_WEIGHTS[lvl], cs)
            a = _downsample(a)
            b = _downsample(b)
    return value


def ms_ssim(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_pair(a, b)
    if a.ndim == 2:
        a = a[None]
        b = b[None]
    if a.ndim != 3:
        raise ShapeError(f"ms_ssim expects (C, H, W) images, got {a.shape}")
    h, w = a.shape[1], a.shape[2]
    if min(h, w) < 32:
        raise ShapeError(
            f"ms_ssim needs min(H, W) >= 32 for 5 scales, got {h}x{w}")
    return float(np.mean([_ms_ssim_plane(a[c], b[c]) for c in range(a.shape[0])]))


def perturbation_norms(x, x_adv) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    x_adv = np.asarray(x_adv, dtype=np.float64)
    _check_pair(x, x_adv)
    d = x_adv - x
    return float(np.max(np.abs(d))), float(np.sqrt(np.sum(d * d)))


def metric_report(x, x_adv) -> MetricReport:
    linf, l2 = perturbation_norms(x, x_adv)
    return MetricReport(ms_ssim=ms_ssim(x, x_adv), psnr_db=psnr(x, x_adv),
                        linf=linf, l2=l2)
