"""Procedural target-guidance images: stripes, moire, busy texture.

All generators return (3, h, w) float images in [0, 1] with the pattern
replicated across channels, and are pure functions of their parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Lcg64

# fixed carrier frequency of the moire gratings, cycles per pixel
MOIRE_FREQ = 0.15
# unsharp-mask boost of the texture generator
TEXTURE_BOOST = 1.0


@dataclass
class PatternSpec:
    kind: str  # "stripes" | "moire" | "texture"
    period: int | None = None
    angles: tuple | None = None
    seed: int | None = None
    contrast: float = 1.0

    def __post_init__(self):
        if self.kind == "stripes":
            if self.period is None:
                raise ValueError("stripes need a period")
        elif self.kind == "moire":
            if self.angles is None:
                raise ValueError("moire needs two angles")
        elif self.kind == "texture":
            if self.seed is None:
                raise ValueError("texture needs a seed")
        else:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError(f"contrast must be in [0, 1], got {self.contrast}")

    def generate(self, h: int, w: int) -> np.ndarray:
        if self.kind == "stripes":
            return gen_stripes(h, w, self.period, self.contrast)
        if self.kind == "moire":
            return gen_moire(h, w, self.angles, self.contrast)
        return gen_texture(h, w, self.seed, self.contrast)


def _replicate(plane: np.ndarray) -> np.ndarray:
    return np.repeat(plane[None, :, :], 3, axis=0)


def _check_contrast(contrast: float):
    if not 0.0 <= contrast <= 1.0:
        raise ValueError(f"contrast must be in [0, 1], got {contrast}")


def gen_stripes(h: int, w: int, period: int, contrast: float = 1.0) -> np.ndarray:
    """Vertical square-wave stripes alternating 0.5 +/- contrast/2."""
    _check_contrast(contrast)
    if period < 2:
        raise ValueError(f"stripe period must be >= 2, got {period}")
    cols = np.arange(w)
    phase = (cols % period) < (period / 2.0)
    row = np.where(phase, 0.5 + contrast / 2.0, 0.5 - contrast / 2.0)
    plane = np.broadcast_to(row, (h, w)).copy()
    return np.clip(_replicate(plane), 0.0, 1.0)


def gen_moire(h: int, w: int, angles, contrast: float = 1.0) -> np.ndarray:
    """Product of two sinusoidal gratings at distinct angles (degrees)."""
    _check_contrast(contrast)
    a1, a2 = float(angles[0]), float(angles[1])
    if a1 == a2:
        raise ValueError("moire needs two distinct angles")
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")

    def grating(angle_deg):
        t = np.deg2rad(angle_deg)
        return np.sin(2.0 * np.pi * MOIRE_FREQ * (xx * np.cos(t) + yy * np.sin(t)))

    prod = grating(a1) * grating(a2)  # in [-1, 1]
    plane = 0.5 + (contrast / 2.0) * prod
    return np.clip(_replicate(plane), 0.0, 1.0)


def gen_texture(h: int, w: int, seed: int, contrast: float = 1.0) -> np.ndarray:
    """Seeded per-pixel noise sharpened by a 3x3 unsharp mask."""
    _check_contrast(contrast)
    rng = Lcg64(seed)
    u = rng.uniforms(h * w).reshape(h, w)
    blurred = _box3(u)
    sharp = u + TEXTURE_BOOST * (u - blurred)
    plane = 0.5 + contrast * (sharp - 0.5)
    return np.clip(_replicate(plane), 0.0, 1.0)


def _box3(x: np.ndarray) -> np.ndarray:
    xp = np.pad(x, 1, mode="reflect")
    out = np.zeros_like(x)
    for di in range(3):
        for dj in range(3):
            out += xp[di:di + x.shape[0], dj:dj + x.shape[1]]
    return out / 9.0


def parse_pattern_spec(spec: str) -> PatternSpec:
    """Parse "stripes:PERIOD", "moire:A1:A2" or "texture:SEED"."""
    parts = spec.split(":")
    try:
        if parts[0] == "stripes" and len(parts) == 2:
            return PatternSpec("stripes", period=int(parts[1]))
        if parts[0] == "moire" and len(parts) == 3:
            return PatternSpec("moire", angles=(float(parts[1]), float(parts[2])))
        if parts[0] == "texture" and len(parts) == 2:
            return PatternSpec("texture", seed=int(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad pattern spec {spec!r}: {exc}") from exc
    raise ValueError(f"bad pattern spec {spec!r}")
