"""Input validation helpers shared by the estimator API and the CLI."""

from __future__ import annotations

import numpy as np


def check_image(x, name: str = "image") -> np.ndarray:
    """Validate a (3, H, W) float image in [0, 1]; returns a float64 copy."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != 3:
        raise ValueError(f"{name} must have shape (3, H, W), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr.copy()


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "images"):
    if a.shape != b.shape:
        raise ValueError(f"{what} must share a shape: {a.shape} vs {b.shape}")
