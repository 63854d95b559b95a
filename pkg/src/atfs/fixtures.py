"""Deterministic procedurally generated face-like test images.

Each fixture is a smooth background gradient plus an elliptical head blob,
two eye blobs and a mouth bar, with all placement and color parameters drawn
from the package LCG. Purely synthetic stand-ins for portrait photos that
cannot be redistributed.
"""

from __future__ import annotations

import numpy as np

from .rng import Lcg64

FIXTURE_COUNT = 4


def face_image(seed: int, h: int = 32, w: int = 32) -> np.ndarray:
    rng = Lcg64(seed * 48271 + 13)
    yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")

    def blob(cy, cx, ry, rx):
        return np.exp(-(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2))

    # background gradient
    gx = 0.15 + 0.25 * rng.uniform()
    gy = 0.15 + 0.25 * rng.uniform()
    base = 0.2 + gx * xx + gy * yy

    head = blob(0.5 + 0.06 * (rng.uniform() - 0.5), 0.5 + 0.06 * (rng.uniform() - 0.5),
                0.34 + 0.06 * rng.uniform(), 0.26 + 0.06 * rng.uniform())
    eye_y = 0.40 + 0.05 * rng.uniform()
    eye_dx = 0.12 + 0.04 * rng.uniform()
    eye_l = blob(eye_y, 0.5 - eye_dx, 0.05, 0.06)
    eye_r = blob(eye_y, 0.5 + eye_dx, 0.05, 0.06)
    mouth = blob(0.68 + 0.05 * rng.uniform(), 0.5, 0.04, 0.12 + 0.04 * rng.uniform())

    skin = np.array([0.85, 0.65 + 0.1 * rng.uniform(), 0.5 + 0.1 * rng.uniform()])
    img = np.empty((3, h, w))
    for c in range(3):
        plane = base * (0.6 + 0.15 * c / 2.0)
        plane = plane + head * (skin[c] - plane) * 0.8
        plane = plane - 0.5 * (eye_l + eye_r) * plane
        plane = plane - 0.35 * mouth * plane
        img[c] = plane
    return np.clip(img, 0.0, 1.0)


def bundled_fixtures(h: int = 32, w: int = 32) -> list:
    return [face_image(i, h, w) for i in range(FIXTURE_COUNT)]
