"""Shared helpers: finite-difference oracles and the standard toy setup."""

import numpy as np
import pytest

from atfs.extractors import build_gan_proxy, build_vae_proxy, build_vqvae_proxy
from atfs.fixtures import face_image
from atfs.patterns import gen_moire
from atfs.rng import Lcg64

FD_STEP = 1e-4
FD_RTOL = 1e-4


def fd_gradient(f, x: np.ndarray, coords=None, step: float = FD_STEP) -> dict:
    """Central-difference gradient of scalar f(x) at the given flat coords."""
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    if coords is None:
        coords = range(flat.size)
    out = {}
    for i in coords:
        xp = flat.copy()
        xp[i] += step
        xm = flat.copy()
        xm[i] -= step
        out[i] = (f(xp.reshape(x.shape)) - f(xm.reshape(x.shape))) / (2 * step)
    return out


def assert_fd_close(analytic: np.ndarray, fd: dict, rtol: float = FD_RTOL):
    flat = np.asarray(analytic, dtype=np.float64).ravel()
    for i, fv in fd.items():
        av = flat[i]
        denom = max(abs(av), abs(fv), 1e-6)
        assert abs(av - fv) / denom < rtol, (
            f"coord {i}: analytic {av!r} vs finite-diff {fv!r}")


def sample_coords(rng: Lcg64, size: int, n: int) -> list:
    return sorted({rng.randint(0, size) for _ in range(n)})


def standard_target(h: int = 32, w: int = 32) -> np.ndarray:
    return gen_moire(h, w, (0, 45))


def standard_extractors(seed: int, k: int = 2, h: int = 32, w: int = 32) -> list:
    builders = [build_vae_proxy, build_gan_proxy, build_vqvae_proxy]
    return [builders[i](seed * 10 + i + 1, h, w) for i in range(k)]


@pytest.fixture
def moire_target():
    return standard_target()


@pytest.fixture
def face0():
    return face_image(0)
