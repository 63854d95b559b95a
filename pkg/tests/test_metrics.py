import math

import numpy as np
import pytest

from atfs.fixtures import face_image
from atfs.metrics import metric_report, ms_ssim, perturbation_norms, psnr
from atfs.robustness import add_gaussian_noise
from atfs.tensor import ShapeError


def test_psnr_examples():
    a = np.full((3, 8, 8), 0.5)
    assert psnr(a, a) == math.inf
    b = a + 0.1  # MSE = 0.01
    assert abs(psnr(a, b) - 20.0) < 1e-9
    assert abs(psnr(np.zeros((3, 8, 8)), np.ones((3, 8, 8)))) < 1e-12
    with pytest.raises(ShapeError):
        psnr(np.zeros((3, 8, 8)), np.zeros((3, 4, 4)))


def test_ms_ssim_self_is_exactly_one(face0):
    assert ms_ssim(face0, face0) == 1.0


def test_ms_ssim_inverted_image_scores_low(face0):
    assert ms_ssim(face0, 1.0 - face0) < 0.2


def test_ms_ssim_noise_monotonicity(face0):
    low = ms_ssim(face0, add_gaussian_noise(face0, 0.05, seed=2))
    high = ms_ssim(face0, add_gaussian_noise(face0, 0.1, seed=2))
    assert high < low < 1.0


def test_ms_ssim_symmetry(face0):
    other = add_gaussian_noise(face0, 0.08, seed=9)
    assert ms_ssim(face0, other) == pytest.approx(ms_ssim(other, face0), abs=1e-12)


def test_ms_ssim_small_images_rejected():
    a = np.zeros((3, 31, 31))
    with pytest.raises(ShapeError):
        ms_ssim(a, a)
    with pytest.raises(ShapeError):
        ms_ssim(np.zeros((2, 3, 32, 32)), np.zeros((2, 3, 32, 32)))


def test_ms_ssim_accepts_single_plane():
    a = face_image(1)[0]
    assert ms_ssim(a, a) == 1.0


def test_perturbation_norms_examples():
    a = np.zeros((3, 8, 8))
    assert perturbation_norms(a, a) == (0.0, 0.0)
    b = a.copy()
    b[0, 0, 0] = 6.0 / 255.0
    linf, l2 = perturbation_norms(a, b)
    assert linf == pytest.approx(6.0 / 255.0)
    assert l2 == pytest.approx(6.0 / 255.0)


def test_metric_report_fields(face0):
    other = add_gaussian_noise(face0, 0.02, seed=1)
    rep = metric_report(face0, other)
    assert rep.linf >= 0 and rep.l2 >= rep.linf
    assert rep.ms_ssim == ms_ssim(face0, other)
    assert rep.psnr_db == psnr(face0, other)
