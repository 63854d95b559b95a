import numpy as np
import pytest
from PIL import Image

from atfs.fixtures import FIXTURE_COUNT, bundled_fixtures, face_image
from atfs.imageio import ImageFormatError, load_png, save_png


def test_save_load_round_trip(tmp_path):
    img = face_image(2)
    path = str(tmp_path / "a.png")
    save_png(img, path)
    loaded = load_png(path)
    quantized = np.floor(img * 255.0 + 0.5) / 255.0
    assert np.array_equal(loaded, quantized)
    # a second round trip is exact
    save_png(loaded, path)
    assert np.array_equal(load_png(path), loaded)


def test_all_black_png_loads_as_zeros(tmp_path):
    path = str(tmp_path / "black.png")
    save_png(np.zeros((3, 8, 8)), path)
    assert np.array_equal(load_png(path), np.zeros((3, 8, 8)))


def test_16bit_png_rejected(tmp_path):
    path = str(tmp_path / "deep.png")
    Image.fromarray(np.zeros((8, 8), dtype=np.uint16)).save(path, format="PNG")
    with pytest.raises(ImageFormatError):
        load_png(path)


def test_non_png_rejected(tmp_path):
    path = str(tmp_path / "img.jpg")
    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(path, format="JPEG")
    with pytest.raises(ImageFormatError):
        load_png(path)


def test_save_png_validation(tmp_path):
    path = str(tmp_path / "bad.png")
    with pytest.raises(ImageFormatError):
        save_png(np.zeros((8, 8)), path)
    with pytest.raises(ImageFormatError):
        save_png(np.full((3, 8, 8), 1.5), path)


def test_fixtures_deterministic_and_in_range():
    imgs = bundled_fixtures()
    assert len(imgs) == FIXTURE_COUNT
    for i, img in enumerate(imgs):
        assert img.shape == (3, 32, 32)
        assert img.min() >= 0.0 and img.max() <= 1.0
        assert np.array_equal(img, face_image(i))
    assert not np.array_equal(imgs[0], imgs[1])


def test_fixture_custom_size():
    img = face_image(0, 64, 48)
    assert img.shape == (3, 64, 48)
