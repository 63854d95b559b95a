"""Toy differentiable feature extractors with three distinct architectures.

Each proxy maps a (3, H, W) image in [0, 1] to a flat 64-dim feature vector
and is fully determined by (architecture, seed): weights are drawn from the
package LCG (see ``rng``) with Glorot-uniform bounds, layer by layer in
declaration order, weight buffer before bias, row-major.

The three builders intentionally differ in widths, kernel sizes, activations
and depth so that attacks must cope with heterogeneous Jacobians:

* ``vae_proxy``   - 3 strided conv layers, leaky_relu(0.2), linear head.
* ``gan_proxy``   - wide conv + stride-1 conv, relu, flattened deep
  activation map projected to the feature dim.
* ``vqvae_proxy`` - conv encoder to 8-dim patch vectors, nearest-codebook
  quantization (straight-through gradient), linear head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import Lcg64
from .tensor import (
    ShapeError,
    Tensor,
    add,
    conv2d,
    leaky_relu,
    matmul,
    relu,
    reshape,
)

FEATURE_DIM = 64
CODEBOOK_SIZE = 32
CODEBOOK_DIM = 8
# codebook std as a fraction of the encoder's patch spread: entries sit in
# the dense core of the patch cloud, so quantization cells are fine where
# patches actually live and code assignments respond to small perturbations
CODEBOOK_SPREAD = 0.3


def _glorot(rng: Lcg64, shape, fan_in: int, fan_out: int) -> Tensor:
    a = math.sqrt(6.0 / (fan_in + fan_out))
    n = int(np.prod(shape))
    data = (rng.uniforms(n) * 2.0 - 1.0) * a
    return Tensor(data.reshape(shape))


def _bias(rng: Lcg64, n: int, fan_in: int) -> Tensor:
    a = 1.0 / math.sqrt(fan_in)
    data = (rng.uniforms(n) * 2.0 - 1.0) * a
    return Tensor(data)


@dataclass
class ConvLayer:
    weight: Tensor
    bias: Tensor
    stride: int
    padding: int
    activation: str  # "relu" | "leaky_relu" | "none"

    def apply(self, x: Tensor) -> Tensor:
        out = conv2d(x, self.weight, stride=self.stride, padding=self.padding)
        out = _add_channel_bias(out, self.bias)
        if self.activation == "relu":
            out = relu(out)
        elif self.activation == "leaky_relu":
            out = leaky_relu(out, 0.2)
        return out


def _add_channel_bias(x: Tensor, b: Tensor) -> Tensor:
    """Add a per-channel bias to a (N, C, H, W) activation."""
    if x.data.ndim != 4 or b.data.ndim != 1 or x.shape[1] != b.shape[0]:
        raise ShapeError(f"bias {b.shape} does not match activation {x.shape}")
    out = x.data + b.data.reshape(1, -1, 1, 1)

    def bwd(g):
        return g, g.sum(axis=(0, 2, 3))

    if any(t.requires_grad or t._parents for t in (x, b)):
        return Tensor(out, _parents=(x, b), _backward=bwd)
    return Tensor(out)


class Codebook:
    """M x D codebook with guaranteed pairwise-distinct entries."""

    def __init__(self, entries: np.ndarray):
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 2:
            raise ShapeError(f"codebook must be M x D with M >= 2, got {entries.shape}")
        self.entries = entries

    @classmethod
    def seeded(cls, rng: Lcg64, m: int = CODEBOOK_SIZE, d: int = CODEBOOK_DIM,
               stats: tuple | None = None) -> "Codebook":
        # seeded Gaussian entries, affinely placed on the encoder's patch
        # statistics when given so that nearest-neighbour assignments vary
        mu, sd = stats if stats is not None else (np.zeros(d), np.ones(d))

        def draw():
            return mu + rng.gaussians(m * d).reshape(m, d) * sd

        entries = draw()
        # exact duplicates are virtually impossible but the invariant is hard
        while len({row.tobytes() for row in entries}) < m:
            entries = draw()
        return cls(entries)

    def nearest(self, rows: np.ndarray) -> np.ndarray:
        """Index of the nearest entry per row; ties break to the lowest index."""
        d2 = ((rows[:, None, :] - self.entries[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)

    def quantize_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.entries[self.nearest(rows)]


def codebook_quantize(z: Tensor, codebook: Codebook) -> Tensor:
    """Replace each row of (P, D) by its nearest codebook entry.

    Backward is the straight-through estimator: the adjoint passes to ``z``
    unchanged, as if quantization were the identity.
    """
    if z.data.ndim != 2 or z.shape[1] != codebook.entries.shape[1]:
        raise ShapeError(
            f"quantize: rows {z.shape} vs codebook {codebook.entries.shape}")
    out = codebook.quantize_rows(z.data)

    def bwd(g):
        return (g,)

    if z.requires_grad or z._parents:
        return Tensor(out, _parents=(z,), _backward=bwd)
    return Tensor(out)


@dataclass
class FeatureExtractor:
    name: str
    seed: int
    feature_dim: int
    input_shape: tuple  # (3, H, W)
    conv_layers: list = field(default_factory=list)
    head_weight: Tensor | None = None
    head_bias: Tensor | None = None
    codebook: Codebook | None = None
    feature_scale: float = 1.0

    @property
    def params(self) -> list:
        ps = []
        for layer in self.conv_layers:
            ps.extend([layer.weight, layer.bias])
        ps.extend([self.head_weight, self.head_bias])
        return ps

    @property
    def param_count(self) -> int:
        return sum(p.size for p in self.params)

    @property
    def layer_summary(self) -> list:
        rows = [(l.weight.shape, l.stride, l.activation) for l in self.conv_layers]
        rows.append((self.head_weight.shape, 1, "linear"))
        return rows

    def extract(self, img: Tensor) -> Tensor:
        if not isinstance(img, Tensor):
            img = Tensor(img)
        if img.shape != self.input_shape:
            raise ShapeError(
                f"{self.name}: expected image of shape {self.input_shape}, "
                f"got {img.shape}")
        c, h, w = self.input_shape
        x = reshape(img, (1, c, h, w))
        for layer in self.conv_layers:
            x = layer.apply(x)
        if self.codebook is not None:
            _, d, hh, ww = x.shape
            # (1,D,h,w) -> (h*w, D) patch vectors
            x = reshape(x, (d, hh * ww))
            x = transpose2d(x)
            x = codebook_quantize(x, self.codebook)
        v = reshape(x, (x.size,))
        out = add(matmul(self.head_weight, v), self.head_bias)
        if self.feature_scale != 1.0:
            out = out * self.feature_scale
        return out

    # sklearn-flavoured alias so extractors slot into pipelines
    def transform(self, img):
        return self.extract(img)


def transpose2d(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise ShapeError(f"transpose2d: need rank 2, got {x.shape}")
    out = x.data.T.copy()

    def bwd(g):
        return (g.T.copy(),)

    if x.requires_grad or x._parents:
        return Tensor(out, _parents=(x,), _backward=bwd)
    return Tensor(out)


def _conv_out(h: int, k: int, s: int, p: int) -> int:
    return (h + 2 * p - k) // s + 1


def _make_conv(rng: Lcg64, cin: int, cout: int, k: int, s: int, p: int,
               activation: str) -> ConvLayer:
    w = _glorot(rng, (cout, cin, k, k), fan_in=cin * k * k, fan_out=cout * k * k)
    b = _bias(rng, cout, fan_in=cin * k * k)
    return ConvLayer(w, b, s, p, activation)


def _make_head(rng: Lcg64, fin: int) -> tuple[Tensor, Tensor]:
    w = _glorot(rng, (FEATURE_DIM, fin), fan_in=fin, fan_out=FEATURE_DIM)
    b = _bias(rng, FEATURE_DIM, fan_in=fin)
    return w, b


def build_vae_proxy(seed: int, height: int = 32, width: int = 32) -> FeatureExtractor:
    """Diffusion-model stand-in: strided leaky-relu conv encoder."""
    _check_geometry(height, width, total_stride=8)
    rng = Lcg64(seed)
    layers = [
        _make_conv(rng, 3, 16, k=3, s=2, p=1, activation="leaky_relu"),
        _make_conv(rng, 16, 24, k=3, s=2, p=1, activation="leaky_relu"),
        _make_conv(rng, 24, 16, k=3, s=2, p=1, activation="leaky_relu"),
    ]
    flat = 16 * (height // 8) * (width // 8)
    hw, hb = _make_head(rng, flat)
    return FeatureExtractor("vae_proxy", seed, FEATURE_DIM, (3, height, width),
                            layers, hw, hb)


def build_gan_proxy(seed: int, height: int = 32, width: int = 32) -> FeatureExtractor:
    """GAN-generator-encoder stand-in: wide relu convs, deep activation map head."""
    _check_geometry(height, width, total_stride=2)
    rng = Lcg64(seed)
    layers = [
        _make_conv(rng, 3, 12, k=5, s=2, p=2, activation="relu"),
        _make_conv(rng, 12, 6, k=3, s=1, p=1, activation="relu"),
    ]
    flat = 6 * (height // 2) * (width // 2)
    hw, hb = _make_head(rng, flat)
    return FeatureExtractor("gan_proxy", seed, FEATURE_DIM, (3, height, width),
                            layers, hw, hb)


def build_vqvae_proxy(seed: int, height: int = 32, width: int = 32) -> FeatureExtractor:
    """VQ-VAE stand-in: conv encoder + nearest-codebook quantization."""
    _check_geometry(height, width, total_stride=4)
    rng = Lcg64(seed)
    layers = [
        _make_conv(rng, 3, 8, k=3, s=2, p=1, activation="relu"),
        _make_conv(rng, 8, CODEBOOK_DIM, k=3, s=2, p=1, activation="none"),
    ]
    flat = CODEBOOK_DIM * (height // 4) * (width // 4)
    hw, hb = _make_head(rng, flat)
    mu, sd = _patch_stats(layers, rng, height, width)
    codebook = Codebook.seeded(rng, stats=(mu, sd * CODEBOOK_SPREAD))
    return FeatureExtractor("vqvae_proxy", seed, FEATURE_DIM, (3, height, width),
                            layers, hw, hb, codebook)


def _patch_stats(layers: list, rng: Lcg64, height: int, width: int,
                 probes: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean/std of encoder patch vectors over seeded probe images.

    Used to place the codebook inside the encoder's actual output region so
    that nearest-neighbour assignments vary across patches and images.
    """
    rows = []
    for _ in range(probes):
        img = rng.uniforms(3 * height * width).reshape(3, height, width)
        t = reshape(Tensor(img), (1, 3, height, width))
        for layer in layers:
            t = layer.apply(t)
        rows.append(t.data.reshape(CODEBOOK_DIM, -1).T)
    rows = np.concatenate(rows, axis=0)
    return rows.mean(axis=0), rows.std(axis=0)


def _check_geometry(height: int, width: int, total_stride: int):
    if height % total_stride or width % total_stride:
        raise ShapeError(
            f"image {height}x{width} must be divisible by stride {total_stride}")


_BUILDERS = {
    "vae_proxy": build_vae_proxy,
    "gan_proxy": build_gan_proxy,
    "vqvae_proxy": build_vqvae_proxy,
}


def extract(extractor: FeatureExtractor, img: Tensor) -> Tensor:
    return extractor.extract(img)


def parse_extractor_spec(spec: str, height: int = 32, width: int = 32) -> FeatureExtractor:
    """Build from a "name:SEED" string, e.g. "vae_proxy:7"."""
    parts = spec.split(":")
    if len(parts) != 2 or parts[0] not in _BUILDERS:
        raise ValueError(
            f"bad extractor spec {spec!r}; expected one of "
            f"{sorted(_BUILDERS)} as 'name:SEED'")
    return _BUILDERS[parts[0]](int(parts[1]), height, width)
