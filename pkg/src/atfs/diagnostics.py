"""Gradient-conflict statistics and per-run synergy summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import PerturbationState, alignment_loss, precompute_targets
from .rng import Lcg64
from .tensor import ShapeError, Tensor

LOSS_KINDS = ("deviation", "alignment")


@dataclass
class ConflictStats:
    mean_cosine: float
    std_cosine: float
    mean_inner: float
    sample_count: int
    dimension: int


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"cosine: shapes {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 and nv == 0.0:
        return 0.0
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a single zero vector")
    return float(np.dot(u, v) / (nu * nv))


def _loss_gradient(extractor, point: np.ndarray, target: np.ndarray) -> np.ndarray:
    leaf = Tensor(point, requires_grad=True)
    loss = alignment_loss(extractor.extract(leaf), target)
    loss.backward()
    return leaf.grad.copy()


def measure_pixel_conflict(extractors: list, images: list, loss_kind: str,
                           target: np.ndarray | None = None,
                           probe_eps: float = 6.0 / 255.0,
                           seed: int = 0) -> ConflictStats:
    """Pairwise cosine statistics of per-model pixel gradients.

    ``deviation`` differentiates ||phi(x + d) - phi(x)||^2 at a small seeded
    probe perturbation d, drawn independently per model: the gradient
    vanishes at d = 0, and each architecture-specific attack evolves its own
    perturbation state. ``alignment`` differentiates
    ||phi(x) - phi(target)||^2 at the image itself.
    """
    if len(extractors) < 2:
        raise ValueError("conflict measurement needs at least 2 extractors")
    if not images:
        raise ValueError("conflict measurement needs at least one image")
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
    if loss_kind == "alignment" and target is None:
        raise ValueError("alignment conflict needs a shared target image")

    if loss_kind == "alignment":
        tset = precompute_targets(extractors, target)

    cosines, inners = [], []
    dim = None
    for idx, img in enumerate(images):
        img = np.asarray(img, dtype=np.float64)
        dim = img.size
        if loss_kind == "deviation":
            refs = precompute_targets(extractors, img)
            grads = []
            for k, e in enumerate(extractors):
                rng = Lcg64(seed * 9176 + idx * 131 + k)
                probe = (rng.uniforms(img.size).reshape(img.shape) * 2 - 1) * probe_eps
                grads.append(_loss_gradient(e, img + probe, refs[k]))
        else:
            grads = [_loss_gradient(e, img, tset[k])
                     for k, e in enumerate(extractors)]
        for i in range(len(grads)):
            for j in range(i + 1, len(grads)):
                cosines.append(cosine(grads[i], grads[j]))
                inners.append(float(np.dot(grads[i].ravel(), grads[j].ravel())))

    cosines = np.array(cosines)
    return ConflictStats(
        mean_cosine=float(cosines.mean()),
        std_cosine=float(cosines.std()),
        mean_inner=float(np.mean(inners)),
        sample_count=len(cosines),
        dimension=int(dim),
    )


@dataclass
class SynergyReport:
    mean_pair_cosine: list      # per-iteration mean pairwise cosine ([] for K=1)
    loss_curves: list           # per-model loss series
    total_loss: list            # weighted-sum series (equal weights)
    convergence_index: int      # first iteration within 10% of the final total


def synergy_report(state: PerturbationState, weights=None) -> SynergyReport:
    if not state.trace:
        raise ValueError("synergy_report needs a nonempty trace")
    k = len(state.trace[0].losses)
    if weights is None:
        weights = np.ones(k)
    loss_curves = [[rec.losses[i] for rec in state.trace] for i in range(k)]
    total = [float(np.dot(weights, rec.losses)) for rec in state.trace]
    mean_cos = []
    if k > 1:
        mean_cos = [float(np.mean(rec.pair_cosines)) for rec in state.trace]
    final = total[-1]
    threshold = final + 0.1 * abs(final)
    convergence_index = next(i for i, v in enumerate(total) if v <= threshold)
    return SynergyReport(mean_cos, loss_curves, total, convergence_index)
