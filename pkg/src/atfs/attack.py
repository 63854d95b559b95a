"""Targeted feature-synergy attack and its baselines.

All methods share the same PGD skeleton: per extractor, compute a pixel
gradient of a per-model loss, aggregate across models, take a signed step,
and clip the perturbation to the L-inf ball of radius epsilon.

Per-model losses:

* ``atfs`` / ``single_pgd``: squared L2 distance between the perturbed
  image's features and the fixed target features (minimised).
* ``naive_joint`` / ``pcgrad``: negated squared feature deviation from the
  clean image's own features (descending this maximises deviation). These
  start from a seeded uniform perturbation because the deviation loss has a
  vanishing gradient at delta = 0.

``atfs`` L2-normalises each model's gradient before the weighted sum;
``naive_joint`` sums raw gradients; ``pcgrad`` projects conflicting raw
gradients pairwise before summing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .extractors import FeatureExtractor
from .rng import Lcg64
from .tensor import ShapeError, Tensor, sq_l2_norm, sub

METHODS = ("atfs", "naive_joint", "pcgrad", "single_pgd")


class NumericalError(RuntimeError):
    pass


@dataclass
class AttackConfig:
    epsilon: float = 6.0 / 255.0
    alpha: float | None = None  # None -> epsilon / 10
    steps: int = 100
    weights: tuple | None = None  # None -> equal weights
    xi: float = 1e-8
    method: str = "atfs"
    seed: int = 0

    def resolved_alpha(self) -> float:
        return self.epsilon / 10.0 if self.alpha is None else self.alpha

    def resolved_weights(self, k: int) -> np.ndarray:
        if self.weights is None:
            w = np.ones(k)
        else:
            w = np.asarray(self.weights, dtype=np.float64)
        if len(w) != k:
            raise ValueError(f"{len(w)} weights for {k} extractors")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive sum")
        return w

    def validate(self, k: int):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.resolved_alpha() <= 0:
            raise ValueError("alpha must be positive")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        self.resolved_weights(k)


@dataclass
class IterationRecord:
    losses: tuple          # per-model loss at the start of the iteration
    grad_norms: tuple      # per-model raw gradient L2 norms
    pair_cosines: tuple    # cosine of every (i < j) normalised-gradient pair


@dataclass
class PerturbationState:
    delta: np.ndarray
    iteration: int = 0
    trace: list = field(default_factory=list)


class TargetSet:
    """Fixed per-extractor target feature vectors."""

    def __init__(self, targets: list):
        self.targets = [np.asarray(t, dtype=np.float64) for t in targets]

    def __len__(self):
        return len(self.targets)

    def __getitem__(self, k):
        return self.targets[k]


def precompute_targets(extractors: list, x_tgt: np.ndarray) -> TargetSet:
    targets = []
    for e in extractors:
        f = e.extract(Tensor(np.asarray(x_tgt, dtype=np.float64)))
        targets.append(f.data.copy())
    return TargetSet(targets)


def alignment_loss(f: Tensor, t) -> Tensor:
    """||f - t||_2^2 as a tape-linked scalar."""
    t = t if isinstance(t, Tensor) else Tensor(t)
    if f.shape != t.shape:
        raise ShapeError(f"alignment_loss: shapes {f.shape} vs {t.shape}")
    return sq_l2_norm(sub(f, t))


def normalize_gradient(g: np.ndarray, xi: float) -> np.ndarray:
    if xi <= 0:
        raise ValueError("xi must be positive")
    return g / (np.linalg.norm(g) + xi)


def aggregate(normed_grads: list, weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if len(normed_grads) != len(weights):
        raise ValueError(
            f"{len(normed_grads)} gradients but {len(weights)} weights")
    out = np.zeros_like(normed_grads[0])
    for w, g in zip(weights, normed_grads):
        out += w * g
    return out


def pgd_step(delta: np.ndarray, g_syn: np.ndarray, alpha: float,
             epsilon: float) -> np.ndarray:
    """delta' = clip(delta - alpha * sign(g_syn), -eps, eps); sign(0) = 0."""
    return np.clip(delta - alpha * np.sign(g_syn), -epsilon, epsilon)


def pcgrad_project(grads: list, rng: Lcg64) -> list:
    """Project each gradient off every conflicting one, in a random order."""
    k = len(grads)
    out = []
    for i in range(k):
        gi = grads[i].copy()
        order = rng.shuffle([j for j in range(k) if j != i])
        for j in order:
            gj = grads[j]
            dot = float(np.dot(gi.ravel(), gj.ravel()))
            nj2 = float(np.dot(gj.ravel(), gj.ravel()))
            if dot < 0 and nj2 > 0:
                gi = gi - (dot / nj2) * gj
        out.append(gi)
    return out


def _pixel_gradient(extractor: FeatureExtractor, point: np.ndarray,
                    loss_fn) -> tuple[float, np.ndarray]:
    """Loss value and its gradient with respect to the image ``point``."""
    leaf = Tensor(point, requires_grad=True)
    loss = loss_fn(extractor.extract(leaf))
    loss.backward()
    return float(loss.data), leaf.grad.copy()


def _pair_cosines(normed: list) -> tuple:
    cos = []
    for i in range(len(normed)):
        for j in range(i + 1, len(normed)):
            a, b = normed[i].ravel(), normed[j].ravel()
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            cos.append(float(np.dot(a, b) / (na * nb)) if na > 0 and nb > 0 else 0.0)
    return tuple(cos)


def run_attack(extractors: list, x: np.ndarray, x_tgt: np.ndarray | None,
               config: AttackConfig) -> tuple[np.ndarray, PerturbationState]:
    """Dispatch on ``config.method``; returns (x_adv, state)."""
    x = np.asarray(x, dtype=np.float64)
    k = len(extractors)
    if k == 0:
        raise ValueError("need at least one extractor")
    config.validate(k)
    weights = config.resolved_weights(k)
    alpha = config.resolved_alpha()
    eps = config.epsilon
    method = config.method

    targeted = method in ("atfs", "single_pgd")
    if targeted:
        if x_tgt is None:
            raise ValueError(f"{method} requires a target image")
        targets = precompute_targets(extractors, x_tgt)
        loss_fns = [lambda f, t=targets[i]: alignment_loss(f, t)
                    for i in range(k)]
        delta = np.zeros_like(x)
    else:
        # deviation losses have zero gradient at delta = 0: seeded random start
        refs = precompute_targets(extractors, x)
        loss_fns = [lambda f, t=refs[i]: -1.0 * alignment_loss(f, t)
                    for i in range(k)]
        rng0 = Lcg64(config.seed * 2654435761 + 77)
        delta = (rng0.uniforms(x.size).reshape(x.shape) * 2.0 - 1.0) * eps

    proj_rng = Lcg64(config.seed * 1000003 + 11)
    state = PerturbationState(delta=delta)

    for t in range(config.steps):
        losses, grads = [], []
        for i, e in enumerate(extractors):
            lv, g = _pixel_gradient(e, x + state.delta, loss_fns[i])
            if not (np.isfinite(lv) and np.all(np.isfinite(g))):
                raise NumericalError(f"non-finite loss/gradient at iteration {t}")
            losses.append(lv)
            grads.append(g)

        normed = [normalize_gradient(g, config.xi) for g in grads]
        if method == "atfs":
            g_syn = aggregate(normed, weights)
        elif method == "naive_joint":
            g_syn = aggregate(grads, weights)
        elif method == "pcgrad":
            g_syn = aggregate(pcgrad_project(grads, proj_rng), weights)
        else:  # single_pgd
            if k != 1:
                raise ValueError("single_pgd takes exactly one extractor")
            g_syn = grads[0]

        state.trace.append(IterationRecord(
            losses=tuple(losses),
            grad_norms=tuple(float(np.linalg.norm(g)) for g in grads),
            pair_cosines=_pair_cosines(normed),
        ))
        state.delta = pgd_step(state.delta, g_syn, alpha, eps)
        state.iteration = t + 1

    x_adv = np.clip(x + state.delta, 0.0, 1.0)
    return x_adv, state


def _forced(config: AttackConfig, method: str) -> AttackConfig:
    if config.method != method:
        raise ValueError(f"config.method is {config.method!r}, expected {method!r}")
    return config


def run_atfs(extractors, x, x_tgt, config: AttackConfig):
    return run_attack(extractors, x, x_tgt, _forced(config, "atfs"))


def run_naive_joint(extractors, x, x_tgt_or_none, config: AttackConfig):
    return run_attack(extractors, x, x_tgt_or_none, _forced(config, "naive_joint"))


def run_pcgrad(extractors, x, x_tgt, config: AttackConfig):
    # x_tgt is accepted for interface symmetry; the pcgrad baseline optimises
    # the same deviation surrogate as naive_joint
    return run_attack(extractors, x, x_tgt, _forced(config, "pcgrad"))


def run_single_pgd(extractor, x, x_tgt, config: AttackConfig):
    return run_attack([extractor], x, x_tgt, _forced(config, "single_pgd"))


def evaluate_alignment(extractors: list, img: np.ndarray,
                       targets: TargetSet, weights=None) -> tuple:
    """Per-model alignment losses of ``img`` plus their weighted sum."""
    if weights is None:
        weights = np.ones(len(extractors))
    losses = []
    for e, t in zip(extractors, targets.targets):
        f = e.extract(Tensor(np.asarray(img, dtype=np.float64)))
        losses.append(float(np.sum((f.data - t) ** 2)))
    total = float(np.dot(weights, losses))
    return tuple(losses), total
