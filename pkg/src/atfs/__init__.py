"""Feature-synergy adversarial perturbations against heterogeneous toy extractors."""

from .attack import (
    AttackConfig,
    PerturbationState,
    TargetSet,
    aggregate,
    alignment_loss,
    evaluate_alignment,
    normalize_gradient,
    pgd_step,
    precompute_targets,
    run_atfs,
    run_attack,
    run_naive_joint,
    run_pcgrad,
    run_single_pgd,
)
from .diagnostics import ConflictStats, cosine, measure_pixel_conflict, synergy_report
from .estimators import FeatureSynergyAttack
from .extractors import (
    Codebook,
    FeatureExtractor,
    build_gan_proxy,
    build_vae_proxy,
    build_vqvae_proxy,
    extract,
    parse_extractor_spec,
)
from .metrics import MetricReport, metric_report, ms_ssim, perturbation_norms, psnr
from .patterns import PatternSpec, gen_moire, gen_stripes, gen_texture
from .robustness import (
    TransformSpec,
    add_gaussian_noise,
    jpeg_approx,
    parse_transform_spec,
    rescale,
)
from .tensor import ShapeError, Tensor

__all__ = [name for name in dir() if not name.startswith("_")]
