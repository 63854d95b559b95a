"""Command-line harness: attack runs, sweeps, robustness and conflict reports.

Subcommands: attack, sweep-budget, robustness, conflict, gen-pattern.
``--eps`` and ``--alpha`` are given in 1/255 units. Image arguments accept
"file:PATH.png" (or a bare path), "fixture:N" for the bundled procedural
face images, and targets additionally accept "pattern:stripes:PERIOD",
"pattern:moire:A1:A2" or "pattern:texture:SEED".

Config files are flat ``key=value`` lines (same keys as the long flags);
explicit command-line flags override file values. Exit codes: 0 success,
1 usage error, 2 runtime/numerical error.

All CSV files start with a schema version comment line; with a fixed seed
and fixed inputs every output file is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from .attack import AttackConfig, evaluate_alignment, precompute_targets, run_attack
from .diagnostics import measure_pixel_conflict, synergy_report
from .extractors import parse_extractor_spec
from .fixtures import FIXTURE_COUNT, face_image
from .imageio import load_png, save_png
from .metrics import ms_ssim, perturbation_norms, psnr
from .patterns import parse_pattern_spec
from .robustness import parse_transform_spec
from .rng import Lcg64
from .validation import check_image

CSV_SCHEMA = "# atfs-csv v1"

_METHOD_ALIASES = {"atfs": "atfs", "naive": "naive_joint",
                   "naive_joint": "naive_joint", "pcgrad": "pcgrad",
                   "single": "single_pgd", "single_pgd": "single_pgd"}


class UsageError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def _write_csv(path: str, header: list, rows: list):
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _resolve_image(spec: str, h: int, w: int) -> np.ndarray:
    if spec.startswith("fixture:"):
        idx = int(spec.split(":", 1)[1])
        if not 0 <= idx < FIXTURE_COUNT:
            raise UsageError(f"fixture index must be in [0, {FIXTURE_COUNT - 1}]")
        return face_image(idx, h, w)
    if spec.startswith("pattern:"):
        return parse_pattern_spec(spec.split(":", 1)[1]).generate(h, w)
    path = spec.split(":", 1)[1] if spec.startswith("file:") else spec
    if not os.path.exists(path):
        raise UsageError(f"input file {path!r} does not exist")
    return load_png(path)


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise UsageError(f"config file {path!r} does not exist")
    values = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atfs", add_help=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", default="fixture:0")
        p.add_argument("--target", default="pattern:moire:0:45")
        p.add_argument("--models", default="vae_proxy:1,gan_proxy:2")
        p.add_argument("--method", default="atfs",
                       choices=sorted(_METHOD_ALIASES))
        p.add_argument("--eps", type=float, default=6.0, help="in 1/255 units")
        p.add_argument("--alpha", type=float, default=None,
                       help="in 1/255 units; default eps/10")
        p.add_argument("--steps", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--size", type=int, default=32, help="image H=W for generated inputs")
        p.add_argument("--config", default=None, help="key=value config file")

    p = sub.add_parser("attack")
    common(p)
    p = sub.add_parser("sweep-budget")
    common(p)
    p.add_argument("--eps-list", default="2,4,8,16", help="comma list, 1/255 units")
    p = sub.add_parser("robustness")
    common(p)
    p.add_argument("--transforms", default="",
                   help="comma list, e.g. jpeg:75,noise:0.05:3,rescale:0.5")
    p = sub.add_parser("conflict")
    common(p)
    p.add_argument("--num-images", type=int, default=100)
    p = sub.add_parser("gen-pattern")
    p.add_argument("--spec", required=True,
                   help="stripes:PERIOD | moire:A1:A2 | texture:SEED")
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--out", required=True)
    return parser


def _apply_config_file(args: argparse.Namespace, argv: list):
    if not getattr(args, "config", None):
        return
    file_values = _load_config_file(args.config)
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, val in file_values.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, int) and not isinstance(current, bool):
            val = int(val)
        elif isinstance(current, float):
            val = float(val)
        setattr(args, key, val)


def _setup(args):
    size = args.size
    extractors = [parse_extractor_spec(s.strip(), size, size)
                  for s in args.models.split(",") if s.strip()]
    if not extractors:
        raise UsageError("--models must name at least one extractor")
    if not 0.0 < args.eps / 255.0 <= 1.0:
        raise UsageError(f"--eps must be in (0, 255], got {args.eps}")
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    x = check_image(_resolve_image(args.input, size, size), "input")
    target = check_image(_resolve_image(args.target, size, size), "target")
    if x.shape != target.shape:
        raise UsageError(f"input {x.shape} and target {target.shape} differ")
    config = AttackConfig(
        epsilon=args.eps / 255.0,
        alpha=None if args.alpha is None else args.alpha / 255.0,
        steps=args.steps,
        method=_METHOD_ALIASES[args.method],
        seed=args.seed,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    return extractors, x, target, config


REPORT_HEADER = [
    "method", "seed", "eps", "alpha", "steps", "initial_losses",
    "final_losses", "initial_total", "final_total", "convergence_index",
    "mean_pair_cosine", "linf_pre_quant", "l2_pre_quant", "linf_post_quant",
    "psnr_db", "ms_ssim",
]


def _attack_once(extractors, x, target, config, out_dir, tag=""):
    t_start = time.perf_counter()
    x_adv, state = run_attack(extractors, x, target, config)
    wall = time.perf_counter() - t_start
    targets = precompute_targets(extractors, target)
    init_losses, init_total = evaluate_alignment(extractors, x, targets)
    final_losses, final_total = evaluate_alignment(extractors, x_adv, targets)
    linf, l2 = perturbation_norms(x, x_adv)

    if state.trace:
        report = synergy_report(state)
        conv_idx = report.convergence_index
        mean_cos = (float(np.mean(report.mean_pair_cosine))
                    if report.mean_pair_cosine else 0.0)
    else:
        conv_idx, mean_cos = 0, 0.0

    suffix = f"_{tag}" if tag else ""
    adv_path = os.path.join(out_dir, f"adv{suffix}.png")
    save_png(x_adv, adv_path)
    x_adv_q = load_png(adv_path)
    linf_q, _ = perturbation_norms(x, x_adv_q)

    trace_rows = []
    for i, rec in enumerate(state.trace):
        trace_rows.append([
            i,
            ";".join(_fmt(v) for v in rec.losses),
            ";".join(_fmt(v) for v in rec.grad_norms),
            ";".join(_fmt(v) for v in rec.pair_cosines),
        ])
    _write_csv(os.path.join(out_dir, f"trace{suffix}.csv"),
               ["iteration", "losses", "grad_norms", "pair_cosines"], trace_rows)

    row = [
        config.method, config.seed, config.epsilon, config.resolved_alpha(),
        config.steps,
        ";".join(_fmt(v) for v in init_losses),
        ";".join(_fmt(v) for v in final_losses),
        init_total, final_total, conv_idx, mean_cos,
        linf, l2, linf_q,
        psnr(x, x_adv), ms_ssim(x, x_adv),
    ]
    print(f"[{config.method}{suffix or ''}] total loss {init_total:.4f} -> "
          f"{final_total:.4f}, linf {linf:.5f}, {wall:.2f}s", file=sys.stderr)
    return x_adv, row


def cmd_attack(args) -> int:
    extractors, x, target, config = _setup(args)
    _, row = _attack_once(extractors, x, target, config, args.out_dir)
    _write_csv(os.path.join(args.out_dir, "report.csv"), REPORT_HEADER, [row])
    return 0


def cmd_sweep_budget(args) -> int:
    extractors, x, target, config = _setup(args)
    eps_values = [float(v) for v in args.eps_list.split(",") if v.strip()]
    if not eps_values:
        raise UsageError("--eps-list must be a nonempty comma list")
    rows = []
    for eps in eps_values:
        cfg = AttackConfig(epsilon=eps / 255.0, alpha=config.alpha,
                           steps=config.steps, method=config.method,
                           seed=config.seed)
        tag = f"eps{_fmt(eps)}"
        _, row = _attack_once(extractors, x, target, cfg, args.out_dir, tag)
        rows.append(row)
    _write_csv(os.path.join(args.out_dir, "report.csv"), REPORT_HEADER, rows)
    return 0


def cmd_robustness(args) -> int:
    specs = [parse_transform_spec(s.strip())
             for s in args.transforms.split(",") if s.strip()]
    if not specs:
        raise UsageError("--transforms must name at least one transform")
    extractors, x, target, config = _setup(args)
    x_adv, row = _attack_once(extractors, x, target, config, args.out_dir)
    targets = precompute_targets(extractors, target)
    _, init_total = evaluate_alignment(extractors, x, targets)
    _, adv_total = evaluate_alignment(extractors, x_adv, targets)
    reduction = init_total - adv_total

    rows = []
    for spec in specs:
        transformed = spec.apply(x_adv)
        _, t_total = evaluate_alignment(extractors, transformed, targets)
        retained = init_total - t_total
        retention_pct = 100.0 * retained / reduction if reduction != 0 else math.inf
        rows.append([spec.label(), init_total, adv_total, t_total,
                     retained, retention_pct])
    _write_csv(os.path.join(args.out_dir, "robustness.csv"),
               ["transform", "initial_total", "adv_total", "transformed_total",
                "retained_reduction", "retention_pct"], rows)
    _write_csv(os.path.join(args.out_dir, "report.csv"), REPORT_HEADER, [row])
    return 0


def cmd_conflict(args) -> int:
    extractors, _, target, config = _setup(args)
    if len(extractors) < 2:
        raise UsageError("conflict needs at least 2 extractors")
    size = args.size
    images = []
    for i in range(args.num_images):
        rng = Lcg64(config.seed * 7919 + i)
        images.append(rng.uniforms(3 * size * size).reshape(3, size, size))
    rows = []
    for kind in ("deviation", "alignment"):
        stats = measure_pixel_conflict(
            extractors, images, kind,
            target=target if kind == "alignment" else None,
            probe_eps=config.epsilon, seed=config.seed)
        rows.append([kind, stats.mean_cosine, stats.std_cosine,
                     stats.mean_inner, stats.sample_count, stats.dimension])
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "conflict.csv"),
               ["loss_kind", "mean_cosine", "std_cosine", "mean_inner",
                "sample_count", "dimension"], rows)
    return 0


def cmd_gen_pattern(args) -> int:
    img = parse_pattern_spec(args.spec).generate(args.size, args.size)
    out_dir = os.path.dirname(args.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    save_png(img, args.out)
    return 0


_COMMANDS = {
    "attack": cmd_attack,
    "sweep-budget": cmd_sweep_budget,
    "robustness": cmd_robustness,
    "conflict": cmd_conflict,
    "gen-pattern": cmd_gen_pattern,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    parser.__class__ = _Parser
    for sp in parser._subparsers._group_actions[0].choices.values():
        sp.__class__ = _Parser
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args, argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
