"""Command-line interface: segment, eval, features, bounds, viz."""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import metrics, tensor_io
from .config import RunConfig, apply_overrides, load_config
from .features import handcrafted_features, load_external_features
from .pipeline import run_sequence
from .tensor_io import TENSOR_SUFFIX


class CliError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


def _load_run_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = load_config(args.config, config)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise CliError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    config = apply_overrides(config, overrides)
    if getattr(args, "seed", None) is not None:
        config = apply_overrides(config, {"seed": str(args.seed)})
    return config


def _frame_paths(frames_dir: Path):
    if not frames_dir.is_dir():
        raise CliError(f"frames directory not found: {frames_dir}")
    paths = sorted(frames_dir.glob("*.png"))
    if not paths:
        raise CliError(f"no PNG frames under {frames_dir}")
    return paths


class _LazyFeatures:
    """Per-frame feature tensors, loaded (and upsampled) on access."""

    def __init__(self, paths, frame_h, frame_w):
        self.paths = paths
        self.frame_h = frame_h
        self.frame_w = frame_w

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i):
        return load_external_features(self.paths[i], self.frame_h, self.frame_w)


def cmd_segment(args) -> int:
    config = _load_run_config(args)
    frame_paths = _frame_paths(Path(args.frames))
    prompt_path = Path(args.first_mask)
    if not prompt_path.is_file():
        raise CliError(f"prompt mask not found: {prompt_path}")
    prompt = tensor_io.read_mask(prompt_path)

    frames = [tensor_io.read_image(p) for p in frame_paths]
    h, w = frames[0].shape[:2]

    features_list = None
    if args.features_dir:
        fdir = Path(args.features_dir)
        tensor_paths = []
        expected_c = None
        # cheap header pass validates pairing and channel counts up front;
        # payloads load lazily, one frame at a time
        for p in frame_paths:
            tpath = fdir / (p.stem + TENSOR_SUFFIX)
            if not tpath.is_file():
                raise CliError(f"no feature tensor for frame {p.name}: expected {tpath}")
            try:
                dims = tensor_io.read_tensor_header(tpath)
            except ValueError as exc:
                raise CliError(f"bad feature tensor for frame {p.name}: {exc}")
            if len(dims) != 3:
                raise CliError(f"feature tensor for frame {p.name} must be "
                               f"(C, H, W), got dims {dims}")
            if expected_c is None:
                expected_c = dims[0]
            elif dims[0] != expected_c:
                raise CliError(
                    f"feature channel mismatch on frame {p.name}: "
                    f"got {dims[0]}, expected {expected_c}"
                )
            tensor_paths.append(tpath)
        features_list = _LazyFeatures(tensor_paths, h, w)

    result = run_sequence(frames, prompt, config, config.seed, features_list,
                          collect_confidence=bool(args.dump_confidence))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path, mask in zip(frame_paths, result.masks):
        tensor_io.write_mask(mask, out_dir / (path.stem + ".png"))
    if args.dump_confidence:
        conf_dir = out_dir / "confidence"
        conf_dir.mkdir(exist_ok=True)
        for path, stack in zip(frame_paths[1:], result.confidences):
            tensor_io.write_tensor(stack.astype(np.float32),
                                   conf_dir / (path.stem + TENSOR_SUFFIX))

    lines = [f"frames: {len(result.masks)}", f"fps: {result.fps:.3f}"]
    lines += [f"stage_ms.{k}: {v:.2f}" for k, v in sorted(result.timings_ms.items())]
    (out_dir / "timing.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_eval(args) -> int:
    report = metrics.evaluate(args.pred, args.gt, tol=args.tol)
    metrics.write_report(report, args.report)
    for m in metrics.MEASURES:
        print(f"global.{m}: {report.globals[m]:.6f}")
    return 0


def cmd_features(args) -> int:
    frame_paths = _frame_paths(Path(args.frames))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for p in frame_paths:
        fmap = handcrafted_features(tensor_io.read_image(p))
        tensor_io.write_tensor(fmap, out_dir / (p.stem + TENSOR_SUFFIX))
    print(f"wrote {len(frame_paths)} feature tensors to {out_dir}")
    return 0


def _print_terms(terms: dict, total: float) -> None:
    width = max(len(k) for k in terms)
    for name, value in terms.items():
        print(f"  {name:<{width}}  {value:.6g}")
    print(f"  {'total':<{width}}  {total:.6g}")


def cmd_bounds(args) -> int:
    if args.bound == "tree":
        terms = bounds_mod.tree_generalization_gap_terms(args.q, args.j, args.m, args.delta)
        total = bounds_mod.tree_generalization_gap(args.q, args.j, args.m, args.delta)
        print("tree generalization gap (value is sqrt((structure+confidence)/denominator)):")
    elif args.bound == "vc":
        terms = bounds_mod.relu_vc_lower_bound_terms(args.w, args.u, args.const)
        total = bounds_mod.relu_vc_lower_bound(args.w, args.u, args.const)
        print("ReLU-network VC lower bound (product of the terms below):")
    elif args.bound == "margin":
        terms = bounds_mod.maxmargin_bound_terms(args.logz, args.m, args.b, args.c,
                                                 args.rm, args.delta)
        total = bounds_mod.maxmargin_bound(args.logz, args.m, args.b, args.c,
                                           args.rm, args.delta)
        print("max-margin bound (sum of the terms below):")
    else:
        terms = bounds_mod.diversity_bound_terms(args.train_err, args.lipschitz, args.nu,
                                                 args.k, args.m, args.c, args.d,
                                                 args.gf, args.delta, args.const)
        total = bounds_mod.diversity_bound(args.train_err, args.lipschitz, args.nu,
                                           args.k, args.m, args.c, args.d,
                                           args.gf, args.delta, args.const)
        print("task-diversity bound (sum of the terms below):")
    _print_terms(terms, total)
    print("note: asymptotic constants are set by --const (default 1); values are "
          "comparative, not certified")
    return 0


def cmd_viz(args) -> int:
    tensor = tensor_io.read_tensor(args.input)
    if tensor.ndim == 2:
        stacks = [tensor]
    elif tensor.ndim == 3:
        stacks = [tensor[i] for i in range(tensor.shape[0])]
    else:
        raise CliError(f"viz expects a 2-D or 3-D tensor, got dims {tensor.shape}")

    def to_gray(conf):
        # 0 -> 0, 1 -> 255, round half up; grayscale PNG
        return np.floor(np.clip(conf, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)

    out = Path(args.out)
    if len(stacks) == 1:
        tensor_io.write_gray(to_gray(stacks[0]), out)
        print(f"wrote {out}")
    else:
        for i, plane in enumerate(stacks):
            path = out.with_name(f"{out.stem}_c{i:02d}{out.suffix}")
            tensor_io.write_gray(to_gray(plane), path)
        print(f"wrote {len(stacks)} heatmaps next to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdforest",
        description="First-frame-prompted video object segmentation and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a frame directory from a first-frame mask")
    p.add_argument("--frames", required=True, help="directory of PNG frames (lexicographic order)")
    p.add_argument("--first-mask", required=True, help="prompt mask PNG for the first frame")
    p.add_argument("--out", required=True, help="output directory for predicted masks")
    p.add_argument("--features-dir", help="optional directory of per-frame feature tensors "
                                          f"(frame stem + '{TENSOR_SUFFIX}')")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, help="override the seed")
    p.add_argument("--dump-confidence", action="store_true",
                   help="also write per-frame confidence tensors under out/confidence")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True, help="text report path (JSON twin written beside it)")
    p.add_argument("--tol", type=int, help="boundary tolerance in pixels "
                                           "(default: ceil(0.8%% of the frame diagonal))")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("features", help="write handcrafted 11-channel feature tensors")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("bounds", help="evaluate a generalization bound, term by term")
    bsub = p.add_subparsers(dest="bound", required=True)

    b = bsub.add_parser("tree", help="decision-tree generalization gap")
    b.add_argument("--q", type=float, required=True, help="tree node count")
    b.add_argument("--j", type=float, required=True, help="feature dimension")
    b.add_argument("--m", type=float, required=True, help="sample count")
    b.add_argument("--delta", type=float, default=0.05)
    b.set_defaults(func=cmd_bounds)

    b = bsub.add_parser("vc", help="ReLU-network VC lower bound")
    b.add_argument("--w", type=float, required=True, help="weight count")
    b.add_argument("--u", type=float, required=True, help="layer count")
    b.add_argument("--const", type=float, default=1.0)
    b.set_defaults(func=cmd_bounds)

    b = bsub.add_parser("margin", help="max-margin bound")
    b.add_argument("--logz", type=float, required=True, help="log normalizer")
    b.add_argument("--m", type=float, required=True)
    b.add_argument("--b", type=float, required=True, help="weight-norm bound (must exceed e/4)")
    b.add_argument("--c", type=float, required=True, help="per-pixel loss bound")
    b.add_argument("--rm", type=float, required=True, help="empirical Rademacher complexity")
    b.add_argument("--delta", type=float, default=0.05)
    b.set_defaults(func=cmd_bounds)

    b = bsub.add_parser("diversity", help="task-diversity bound")
    b.add_argument("--train-err", type=float, required=True)
    b.add_argument("--lipschitz", type=float, required=True)
    b.add_argument("--nu", type=float, required=True)
    b.add_argument("--k", type=int, required=True, help="task (video) count")
    b.add_argument("--m", type=float, required=True)
    b.add_argument("--c", type=float, required=True, help="loss bound")
    b.add_argument("--d", type=float, required=True, help="feature norm bound")
    b.add_argument("--gf", type=float, required=True, help="Gaussian complexity")
    b.add_argument("--delta", type=float, default=0.05)
    b.add_argument("--const", type=float, default=1.0)
    b.set_defaults(func=cmd_bounds)

    p = sub.add_parser("viz", help="render a confidence tensor as grayscale heatmap PNGs")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_viz)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
