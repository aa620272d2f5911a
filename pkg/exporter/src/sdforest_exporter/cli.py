"""CLI: mirror of the core's `features` command, deep-feature flavored."""

import argparse
import sys

from .export import export_features


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdforest-export",
        description="Export 219-channel EfficientNet-B0 feature tensors per frame",
    )
    parser.add_argument("--frames", required=True, help="directory of PNG frames")
    parser.add_argument("--out", required=True, help="output directory for .sdft tensors")
    parser.add_argument("--backbone", default="efficientnet_b0",
                        help="backbone identifier (the tap list is defined for "
                             "efficientnet_b0)")
    parser.add_argument("--target-size", type=int, default=None,
                        help="square tap grid size (default: quarter of each frame)")
    parser.add_argument("--no-pretrained", action="store_true",
                        help="randomly initialized backbone (smoke runs without weights)")
    parser.add_argument("--seed", type=int, default=0,
                        help="weight init seed when --no-pretrained is set")
    args = parser.parse_args(argv)
    try:
        count = export_features(args.frames, args.out, backbone=args.backbone,
                                target_size=args.target_size,
                                pretrained=not args.no_pretrained, seed=args.seed)
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} feature tensors to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
