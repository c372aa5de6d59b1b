"""Command line entry point.

    featx --input DIR --backbone NAME --out FILE [options]

Exit codes: 0 success, 2 bad configuration, 3 unreadable input or
unavailable weights.
"""

from __future__ import annotations

import argparse
import sys

from .backbones import (
    BACKBONE_INCEPTION,
    BACKBONE_VIT,
    WEIGHTS_PRETRAINED,
    WEIGHTS_RANDOM,
)
from .errors import ConfigError, DataError, ExtractorError, WeightsError
from .extract import ExtractionJob, extract

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featx",
        description="Embed a directory of images into an FVEC feature file.",
    )
    parser.add_argument("--input", required=True, metavar="DIR",
                        help="directory holding the images")
    parser.add_argument("--backbone", required=True,
                        choices=[BACKBONE_INCEPTION, BACKBONE_VIT],
                        help="feature encoder to run")
    parser.add_argument("--out", required=True, metavar="FILE",
                        help="FVEC output path")
    parser.add_argument("--batch-size", type=int, default=32,
                        help="images per inference batch (default 32)")
    parser.add_argument("--weights", default=WEIGHTS_PRETRAINED,
                        choices=[WEIGHTS_PRETRAINED, WEIGHTS_RANDOM],
                        help="pretrained checkpoint or seeded random init")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for random weights (default 0)")
    parser.add_argument("--manifest", metavar="FILE",
                        help="manifest path (default: OUT.manifest.json)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        job = ExtractionJob(
            input_dir=args.input,
            backbone=args.backbone,
            output=args.out,
            batch_size=args.batch_size,
            weights=args.weights,
            seed=args.seed,
            manifest=args.manifest,
        )
        result = extract(job)
    except ConfigError as exc:
        print(f"featx: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, WeightsError, OSError) as exc:
        print(f"featx: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExtractorError as exc:
        print(f"featx: {exc}", file=sys.stderr)
        return EXIT_DATA
    if result.skipped:
        names = ", ".join(result.skipped)
        print(
            f"featx: skipped {len(result.skipped)} of {result.images_found} "
            f"images: {names}",
            file=sys.stderr,
        )
    print(
        f"wrote {result.rows_written} rows x {result.dim} dims to "
        f"{result.output} (manifest: {result.manifest})"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
