"""Command-line entry: exit 0 success, 2 bad invocation, 3 bad inputs."""

from __future__ import annotations

import argparse
import logging
import sys

from .backbone import BACKBONES
from .errors import InputError, JobError
from .export import ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fpexport",
        description="Export an image folder plus label list into a feature pack.",
    )
    p.add_argument("--images", required=True, help="image root directory")
    p.add_argument("--labels", required=True,
                   help="tab-separated label list: path, attrs, object, split")
    p.add_argument("--embeddings", required=True,
                   help="word-embedding table (token then floats per line)")
    p.add_argument("--out", required=True, help="pack output directory")
    p.add_argument("--backbone", choices=BACKBONES, default="resnet18")
    p.add_argument("--weights", help="local backbone checkpoint")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the resnet18-random variant")
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    job = ExportJob(
        image_root=args.images,
        labels_path=args.labels,
        embeddings_path=args.embeddings,
        out_dir=args.out,
        backbone=args.backbone,
        weights_path=args.weights,
        seed=args.seed,
    )
    try:
        stats = export(job)
    except JobError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(
        f"wrote {stats['images']} images "
        f"({stats['attributes']} attributes, {stats['objects']} objects, "
        f"visual {stats['visual_dim']}, embed {stats['embed_dim']}) "
        f"to {args.out}; skipped {stats['skipped']}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
