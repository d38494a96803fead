"""Command-line surface: every capability behind one reproducible entry.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric error,
5 tolerance failure. ``COMPZSL_PACK_DIR`` supplies the default ``--pack``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import LOSS_SETS, RunConfig, load_config, seed_streams
from .errors import (
    CompzslError,
    ConfigError,
    DataError,
    NumericError,
    ToleranceError,
)
from .gradcheck import grad_check
from .inference import evaluate, retrieve
from .model import batch_objective, build_model, load_model, save_model
from .packs import SynthSpec, format_stats, generate_synthetic, load_pack, pack_stats, save_pack
from .train import train

PACK_DIR_ENV = "COMPZSL_PACK_DIR"

_GRAPH_FLAGS = {
    "vanilla": "vanilla_random",
    "sparse": "sparse_random",
    "link": "link",
    "embedding": "embedding",
    "none": "none",
}


def _pack_path(args) -> Path:
    if args.pack is not None:
        return Path(args.pack)
    env = os.environ.get(PACK_DIR_ENV)
    if env:
        return Path(env)
    raise ConfigError(f"no pack directory: pass --pack or set {PACK_DIR_ENV}")


def _resolved_config(args) -> RunConfig:
    """Config file, then flag overrides, then ablation rewrites."""
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for flag, key in (
        ("seed", "seed"), ("lr", "lr"), ("epochs", "epochs"),
        ("batch_size", "batch_size"), ("latent_dim", "latent_dim"),
        ("eval_batch_size", "eval_batch_size"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            overrides[key] = v
    if getattr(args, "no_cluster", False):
        overrides["clustering_enabled"] = False
    if getattr(args, "no_cluster_eval", False):
        overrides["clustering_at_eval"] = False
    if getattr(args, "graph", None) is not None:
        overrides["graph_kind"] = _GRAPH_FLAGS[args.graph]
    if overrides:
        config = replace(config, **overrides)
    if getattr(args, "loss", None) is not None:
        config = config.with_loss_set(args.loss)
    if getattr(args, "gcn_layers", None) is not None:
        config = config.with_gcn_layers(args.gcn_layers)
    return config


def cmd_gen_synth(args) -> int:
    spec = SynthSpec(
        attribute_count=args.attrs,
        object_count=args.objs,
        seen_count=args.seen,
        unseen_count=args.unseen,
        images_per_composition=args.per_comp,
        visual_dim=args.visual_dim,
        embed_dim=args.embed_dim,
        noise_std=args.noise_std,
        seed=args.seed if args.seed is not None else 0,
    )
    pack = generate_synthetic(spec)
    save_pack(pack, args.out)
    print(f"wrote {len(pack.images)} images to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _resolved_config(args)
    pack = load_pack(_pack_path(args))
    lines: list[str] = []

    def log_fn(line: str) -> None:
        lines.append(line)
        print(line)

    result = train(pack, config, log_fn=log_fn)
    out = Path(args.out)
    save_model(result.model, out)
    (out / "train.log").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"saved model to {out}")
    return 0


def cmd_eval(args) -> int:
    pack = load_pack(_pack_path(args))
    model = load_model(args.model)
    overrides = {}
    if args.eval_batch_size is not None:
        overrides["eval_batch_size"] = args.eval_batch_size
    if args.no_cluster_eval:
        overrides["clustering_at_eval"] = False
    if overrides:
        model.config = replace(model.config, **overrides)
    report = evaluate(model, pack)
    if args.metric == "closed":
        print(f"closed top-1:   {report.closed_top1:.2f}%")
    elif args.metric == "open":
        print(f"open top-1:     {report.open_top1:.2f}%")
    else:
        print(report.table())
    print(json.dumps(report.to_dict()))
    return 0


def parse_query(query: str) -> tuple[list[str], str]:
    """``attr1,attr2:object`` to (attribute names, object name)."""
    if query.count(":") != 1:
        raise ConfigError(f"query must look like 'attr1,attr2:object', got {query!r}")
    left, obj = (s.strip() for s in query.split(":"))
    attrs = [a.strip() for a in left.split(",") if a.strip()]
    if not attrs or not obj:
        raise ConfigError(f"query must name at least one attribute and an object, got {query!r}")
    return attrs, obj


def cmd_retrieve(args) -> int:
    pack = load_pack(_pack_path(args))
    model = load_model(args.model)
    attrs, obj = parse_query(args.query)
    hits = retrieve(model, pack, attrs, obj, top_k=args.topk)
    for h in hits:
        print(f"{h.image_id}\t{h.distance:.6f}")
    return 0


def cmd_gradcheck(args) -> int:
    config = _resolved_config(args)
    pack = load_pack(_pack_path(args))
    model = build_model(pack, config)
    rows = [i for i, im in enumerate(pack.images) if im.split == "train"]
    take = rows[: args.batch]
    if not take:
        raise DataError("gradient check needs at least one training image")
    x0 = pack.visual.astype(np.float64)[take]
    labels = [pack.images[i].composition for i in take]
    rng = seed_streams(config.seed)["negative"]
    loss_fn = batch_objective(model, pack, x0, labels, rng)
    report = grad_check(loss_fn, model.parameters(), eps=args.eps, tol=args.tol,
                        max_entries=args.max_entries, seed=config.seed)
    print(report.summary())
    if not report.passed:
        raise ToleranceError(
            f"gradient check failed: max relative error {report.max_rel_error:.3e} "
            f"exceeds {args.tol:.1e}"
        )
    return 0


def cmd_stats(args) -> int:
    pack = load_pack(_pack_path(args))
    print(format_stats(pack_stats(pack)))
    return 0


def _add_pack_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pack", help=f"pack directory (default: ${PACK_DIR_ENV})")


def _add_config_flags(p: argparse.ArgumentParser, ablations: bool) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--latent-dim", dest="latent_dim", type=int)
    p.add_argument("--eval-batch-size", dest="eval_batch_size", type=int)
    if ablations:
        p.add_argument("--no-cluster", action="store_true",
                       help="disable composition clustering")
        p.add_argument("--graph", choices=sorted(_GRAPH_FLAGS),
                       help="graph construction")
        p.add_argument("--loss", choices=LOSS_SETS, help="active loss terms")
        p.add_argument("--gcn-layers", dest="gcn_layers", type=int,
                       choices=(1, 2, 3, 4), help="linguistic pathway depth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compzsl",
        description="Two-pathway graph model for unseen attribute-object compositions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic feature pack")
    p.add_argument("--out", required=True)
    p.add_argument("--attrs", type=int, default=6)
    p.add_argument("--objs", type=int, default=6)
    p.add_argument("--seen", type=int, default=20)
    p.add_argument("--unseen", type=int, default=8)
    p.add_argument("--per-comp", dest="per_comp", type=int, default=50)
    p.add_argument("--visual-dim", dest="visual_dim", type=int, default=16)
    p.add_argument("--embed-dim", dest="embed_dim", type=int, default=12)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.1)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_gen_synth)

    p = sub.add_parser("train", help="train a model on a pack")
    _add_pack_flag(p)
    p.add_argument("--out", required=True, help="model output directory")
    _add_config_flags(p, ablations=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    _add_pack_flag(p)
    p.add_argument("--model", required=True)
    p.add_argument("--metric", choices=("closed", "open", "both"), default="both")
    p.add_argument("--eval-batch-size", dest="eval_batch_size", type=int)
    p.add_argument("--no-cluster-eval", dest="no_cluster_eval", action="store_true",
                   help="skip clustering at inference")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("retrieve", help="rank test images against a query")
    _add_pack_flag(p)
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True, help="attr1,attr2:object")
    p.add_argument("--topk", type=int, default=5)
    p.set_defaults(fn=cmd_retrieve)

    p = sub.add_parser("gradcheck", help="finite-difference check of the objective")
    _add_pack_flag(p)
    _add_config_flags(p, ablations=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--max-entries", dest="max_entries", type=int, default=200)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("stats", help="summarize a pack")
    _add_pack_flag(p)
    p.set_defaults(fn=cmd_stats)

    return parser


_EXIT_CODES = (
    (ConfigError, 2),
    (DataError, 3),
    (ToleranceError, 5),
    (NumericError, 4),
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CompzslError as e:
        for cls, code in _EXIT_CODES:
            if isinstance(e, cls):
                print(f"error: {e}", file=sys.stderr)
                return code
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
