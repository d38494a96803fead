#!/usr/bin/env python3
"""One-factor-at-a-time ablation sweep on a feature pack.

Each factor (clustering, graph construction, loss set, linguistic
pathway depth, batch size) is varied against a fixed baseline; every
cell reports closed/open top-1 and their harmonic mean, averaged over
seeds. Results go to stdout as a table and optionally to a JSON file.

    python3 scripts/run_ablations.py --synth --quick
    python3 scripts/run_ablations.py --pack packs/synth --out results.json
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from compzsl.config import RunConfig
from compzsl.inference import evaluate
from compzsl.packs import SynthSpec, generate_synthetic, load_pack
from compzsl.train import train


def baseline_config(args) -> RunConfig:
    return RunConfig(
        seed=0, lr=args.lr, epochs=args.epochs, batch_size=64,
        latent_dim=48, encoder_hidden=(32,), decoder_hidden=(32,),
        gcn_hidden=(48,), eval_batch_size=args.eval_batch_size,
    )


def cells(base: RunConfig) -> list[tuple[str, str, RunConfig]]:
    out: list[tuple[str, str, RunConfig]] = [("baseline", "sparse+all+cluster", base)]
    out.append(("clustering", "off",
                RunConfig(**{**base.to_dict(), "clustering_enabled": False})))
    for kind in ("vanilla_random", "link", "embedding", "none"):
        out.append(("graph", kind,
                    RunConfig(**{**base.to_dict(), "graph_kind": kind})))
    for loss_set in ("fus", "fus+tri", "fus+de"):
        out.append(("losses", loss_set, base.with_loss_set(loss_set)))
    for layers in (1, 2, 3):
        out.append(("gcn depth", str(layers), base.with_gcn_layers(layers)))
    for bs in (32, 128):
        out.append(("batch size", str(bs),
                    RunConfig(**{**base.to_dict(), "batch_size": bs})))
    return out


def run_cell(pack, config: RunConfig, seeds: list[int]) -> dict:
    closed, open_, hm = [], [], []
    for seed in seeds:
        cfg = RunConfig(**{**config.to_dict(), "seed": seed})
        report = evaluate(train(pack, cfg).model, pack)
        closed.append(report.closed_top1)
        open_.append(report.open_top1)
        hm.append(report.h_mean)
    return {
        "closed": float(np.mean(closed)),
        "open": float(np.mean(open_)),
        "h_mean": float(np.mean(hm)),
        "closed_per_seed": closed,
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pack", help="feature pack directory")
    ap.add_argument("--synth", action="store_true",
                    help="generate the standard synthetic task instead")
    ap.add_argument("--seeds", default="7,8,9", help="comma-separated seeds")
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--lr", type=float, default=3e-3)
    ap.add_argument("--eval-batch-size", type=int, default=50,
                    help="0 keeps the training batch size at inference")
    ap.add_argument("--quick", action="store_true",
                    help="one seed, 10 epochs, for a fast smoke run")
    ap.add_argument("--out", help="write results as JSON")
    args = ap.parse_args()

    if args.quick:
        args.seeds, args.epochs = "7", 10
    seeds = [int(s) for s in args.seeds.split(",")]

    if args.synth or not args.pack:
        pack = generate_synthetic(SynthSpec(
            attribute_count=6, object_count=6, seen_count=20, unseen_count=8,
            images_per_composition=50, visual_dim=16, embed_dim=12,
            noise_std=0.1, seed=7))
        print("synthetic task: 6x6 grid, 20 seen / 8 unseen, 50 images each")
    else:
        pack = load_pack(args.pack)
        print(f"pack: {args.pack}")
    print(f"seeds {seeds}, {args.epochs} epochs\n")

    base = baseline_config(args)
    header = f"{'factor':<12}{'setting':<22}{'closed':>9}{'open':>9}{'h-mean':>9}{'time':>8}"
    print(header)
    print("-" * len(header))
    results = []
    for factor, setting, config in cells(base):
        t0 = time.perf_counter()
        row = run_cell(pack, config, seeds)
        dt = time.perf_counter() - t0
        results.append({"factor": factor, "setting": setting, **row})
        print(f"{factor:<12}{setting:<22}{row['closed']:>8.2f}%{row['open']:>8.2f}%"
              f"{row['h_mean']:>8.2f}%{dt:>7.1f}s")

    if args.out:
        Path(args.out).write_text(json.dumps({
            "seeds": seeds, "epochs": args.epochs, "results": results,
        }, indent=2) + "\n")
        print(f"\nwrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
