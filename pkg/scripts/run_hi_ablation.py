#!/usr/bin/env python3
"""Indicator ablation: which health indicator, raw or denoised, trains best.

Builds a synthetic set where one indicator tracks degradation by
construction and another is noise, then prints the per-split ranking.
"""

import argparse

import numpy as np

from sohpred import pipeline
from sohpred.hiselect import HISeries
from sohpred.ingest import SOHSeries
from sohpred.neuralnet import DualBiGRUSpec, TrainingConfig
from sohpred.seeding import derive_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cycles", type=int, default=140)
    ap.add_argument("--noise", type=float, default=0.004)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=2)
    ap.add_argument("--seed", type=int, default=12)
    args = ap.parse_args()

    rng = derive_rng(args.seed, "gen")
    x = np.linspace(0.0, 1.0, args.cycles)
    soh_vals = 1.0 - 0.14 * x**1.2
    soh = SOHSeries(tuple(range(args.cycles)), soh_vals)
    tracker = HISeries("MF", soh_vals + rng.normal(0.0, args.noise, args.cycles))
    noise = HISeries("PF", rng.normal(0.9, 0.03, args.cycles))

    base = pipeline.ExperimentConfig(
        split=pipeline.SplitSpec.fraction(0.25),
        network=DualBiGRUSpec(5, (8,) * 4, (0.02,) * 4),
        training=TrainingConfig(args.epochs, 0.01, int(0.7 * args.epochs), 0.01, batch_size=8),
        seeds=tuple(range(args.seeds)),
    )
    splits = [pipeline.SplitSpec.fraction(f) for f in (0.05, 0.15, 0.25)]
    rows = pipeline.run_hi_ablation(
        [(tracker, True), (tracker, False), (noise, True), (noise, False)],
        soh,
        splits,
        base,
    )
    print(f"{'split':>6} {'variant':>8} {'rmse':>10} {'mae':>10}")
    for row in rows:
        print(
            f"{row.split_label:>6} {row.variant():>8} "
            f"{row.report.rmse:10.5f} {row.report.mae:10.5f}"
        )


if __name__ == "__main__":
    main()
