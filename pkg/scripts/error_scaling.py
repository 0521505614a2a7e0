#!/usr/bin/env python3
"""Dense-regime error scaling: sup-step approximation error against the
sqrt(log n / theta) yardstick on a theta = n^0.8 grid.

Usage: python scripts/error_scaling.py [--out DIR] [--seed N]
"""

import argparse

import numpy as np

from opinionlab.config import parse_config
from opinionlab.harness import run

CONFIG = """
kind = error
seed = 99
out = results/error_scaling
n_grid = 250 500 1000 2000
theta = pow:0.8
inner_reps = 20
outer_reps = 3
model.K = 2
model.ell = 1
model.pi = 0.5 0.5
model.kappa = 2 1 ; 1 2
model.c = 0.3
model.d = 0.2
model.H = 1
model.weights = point:1
model.beliefs = uniform:-1,1
model.signals = uniform:0,0.6 | uniform:-0.6,0
model.fixed_composition = true
"""


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    cfg = parse_config(CONFIG)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    summary = run(cfg)
    by_n = {}
    for pt in summary["points"]:
        by_n.setdefault(pt["n"], []).append(pt)
    ns = sorted(by_n)
    sup = np.array([np.mean([p["sup_inf"] for p in by_n[n]]) for n in ns])
    x = 0.5 * np.log(np.log(ns) / np.array([by_n[n][0]["theta"] for n in ns]))
    slope = np.polyfit(x, np.log(sup), 1)[0]
    for n, err in zip(ns, sup):
        print(f"n={n:5d}  sup-step error {err:.5f}")
    print(f"fitted slope of log error vs log sqrt(log n / theta): {slope:.3f}")


if __name__ == "__main__":
    main()
