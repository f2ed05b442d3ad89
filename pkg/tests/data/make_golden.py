"""Regenerate the frozen reference files in this directory.

Run from the repository root:  python tests/data/make_golden.py [--fresnel] [--toy]

``fresnel_oracle.npz`` holds quadrature values of C and S and depends only on
scipy. The toy reports are first-run outputs of the simulator and act as
regression anchors; regenerate them only for an intended behaviour change.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from oracles import fresnel_quad  # noqa: E402

FRESNEL_SEED = 20240611
FRESNEL_N = 10_000


def fresnel_points() -> np.ndarray:
    rng = np.random.default_rng(FRESNEL_SEED)
    fixed = np.array([0.0, 1e-12, -1e-12, 0.5, 1.0, 1.4999, 1.5, 1.5001, 2.0, 10.0, -10.0, 49.999, 50.0, -50.0])
    return np.concatenate([fixed, rng.uniform(-50.0, 50.0, FRESNEL_N - fixed.size)])


def make_fresnel():
    x = fresnel_points()
    C, S = fresnel_quad(x)
    np.savez(HERE / "fresnel_oracle.npz", x=x, C=C, S=S)
    print(f"fresnel_oracle.npz: {x.size} points")


TOY = dict(n_w=32, n_u=100, seed=1234, proposed=None, undersampled=(32, 1), farfield_n_theta=64, n_lv=6)


def make_toy():
    from nearfield_codebook.sim import SimConfig, emit_report, run_gain_experiment, run_search_experiment

    sim = SimConfig(**TOY)
    emit_report(run_gain_experiment(sim), "json", HERE / "golden_toy_gain.json")
    emit_report(run_search_experiment(sim), "json", HERE / "golden_toy_search.json")
    print("toy reports written")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--fresnel", action="store_true")
    ap.add_argument("--toy", action="store_true")
    args = ap.parse_args()
    if not (args.fresnel or args.toy):
        args.fresnel = args.toy = True
    if args.fresnel:
        make_fresnel()
    if args.toy:
        make_toy()
