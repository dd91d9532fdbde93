"""Flatness and total mass of the Monte Carlo density of states for n = 1..N.

    python scripts/dos_flatness.py --max-n 4 --samples 2000000
"""

import argparse
import math
from dataclasses import dataclass

from scipy.stats import chi2

from qergodic import estimate_dos, manifold_volume


@dataclass
class Config:
    max_n: int = 4
    samples: int = 1_000_000
    bins: int = 8
    seed: int = 1
    workers: int = 4


def run(cfg: Config):
    print("n,interior_bins,level,level_err,pi^n,chi2,dof,p_value,total_mass,pi^n/n!")
    for n in range(1, cfg.max_n + 1):
        h = estimate_dos(n, cfg.bins, cfg.samples, cfg.seed, workers=cfg.workers)
        level, err = h.interior_mean()
        stat, dof = h.flatness_chi2()
        print(f"{n},{int(h.interior.sum())},{level:.6f},{err:.6f},{math.pi ** n:.6f},"
              f"{stat:.2f},{dof},{chi2.sf(stat, dof):.3f},{h.total_mass():.6f},{manifold_volume(n):.6f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--max-n", type=int, default=Config.max_n)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--bins", type=int, default=Config.bins)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    run(Config(max_n=a.max_n, samples=a.samples, bins=a.bins, seed=a.seed))
