"""Finite-time average gap against the C/T envelope for one random instance.

Writes CSV columns T, gap, envelope, window_max where window_max is the
largest gap over [T, 2T].

    python scripts/convergence_sweep.py --dim 4 --seed 3 > sweep.csv
"""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from qergodic import PureState, convergence_constant, dynamic_average, eigendecompose, finite_time_average


@dataclass
class Config:
    dim: int = 4
    seed: int = 0
    t_min: float = 1.0
    t_max: float = 1e5
    points: int = 60
    window_samples: int = 500


def run(cfg: Config, out=sys.stdout):
    rng = np.random.default_rng(cfg.seed)
    d = cfg.dim
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    spec = eigendecompose((a + a.conj().T) / 2)
    O = (b + b.conj().T) / 2
    psi = PureState.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d))
    limit = dynamic_average(spec, psi, O)
    C = convergence_constant(spec, psi, O)
    out.write("T,gap,envelope,window_max\n")
    for T in np.geomspace(cfg.t_min, cfg.t_max, cfg.points):
        gap = abs(finite_time_average(spec, psi, O, T) - limit)
        window = max(abs(finite_time_average(spec, psi, O, t) - limit)
                     for t in np.linspace(T, 2 * T, cfg.window_samples))
        out.write(f"{T:.17g},{gap:.17g},{C / T:.17g},{window:.17g}\n")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--dim", type=int, default=Config.dim)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--t-max", type=float, default=Config.t_max)
    p.add_argument("--points", type=int, default=Config.points)
    a = p.parse_args()
    run(Config(dim=a.dim, seed=a.seed, t_max=a.t_max, points=a.points))
