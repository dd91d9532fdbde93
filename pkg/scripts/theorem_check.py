"""Check the grand canonical / dephased-state identity on random instances.

    python scripts/theorem_check.py --instances 500 --max-dim 10
"""

import argparse
from dataclasses import dataclass

import numpy as np

from qergodic import DensityMatrix, PureState, dephase, eigendecompose, populations, solve


@dataclass
class Config:
    instances: int = 200
    min_dim: int = 2
    max_dim: int = 8
    seed: int = 0


def run(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    print("dim,beta,entropy,log_partition,max_residual")
    worst = 0.0
    for _ in range(cfg.instances):
        d = int(rng.integers(cfg.min_dim, cfg.max_dim + 1))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        spec = eigendecompose((a + a.conj().T) / 2)
        psi = PureState.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d))
        sol = solve(spec, psi)
        resid = np.max(np.abs(sol.grand_canonical.entries - dephase(spec, DensityMatrix.from_pure(psi)).entries))
        worst = max(worst, resid)
        print(f"{d},{sol.beta:.6g},{sol.entropy:.6g},{sol.log_partition:.6g},{resid:.3e}")
    print(f"# worst residual {worst:.3e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--instances", type=int, default=Config.instances)
    p.add_argument("--min-dim", type=int, default=Config.min_dim)
    p.add_argument("--max-dim", type=int, default=Config.max_dim)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    run(Config(a.instances, a.min_dim, a.max_dim, a.seed))
