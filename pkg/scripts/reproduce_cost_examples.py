"""Predicted vs measured naive-ITS comparison counts for the worked examples.

Covers the two-level table (forward cost 1 + eps), Zipf s=3 (forward cost
tending to zeta(2)/zeta(3)), binomial (forward cost 1 + gamma N) and the
reversed Zipf table (constant backward cost).
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from binsampling import tables
from binsampling.model import RngStream
from binsampling.verify import cost_model_check


@dataclass
class CostConfig:
    draws: int = 100_000
    seed: int = 7


def cases():
    yield "two_level N=1000 eps=0.5", tables.two_level(1000, 0.5)
    yield "two_level N=1000 eps=2.0", tables.two_level(1000, 2.0)
    for n in (10**2, 10**3, 10**4, 10**5):
        yield f"zipf s=3 N={n}", tables.zipf(n, 3.0)
    for gamma in (0.1, 0.3, 0.5):
        yield f"binomial N=1000 gamma={gamma}", tables.binomial(1000, gamma)
    yield "reversed zipf s=3 N=1e4", tables.reversed_zipf(10**4, 3.0)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    a = p.parse_args()
    cfg = CostConfig(a.draws, a.seed)
    print(f"{'table':32s} {'fwd pred':>10s} {'fwd meas':>10s} {'bwd pred':>10s} {'bwd meas':>10s}")
    for k, (name, table) in enumerate(cases()):
        mf, pf, mb, pb = cost_model_check(table, cfg.draws, RngStream(cfg.seed + k))
        print(f"{name:32s} {pf:10.4f} {mf:10.4f} {pb:10.4f} {mb:10.4f}")


if __name__ == "__main__":
    main()
