"""Single-precision rounding error of pairwise vs sequential totals over a size sweep.

Writes one CSV row per (trial, method) and prints a median summary per size.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from binsampling.model import RngStream
from binsampling.verify import error_reports_csv, rounding_error_experiment


@dataclass
class ErrorSweepConfig:
    exponents: tuple[int, ...] = (10, 12, 14, 16, 18, 20)
    trials: int = 100
    seed: int = 0
    output: str | None = None


def run(cfg: ErrorSweepConfig) -> str:
    rng = RngStream(cfg.seed)
    pairs = []
    for k in cfg.exponents:
        batch = rounding_error_experiment(2**k, cfg.trials, rng)
        pw = np.median([a.relative_error for a, _ in batch])
        sq = np.median([b.relative_error for _, b in batch])
        print(f"n=2^{k:<2d} median pairwise {pw:.3e}  sequential {sq:.3e}  ratio {sq / pw:8.1f}", file=sys.stderr)
        pairs.extend(batch)
    return error_reports_csv(pairs)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--exponents", default="10,12,14,16,18,20")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    a = p.parse_args()
    cfg = ErrorSweepConfig(tuple(int(x) for x in a.exponents.split(",")), a.trials, a.seed, a.output)
    text = run(cfg)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
