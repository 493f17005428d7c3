"""Prostate-style experiment: p > n, identity prior, lik/lpd diagnostics.

Uses the first 150 expression columns plus an intercept (p = 151). Defaults
follow the full protocol (1e5 kept iterations after 2e5 burn-in, start at 0).
"""

import argparse
import sys

from robitda.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data/prostate_synthetic.csv")
    ap.add_argument("--out", default="out/prostate")
    ap.add_argument("--iters", type=int, default=100_000)
    ap.add_argument("--columns", type=int, default=150)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    return cli([
        "run", "--data", args.data, "--columns", str(args.columns),
        "--model", "robit,probit", "--nu", "3,1000", "--chain", "da,sandwich", "--prior", "identity",
        "--iters", str(args.iters), "--burnin", str(2 * args.iters), "--seed", str(args.seed),
        "--trace", "likpd", "--max-lag", "50", "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
