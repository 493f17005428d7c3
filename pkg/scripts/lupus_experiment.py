"""Lupus-style experiment: 12 chains (3 models x 2 priors x DA/sandwich).

Each prior gets its own output directory with ACF and running-mean figures
for the two non-intercept coefficients. Defaults follow the full protocol
(1e6 kept iterations after 2e6 burn-in); pass ``--iters`` for a quick look.
"""

import argparse
import sys
from pathlib import Path

from robitda.cli import main as cli

MLE_START = "-1.778,4.374,2.428"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data/lupus_synthetic.csv")
    ap.add_argument("--out", default="out/lupus")
    ap.add_argument("--iters", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for g in ("1000", "3.49"):
        rc = cli([
            "run", "--data", args.data, "--model", "robit,probit", "--nu", "3,1000",
            "--chain", "da,sandwich", "--prior", "gprior", "--g", g,
            "--iters", str(args.iters), "--burnin", str(2 * args.iters), "--seed", str(args.seed),
            f"--init={MLE_START}", "--coords", "2,3", "--max-lag", "50",
            "--out", str(Path(args.out) / f"g{g}"),
        ])
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
