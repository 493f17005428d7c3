"""Write synthetic CSVs shaped like the lupus and prostate data sets."""

import argparse
from pathlib import Path

from robitda.datasets import lupus_shaped_csv, prostate_shaped_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--genes", type=int, default=200, help="expression columns in the prostate-shaped file")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(lupus_shaped_csv(out / "lupus_synthetic.csv", args.seed))
    print(prostate_shaped_csv(out / "prostate_synthetic.csv", args.seed, args.genes))


if __name__ == "__main__":
    main()
