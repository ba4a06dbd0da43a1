"""Best win probability against p for classical, quantum and PR strategies, as CSV."""
import argparse
import csv
import sys

import numpy as np

from corrlab.runner import sweep_p


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=51)
    ap.add_argument("--rounds", type=int, default=0, help="Monte Carlo rounds per point (0 = exact only)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    grid = np.linspace(0.0, 0.5, args.points)
    rows = [r for fam in ("classical", "quantum", "pr") for r in sweep_p(fam, grid, args.rounds, args.seed)]
    fields = ["family", "p", "best", "ceiling", "simulated"]
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
