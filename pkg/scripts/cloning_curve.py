"""Helstrom success for telling the two steered trine mixtures apart from n clones."""
import argparse

from corrlab.scenarios import MAX_CLONES, cloning_signaling_advantage


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=MAX_CLONES)
    args = ap.parse_args()
    print("n,trace_distance,success")
    for n in range(1, args.nmax + 1):
        r = cloning_signaling_advantage(n)
        print(f"{n},{r.trace_distance:.12f},{r.success:.12f}")


if __name__ == "__main__":
    main()
