"""|zeta_12(t)| for several environment sizes, showing the 1/sqrt(V) residual."""
import argparse

import numpy as np

from corrlab.decoherence import DecoherenceModel, decoherence_factor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modes", type=int, nargs="+", default=[1, 10, 50, 500])
    ap.add_argument("--tmax", type=float, default=200.0)
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    times = np.linspace(0.0, args.tmax, args.steps + 1)
    models = {V: DecoherenceModel.random(K=2, V=V, seed=args.seed) for V in args.modes}
    print("t," + ",".join(f"V{V}" for V in args.modes))
    for t in times:
        vals = [abs(decoherence_factor(m, t)[0, 1]) for m in models.values()]
        print(f"{t:.4f}," + ",".join(f"{v:.6e}" for v in vals))
    late = times[len(times) // 2:]
    for V, m in models.items():
        rms = np.sqrt(np.mean([abs(decoherence_factor(m, t)[0, 1]) ** 2 for t in late]))
        print(f"# V={V}: late RMS {rms:.4f}, 1/sqrt(V) = {1 / np.sqrt(V):.4f}")


if __name__ == "__main__":
    main()
