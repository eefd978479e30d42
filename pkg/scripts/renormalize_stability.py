"""Count exact mixtures that each renormalization mode fails to recover.

Spectra are noise-free mixtures of synthetic patterns sharing a flat
background; a higher background makes the patterns more alike.
"""

import argparse

import numpy as np

from phasefrac import synth
from phasefrac.solver import RENORMALIZE_MODES, SolverConfig, estimate_composition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--backgrounds", type=float, nargs="+", default=[0.0, 10.0, 50.0, 200.0, 1000.0])
    ap.add_argument("--libraries", type=int, default=40)
    ap.add_argument("--tol", type=float, default=1e-4, help="max fraction error still counted as recovered")
    args = ap.parse_args()

    print("background  " + "  ".join(f"{m:>9}" for m in RENORMALIZE_MODES) + "   (failures / mixtures)")
    for bg in args.backgrounds:
        fails = dict.fromkeys(RENORMALIZE_MODES, 0)
        total = 0
        for seed in range(args.libraries):
            ds, lib = synth.generate(synth.preset("ci-small", seed=seed, background_level=bg))
            for spec, label in ds.samples:
                total += 1
                for mode in RENORMALIZE_MODES:
                    comp, _ = estimate_composition(spec, lib, SolverConfig(renormalize=mode, max_iterations=5000))
                    if np.max(np.abs(comp.fractions - label.fractions)) > args.tol:
                        fails[mode] += 1
        print(f"{bg:>10g}  " + "  ".join(f"{fails[m]:>9d}" for m in RENORMALIZE_MODES) + f"   / {total}")


if __name__ == "__main__":
    main()
