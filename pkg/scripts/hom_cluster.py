"""Simulate the five-peak HOM cluster and recover the wavepacket overlap.

    python scripts/hom_cluster.py --reps 1000000 --overlaps 0 0.67 1
"""

import argparse

import numpy as np

from cavnet import hom, photostat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--visibility", type=float, default=0.88)
    ap.add_argument("--overlaps", type=float, nargs="+", default=[0.0, 0.67, 1.0])
    args = ap.parse_args()

    spec = hom.InterferometerSpec(visibility=args.visibility)
    train = photostat.PulseTrainSpec(pair_separation=spec.path_delay, n_pulses=args.reps)
    for k, overlap in enumerate(args.overlaps):
        record = hom.simulate_hom(train, overlap, spec, seed=args.seed + k)
        cluster = hom.measure_cluster(record, spec.path_delay)
        expected = hom.analytic_cluster(overlap, spec).areas * args.reps
        est = hom.estimate_overlap(cluster, spec)
        print(f"I={overlap:.2f}  areas={np.array2string(cluster.areas.astype(int))}"
              f"  expected={np.array2string(np.round(expected).astype(int))}"
              f"  I_est={est.overlap:.3f}+/-{est.stderr:.3f}")


if __name__ == "__main__":
    main()
