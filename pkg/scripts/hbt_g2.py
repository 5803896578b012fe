"""Pulsed HBT g2(0) versus background level, against the Poisson-mixture estimate.

    python scripts/hbt_g2.py --pulses 200000
"""

import argparse

from cavnet import photostat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pulses", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2, 0.3, 0.5])
    args = ap.parse_args()

    train = photostat.PulseTrainSpec(n_pulses=args.pulses)
    print(f"{'mu':>6} {'g2_sim':>8} {'stderr':>8} {'g2_model':>9}")
    for k, mu in enumerate(args.levels):
        bg = photostat.BackgroundSpec(mean_photons_per_pulse=mu, decay_time=100.0)
        est = photostat.measure_g2(train, bg, args.seed + k)
        model = photostat.g2_poisson_mixture(mu, train.excitation_prob)
        print(f"{mu:6.3f} {est.value:8.4f} {est.stderr:8.4f} {model:9.4f}")


if __name__ == "__main__":
    main()
