"""Exciton population decay in the cavity network for each bundled preset.

    python scripts/exciton_dynamics.py
"""

import argparse

import numpy as np

from cavnet import emitter, netmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=0.5, help="ns")
    ap.add_argument("--dt", type=float, default=2e-5, help="ns")
    args = ap.parse_args()

    for name, preset in netmodel.bundled_presets().items():
        if preset.emitter is None:
            continue
        spec = emitter.noncavity(preset.emitter)
        regime = emitter.classify_regime(preset.emitter, preset.rates)
        traj = emitter.evolve_exciton(spec, preset.rates, t_end=args.t_end, dt=args.dt)
        pop = np.abs(traj.exciton) ** 2
        kappa_eff = emitter.effective_cavity_decay(preset.rates)
        adiabatic = 2 * spec.g0 ** 2 / kappa_eff + spec.gamma_emitter
        line = f"{name:12s} regime={regime:6s} adiabatic_rate={adiabatic:8.3f} GHz"
        if regime == "strong":
            minima = np.flatnonzero((pop[1:-1] < pop[:-2]) & (pop[1:-1] < pop[2:])) + 1
            if minima.size:
                line += f"  first_minimum={traj.times[minima[0]] * 1e3:.2f} ps"
        else:
            rate = emitter.fit_decay_rate(traj.times, pop, 0.02, 0.3)
            line += f"  fitted_rate={rate:8.3f} GHz"
        print(line)


if __name__ == "__main__":
    main()
