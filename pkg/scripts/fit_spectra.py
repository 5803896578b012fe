"""Synthesize noisy transmission spectra and fit the coupling-rate triple.

    python scripts/fit_spectra.py --noise 0.05 --seeds 20
"""

import argparse

import numpy as np

from cavnet import specfit
from cavnet.netmodel import FITTED_RATES, CouplingRates


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--truth", type=float, nargs=3, metavar=("PERP", "PAR", "W"),
                    default=[FITTED_RATES.kappa_perp, FITTED_RATES.kappa_par, FITTED_RATES.kappa_w])
    ap.add_argument("--guess", type=float, nargs=3, default=[600.0, 200.0, 450.0])
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    truth = CouplingRates(*args.truth)
    guess = CouplingRates(*args.guess)
    names = ("kappa_perp", "kappa_par", "kappa_w")
    print(f"{'seed':>4} " + " ".join(f"{n:>12}" for n in names) + "   iters  converged")
    fits = []
    for seed in range(args.seeds):
        data = specfit.synthesize_spectra(truth, noise_sigma=args.noise, seed=seed)
        res = specfit.fit_rates(data, guess)
        vals = [getattr(res.rates, n) for n in names]
        fits.append(vals)
        print(f"{seed:>4} " + " ".join(f"{v:12.2f}" for v in vals)
              + f"   {res.iterations:5d}  {res.converged}")
    fits = np.array(fits)
    ref = np.array(args.truth)
    print("mean " + " ".join(f"{v:12.2f}" for v in fits.mean(0)))
    print("sd   " + " ".join(f"{v:12.2f}" for v in fits.std(0, ddof=1 if len(fits) > 1 else 0)))
    print("worst relative error: "
          + " ".join(f"{v:.4f}" for v in np.abs(fits / ref - 1).max(0)))


if __name__ == "__main__":
    main()
