"""Fit synthetic traces built at the four measured (f_r, kappa) pairs.

Each trace carries a 30 ns cable delay, a weak interfering path and
complex noise; the fit is repeated over several noise seeds and the
scatter of f_r and kappa is reported next to the generating values.

    python3 scripts/measured_resonators.py [--sigma 0.004] [--seeds 20]
"""
import argparse
import warnings
from dataclasses import dataclass

import numpy as np

from plateau_rf.fitting import FitWarning, InterferenceParams, ResonanceFit, fit_trace, synth_trace

MEASURED = [(7.054e9, 7.65e6), (7.297e9, 10.65e6), (7.557e9, 10.00e6), (7.823e9, 9.05e6)]


@dataclass(frozen=True)
class Scenario:
    radius: float = 0.4
    tau: float = 30e-9
    background: InterferenceParams = InterferenceParams(1.0, 0.02, 0.7, 1.5e-9)
    span: float = 10.0  # half-span in linewidths
    n_points: int = 801


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=0.004, help="noise per quadrature")
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    sc = Scenario()
    print(f"{'f_r (GHz)':>10} {'kappa (MHz)':>12} {'fit f_r err (kHz)':>18} {'fit kappa (MHz)':>22} {'tau (ns)':>9}")
    for f_r, kappa in MEASURED:
        f = np.linspace(f_r - sc.span * kappa, f_r + sc.span * kappa, sc.n_points)
        p = ResonanceFit(0.05, -0.02, sc.radius, 0.1, kappa, f_r)
        df, ks, taus = [], [], []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FitWarning)
            for seed in range(args.seeds):
                r = fit_trace(synth_trace(p, f, args.sigma, sc.tau, sc.background, seed=seed))
                df.append(r.f_r - f_r)
                ks.append(r.kappa)
                taus.append(r.tau)
        df, ks = np.array(df) / 1e3, np.array(ks) / 1e6
        print(f"{f_r / 1e9:10.3f} {kappa / 1e6:12.2f} {df.mean():9.2f} +/- {df.std():5.2f} "
              f"{ks.mean():13.3f} +/- {ks.std():5.3f} {np.mean(taus) * 1e9:9.3f}")


if __name__ == "__main__":
    main()
