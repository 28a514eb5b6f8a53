"""Re[Y] spectra and linewidth sweeps of the tabulated plateau filters.

Writes one CSV per filter order into OUT_DIR (default ``out/sweeps``):

    re_y_order{N}.csv     freq_hz, re_y_siemens over 0.5-12 GHz
    lumped_order{N}.csv   freq_hz, re_y_siemens, kappa_hz for a 400 fF resonator retuned by its inductance
    cpw_order{N}.csv      freq_hz, re_y_siemens, kappa_hz for a 50 ohm half-wave line retuned by its length

and prints the plateau flatness of each sweep over 7-8 GHz.

    python3 scripts/plateau_sweeps.py [OUT_DIR]
"""
import sys
from pathlib import Path

import numpy as np

from plateau_rf.design import CPWResonator, LumpedResonator, filter_re_admittance, linewidth_sweep, table1_filters
from plateau_rf.io import write_sweep

C_RES = 400e-15


def sweep_columns(points):
    ok = [p for p in points if p.ok]
    f = np.array([p.omega_r for p in ok]) / (2 * np.pi)
    re_y = np.array([p.mode.re_y for p in ok])
    k = np.array([p.kappa for p in ok]) / (2 * np.pi)
    return f, re_y, k, len(points) - len(ok)


def main(out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    f_spec = np.linspace(0.5e9, 12e9, 461)
    targets = 2 * np.pi * np.linspace(7e9, 8e9, 21)
    print(f"{'N':>2} {'lumped kappa/2pi (MHz)':>24} {'spread':>7} {'CPW kappa/2pi (MHz)':>22} {'spread':>7}")
    for n, filt in sorted(table1_filters().items()):
        write_sweep(out_dir / f"re_y_order{n}.csv", f_spec, filter_re_admittance(filt, 2 * np.pi * f_spec))
        row = [f"{n:>2}"]
        for name, res in (("lumped", LumpedResonator(C_RES)), ("cpw", CPWResonator())):
            f, re_y, k, failed = sweep_columns(linewidth_sweep(filt, res, targets))
            write_sweep(out_dir / f"{name}_order{n}.csv", f, re_y, k)
            if failed:
                print(f"order {n} {name}: {failed} sweep points failed", file=sys.stderr)
            row.append(f"{k.min() / 1e6:11.2f} - {k.max() / 1e6:5.2f}  {(k.max() - k.min()) / k.mean():6.3f}")
        print("  ".join(row))
    print(f"wrote CSVs to {out_dir}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/sweeps"))
