"""Freeze plateau numbers of the tabulated filters into tests/golden/.

Run once after the values have been checked by hand; the test-suite then
regresses against the file at 1e-10 relative.

    python3 scripts/make_golden.py
"""
import json
import math
from pathlib import Path

import numpy as np

from plateau_rf.design import (
    PlateauSpec,
    denominator_poly,
    filter_poles,
    filter_re_admittance,
    plateau_metrics,
    table1_filters,
)

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden" / "table1_plateau.json"
PROBE_HZ = [1e9, 3e9, 5e9, 7e9, 7.5e9, 8e9, 12e9]


def main():
    spec = PlateauSpec.from_hz(7e9, 8e9)
    doc = {"band_hz": [7e9, 8e9], "n_grid": spec.n_grid, "probe_hz": PROBE_HZ, "filters": {}}
    for n, f in sorted(table1_filters().items()):
        m = plateau_metrics(f, spec)
        poles = filter_poles(f) / (2 * math.pi)
        doc["filters"][str(n)] = {
            "mean_siemens": m.mean,
            "ripple": m.ripple,
            "re_y_siemens": list(map(float, filter_re_admittance(f, 2 * np.pi * np.array(PROBE_HZ)))),
            "p_coeffs": list(map(float, denominator_poly(f).coeffs)),
            "poles_hz": [[float(p.real), float(p.imag)] for p in poles],
        }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
