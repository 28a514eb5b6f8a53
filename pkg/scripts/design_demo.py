"""Optimise plateau filters of several orders and compare with the table.

For each order the multi-start optimiser runs twice: once with the pole
constraint (resonant poles above the band) and once without it. The
tabulated filters' metrics are printed for reference.

    python3 scripts/design_demo.py [--orders 3 4] [--starts 16] [--seed 0]
"""
import argparse
import math

from plateau_rf.design import PlateauSpec, optimize_plateau, plateau_metrics, table1_filters


def fmt(m):
    clr = "none" if math.isinf(m.min_pole_clearance) else f"{m.min_pole_clearance / (2 * math.pi) / 1e9:+.2f} GHz"
    return f"mean {m.mean:.3e} S  ripple {m.ripple:.4f}  pole clearance {clr}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, nargs="+", default=[3, 4])
    ap.add_argument("--starts", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    table = table1_filters()
    for n in args.orders:
        print(f"order {n}")
        if n in table:
            print(f"  table        {fmt(plateau_metrics(table[n], PlateauSpec.from_hz(7e9, 8e9)))}")
        for label, margin in (("constrained", 0.0), ("free poles", None)):
            spec = PlateauSpec.from_hz(7e9, 8e9, pole_margin_hz=margin)
            d = optimize_plateau(n, spec, seed=args.seed, n_starts=args.starts)
            vals = ", ".join(f"{v:.3g}" for v in d.filter.values)
            print(f"  {label:<12} {fmt(d.metrics)}  converged {d.converged}")
            print(f"  {'':<12} values [{vals}]")


if __name__ == "__main__":
    main()
