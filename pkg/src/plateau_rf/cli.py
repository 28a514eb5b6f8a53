"""Command-line frontend: ``analyze``, ``design``, ``fit`` and ``t1``.

Exit codes: 0 success, 2 input error, 3 numerical error, 4 not converged.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .design import (
    PlateauSpec,
    QubitCouplingSpec,
    optimize_plateau,
    qubit_re_admittance,
)
from .errors import InvalidInputError
from .fitting import MIN_FIT_POINTS, fit_trace
from .io import dump_json, load_netlist, read_trace, write_columns, write_sweep
from .network import SeriesCapacitor, ShuntAdmittance, input_admittance
from .synthesis import qubit_t1_limit

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4


class InputError(Exception):
    pass


def _freqs(f_start: float, f_stop: float, n: int) -> np.ndarray:
    if n < 1:
        raise InputError("--points must be at least 1")
    if not 0 < f_start <= f_stop or (n > 1 and f_start == f_stop):
        raise InputError("need 0 < --f-start-hz < --f-stop-hz")
    return np.array([f_start]) if n == 1 else np.linspace(f_start, f_stop, n)


def _netlist(path):
    try:
        return load_netlist(path)
    except OSError as exc:
        raise InputError(str(exc)) from exc


def cmd_analyze(netlist_path, f_start_hz, f_stop_hz, n_points, out_path,
                resonator_c_f=None) -> int:
    doc = _netlist(netlist_path)
    f = _freqs(f_start_hz, f_stop_hz, n_points)
    w = 2 * np.pi * f
    ladder = doc.ladder()
    if ladder is not None:
        from .design import filter_re_admittance

        re_y = np.atleast_1d(filter_re_admittance(ladder, w))
    else:
        re_y = np.real(np.atleast_1d(input_admittance(doc.netlist, w)))
    kappa = None
    if resonator_c_f is not None:
        if not resonator_c_f > 0:
            raise InputError("--resonator-c-f must be positive")
        kappa = re_y / resonator_c_f / (2 * np.pi)
    write_sweep(out_path, f, re_y, kappa)
    return EXIT_OK


def cmd_design(n_elements, f_start_hz, f_stop_hz, target_siemens, seed, out_path,
               n_starts=16, pole_margin_hz=0.0) -> int:
    if n_elements < 3:
        raise InputError("--elements must be at least 3")
    spec = PlateauSpec.from_hz(f_start_hz, f_stop_hz, target_siemens, pole_margin_hz=pole_margin_hz)
    d = optimize_plateau(n_elements, spec, seed=seed, n_starts=n_starts)
    clearance = d.metrics.min_pole_clearance
    out = d.filter.to_dict()
    out.update({
        "band_hz": [f_start_hz, f_stop_hz],
        "target_siemens": target_siemens,
        "seed": seed,
        "n_starts": d.n_starts,
        "converged": d.converged,
        "objective": d.objective,
        "metrics": {
            "mean_siemens": d.metrics.mean,
            "ripple": d.metrics.ripple,
            # null when the filter has no resonant pole at all
            "min_pole_clearance_hz": clearance / (2 * math.pi) if math.isfinite(clearance) else None,
        },
    })
    dump_json(out, out_path)
    return EXIT_OK if d.converged else EXIT_NOT_CONVERGED


def cmd_fit(trace_path, out_path) -> int:
    try:
        trace = read_trace(trace_path)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    if len(trace) < MIN_FIT_POINTS:
        raise InputError(f"trace has {len(trace)} points; at least {MIN_FIT_POINTS} required")
    result = fit_trace(trace)
    dump_json(result.to_dict(), out_path)
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_t1(netlist_path, f_start_hz, f_stop_hz, n_points, out_path) -> int:
    doc = _netlist(netlist_path)
    if doc.qubit is None:
        raise InputError(f"{netlist_path}: netlist has no 'qubit' block")
    q = doc.qubit
    f = _freqs(f_start_hz, f_stop_hz, n_points)
    w = 2 * np.pi * f
    if q.c_c == 0:
        re_y = np.zeros_like(w)
    elif doc.ladder() is not None:
        spec = QubitCouplingSpec(q.c_c, q.c_res, q.l_res)
        re_y = np.atleast_1d(qubit_re_admittance(doc.ladder(), spec, w))
    else:
        def y_res(x):
            return 1j * x * q.c_res + 1.0 / (1j * x * q.l_res)

        net = doc.netlist.prepend(SeriesCapacitor(q.c_c), ShuntAdmittance(y_res))
        re_y = np.real(np.atleast_1d(input_admittance(net, w)))
    re_y = np.clip(re_y, 0.0, None)  # round-off below the passivity floor
    t1 = np.atleast_1d(qubit_t1_limit(re_y, q.c_q))
    write_columns(out_path, ["freq_hz", "re_y_q_siemens", "t1_s"], [f, re_y, t1])
    return EXIT_OK


# --------------------------------------------------------------------- argparse


def _pole_margin(text):
    return None if text.lower() == "none" else float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plateau-rf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="Re[Y] sweep of a netlist")
    a.add_argument("--netlist", required=True)
    a.add_argument("--f-start-hz", type=float, required=True)
    a.add_argument("--f-stop-hz", type=float, required=True)
    a.add_argument("--points", type=int, default=201)
    a.add_argument("--resonator-c-f", type=float, default=None,
                   help="resonator capacitance; adds a kappa_hz column")
    a.add_argument("--out", required=True)

    d = sub.add_parser("design", help="optimise a plateau ladder filter")
    d.add_argument("--elements", type=int, required=True)
    d.add_argument("--f-start-hz", type=float, default=7e9)
    d.add_argument("--f-stop-hz", type=float, default=8e9)
    d.add_argument("--target-siemens", type=float, default=2e-5)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--starts", type=int, default=16)
    d.add_argument("--pole-margin-hz", type=_pole_margin, default=0.0,
                   help="required clearance of resonant poles above the band; 'none' disables")
    d.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="extract f_r and kappa from an S21 trace CSV")
    f.add_argument("--trace", required=True)
    f.add_argument("--out", required=True)

    t = sub.add_parser("t1", help="external T1 limit of the qubit versus frequency")
    t.add_argument("--netlist", required=True)
    t.add_argument("--f-start-hz", type=float, required=True)
    t.add_argument("--f-stop-hz", type=float, required=True)
    t.add_argument("--points", type=int, default=201)
    t.add_argument("--out", required=True)
    return p


def _dispatch(args) -> int:
    if args.command == "analyze":
        return cmd_analyze(args.netlist, args.f_start_hz, args.f_stop_hz, args.points, args.out,
                           args.resonator_c_f)
    if args.command == "design":
        margin = args.pole_margin_hz
        return cmd_design(args.elements, args.f_start_hz, args.f_stop_hz, args.target_siemens,
                          args.seed, args.out, args.starts, margin)
    if args.command == "fit":
        return cmd_fit(args.trace, args.out)
    return cmd_t1(args.netlist, args.f_start_hz, args.f_stop_hz, args.points, args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (InputError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
