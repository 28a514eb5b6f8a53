"""Linewidth-plateau ladder filters.

A filter is an alternating chain series-C1, shunt-L2, series-C3, ...
seen from the resonator, terminated in a resistive load. For such a chain
``Re[Y(w)] = w**(2N) / P_N(w**2)`` where ``P_N`` is a degree-N polynomial
in ``x = w**2``; its zeros are the loaded modes of the filter. The plateau
is a band below those modes where Re[Y] is engineered to be flat.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize

from .errors import (
    ConditioningError,
    InvalidDomainError,
    InvalidInputError,
    PoleFindingError,
)
from .network import (
    Netlist,
    SeriesCapacitor,
    ShuntAdmittance,
    ShuntInductor,
    TwoPort,
    input_admittance,
    re_admittance_lossless,
)
from .synthesis import ModeLCR, find_resonance, linewidth

TWO_PI = 2 * math.pi
THREADS_ENV = "PLATEAU_RF_THREADS"


# --------------------------------------------------------------------- types


@dataclass(frozen=True)
class LadderFilter:
    """Element values (F, H, F, ...) starting with the series capacitor."""

    values: tuple
    z0: float = 50.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 1:
            raise InvalidInputError("a ladder filter needs at least one element")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise InvalidInputError(f"element values must be positive: {vals}")
        if not self.z0 > 0:
            raise InvalidInputError("termination must be positive")

    @property
    def order(self) -> int:
        return len(self.values)

    @property
    def capacitances(self):
        return self.values[0::2]

    @property
    def inductances(self):
        return self.values[1::2]

    def elements(self) -> list:
        return [
            SeriesCapacitor(v) if i % 2 == 0 else ShuntInductor(v)
            for i, v in enumerate(self.values)
        ]

    def netlist(self) -> Netlist:
        return Netlist(self.elements(), self.z0)

    def abcd(self, omega) -> TwoPort:
        """Vectorised ABCD of the bare filter (no load)."""
        w = np.asarray(omega, dtype=float)
        a = np.ones_like(w, dtype=complex)
        b = np.zeros_like(a)
        c = np.zeros_like(a)
        d = np.ones_like(a)
        for i, v in enumerate(self.values):
            k = 1.0 / (1j * w * v)
            if i % 2 == 0:
                b = b + a * k
                d = d + c * k
            else:
                a = a + b * k
                c = c + d * k
        return TwoPort(a[()], b[()], c[()], d[()])

    def to_dict(self) -> dict:
        kinds = ("series_capacitor", "shunt_inductor")
        return {
            "z0_ohms": self.z0,
            "elements": [{"kind": kinds[i % 2], "value": v} for i, v in enumerate(self.values)],
        }


def table1_filters() -> dict:
    """The tabulated plateau filters of orders 3-7, keyed by order."""
    text = resources.files(__package__).joinpath("data/table1.json").read_text()
    doc = json.loads(text)
    return {int(k): LadderFilter(tuple(v), doc["z0_ohms"]) for k, v in doc["filters"].items()}


@dataclass(frozen=True)
class PlateauSpec:
    """Design target. ``band`` in rad/s; ``pole_margin`` in rad/s, or None to
    drop the pole constraint altogether."""

    band: tuple
    target_re_y: float = 2e-5
    n_grid: int = 41
    pole_margin: Optional[float] = 0.0

    def __post_init__(self):
        lo, hi = self.band
        if not 0 < lo < hi:
            raise InvalidInputError(f"band must satisfy 0 < lo < hi, got {self.band}")
        if not self.target_re_y > 0:
            raise InvalidInputError("target Re[Y] must be positive")
        if self.n_grid < 2:
            raise InvalidInputError("n_grid must be at least 2")
        object.__setattr__(self, "band", (float(lo), float(hi)))

    @classmethod
    def from_hz(cls, f_lo, f_hi, target_re_y=2e-5, n_grid=41, pole_margin_hz=0.0):
        margin = None if pole_margin_hz is None else TWO_PI * pole_margin_hz
        return cls((TWO_PI * f_lo, TWO_PI * f_hi), target_re_y, n_grid, margin)

    def grid(self) -> np.ndarray:
        return np.linspace(self.band[0], self.band[1], self.n_grid)


@dataclass(frozen=True)
class DenominatorPoly:
    """``P_N(x)`` in ``x = w**2``, constant term first."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1 or not np.all(np.isfinite(c)):
            raise ConditioningError("polynomial coefficients must be finite")
        if not c[0] > 0:
            raise ConditioningError(f"constant term must be positive, got {c[0]!r}")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        """Natural magnitude of x, (c0/cN)^(1/N)."""
        c = self.coeffs
        if self.degree == 0 or c[-1] == 0:
            return 1.0
        return abs(c[0] / c[-1]) ** (1.0 / self.degree)

    def __call__(self, x):
        s = self.scale
        scaled = self.coeffs * s ** np.arange(self.degree + 1)
        return npoly.polyval(np.asarray(x, dtype=float) / s, scaled)

    def re_admittance(self, omega):
        w = np.asarray(omega, dtype=float)
        return w ** (2 * self.degree) / self(w**2)

    def is_positive_on(self, omega) -> bool:
        return bool(np.all(self(np.asarray(omega, dtype=float) ** 2) > 0))


@dataclass(frozen=True)
class QubitCouplingSpec:
    """Qubit coupled through ``c_c`` to a lumped parallel-LC resonator that
    sits directly at the filter input."""

    c_c: float
    c_res: float
    l_res: float

    def __post_init__(self):
        if not (self.c_c > 0 and self.c_res > 0 and self.l_res > 0):
            raise InvalidInputError("coupling and resonator values must be positive")

    @classmethod
    def at_frequency(cls, c_c: float, c_res: float, f_res_hz: float) -> "QubitCouplingSpec":
        return cls(c_c, c_res, 1.0 / ((TWO_PI * f_res_hz) ** 2 * c_res))

    @property
    def omega_res(self) -> float:
        return 1.0 / math.sqrt(self.l_res * self.c_res)

    def resonator_admittance(self, omega):
        return 1j * omega * self.c_res + 1.0 / (1j * omega * self.l_res)


@dataclass(frozen=True)
class PlateauMetrics:
    mean: float
    ripple: float
    min_pole_clearance: float


@dataclass(frozen=True)
class PlateauDesign:
    filter: LadderFilter
    metrics: PlateauMetrics
    converged: bool
    objective: float
    seed: int
    n_starts: int


# --------------------------------------------------------------------- rational structure


def filter_re_admittance(f: LadderFilter, omega):
    return re_admittance_lossless(f.abcd(omega), f.z0)


def _load_polynomial(f: LadderFilter) -> np.ndarray:
    """Coefficients (in p = 1/s) of ``A(p)*Z0 + B(p)``.

    Series C adds ``p/C`` to the impedance column, shunt L adds ``p/L`` to
    the admittance column; every ABCD entry stays a real polynomial in p.
    """
    a, b, c, d = (np.array([1.0]), np.array([0.0]), np.array([0.0]), np.array([1.0]))
    for i, v in enumerate(f.values):
        if i % 2 == 0:
            b = npoly.polyadd(b, npoly.polymulx(a) / v)
            d = npoly.polyadd(d, npoly.polymulx(c) / v)
        else:
            a = npoly.polyadd(a, npoly.polymulx(b) / v)
            c = npoly.polyadd(c, npoly.polymulx(d) / v)
    return npoly.polyadd(a * f.z0, b)


def denominator_poly(f: LadderFilter) -> DenominatorPoly:
    """Exact coefficients of ``P_N`` for the ladder.

    On the real axis ``p = -i/w`` and ``|Q(p)|^2 = Q(p) Q(-p)``, an even
    polynomial in ``p**2 = -1/x``; multiplying by ``x**N / Z0`` clears it.
    """
    n = f.order
    q = np.zeros(n + 1)
    lp = _load_polynomial(f)
    q[: len(lp)] = lp
    q_neg = q * (-1.0) ** np.arange(n + 1)
    prod = npoly.polymul(q, q_neg)
    r = np.zeros(n + 1)
    even = prod[0::2]
    r[: len(even)] = even
    k = np.arange(n + 1)
    # coefficient of x**j is (-1)**(N-j) r_(N-j) / Z0
    coeffs = ((-1.0) ** (n - k) * r[n - k]) / f.z0
    if not np.all(np.isfinite(coeffs)):
        raise ConditioningError("denominator expansion overflowed")
    return DenominatorPoly(coeffs)


def fit_denominator(re_y: Callable, degree: int, omega_range) -> DenominatorPoly:
    """Recover ``P(x) = w**(2*degree) / Re[Y]`` by interpolation.

    Uses ``degree + 1`` Chebyshev nodes in ``x = w**2`` over ``omega_range``
    and a linear solve in scaled variables. Works for any network whose
    Re[Y] has this rational form (e.g. the qubit path).
    """
    lo, hi = (float(w) ** 2 for w in omega_range)
    n = degree + 1
    t = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    scale = math.sqrt(lo * hi)
    p = x**degree / np.asarray(re_y(np.sqrt(x)), dtype=float)
    vander = np.vander(x / scale, n, increasing=True)
    cond = np.linalg.cond(vander)
    if not np.isfinite(cond) or cond > 1e13:
        raise ConditioningError(f"interpolation matrix is rank deficient (cond={cond:.2e})")
    c = np.linalg.solve(vander, p)
    return DenominatorPoly(c / scale ** np.arange(n))


def _companion_roots(coeffs: np.ndarray, scale: float) -> np.ndarray:
    c = np.trim_zeros(coeffs * scale ** np.arange(len(coeffs)), "b")
    n = len(c) - 1
    if n < 1:
        return np.array([], dtype=complex)
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(comp) * scale


def filter_poles(f: Union[LadderFilter, DenominatorPoly], residual_tol: float = 1e-8) -> np.ndarray:
    """Zeros of ``P_N`` mapped to complex w with Re(w) >= 0, sorted by Re(w)."""
    poly = f if isinstance(f, DenominatorPoly) else denominator_poly(f)
    x = _companion_roots(poly.coeffs, poly.scale)
    # relative residual against the magnitude of the summed terms
    terms = np.abs(poly.coeffs)[None, :] * np.abs(x)[:, None] ** np.arange(poly.degree + 1)
    resid = np.abs(npoly.polyval(x, poly.coeffs)) / terms.sum(axis=1)
    if np.any(~np.isfinite(resid)) or np.any(resid > residual_tol):
        raise PoleFindingError("companion-matrix roots failed the residual check", resid)
    w = np.sqrt(x.astype(complex))
    w = np.where(w.real < 0, -w, w)
    return w[np.lexsort((w.imag, w.real))]


def is_resonant(poles, rtol: float = 1e-9) -> np.ndarray:
    """Mask of poles that are not purely imaginary (overdamped) roots."""
    poles = np.asarray(poles, dtype=complex)
    return np.abs(poles.real) > rtol * np.abs(poles)


def resonant_poles(f) -> np.ndarray:
    p = filter_poles(f)
    return p[is_resonant(p)]


def first_pole_frequency(f) -> float:
    """Lowest resonant pole frequency Re(w); falls back to the smallest |w|."""
    p = filter_poles(f)
    res = p[is_resonant(p)]
    if len(res):
        return float(res.real.min())
    return float(np.abs(p).min())


def qubit_netlist(f: LadderFilter, q: QubitCouplingSpec) -> Netlist:
    return f.netlist().prepend(SeriesCapacitor(q.c_c), ShuntAdmittance(q.resonator_admittance))


def qubit_re_admittance(f: LadderFilter, q: QubitCouplingSpec, omega):
    """Re[Y] at the qubit node: coupling capacitor, resonator, then the filter."""
    w = np.asarray(omega, dtype=float)
    zc = 1.0 / (1j * w * q.c_c)
    yr = q.resonator_admittance(w)
    front = TwoPort(1 + zc * yr, zc, yr, np.ones_like(zc))
    return re_admittance_lossless(front @ f.abcd(w), f.z0)


def low_freq_slope(re_y: Callable, band, n_points: int = 50) -> float:
    """Least-squares slope of log Re[Y] against log w over ``band``."""
    w = np.geomspace(band[0], band[1], n_points)
    vals = np.asarray(re_y(w), dtype=float)
    if np.any(~(vals > 0)):
        raise InvalidDomainError("Re[Y] must be positive to take logarithms")
    return float(np.polyfit(np.log(w), np.log(vals), 1)[0])


def plateau_metrics(f: LadderFilter, spec: PlateauSpec) -> PlateauMetrics:
    vals = filter_re_admittance(f, spec.grid())
    mean = float(np.mean(vals))
    ripple = float((vals.max() - vals.min()) / mean)
    res = resonant_poles(f)
    clearance = float(res.real.min() - spec.band[1]) if len(res) else math.inf
    return PlateauMetrics(mean, ripple, clearance)


# --------------------------------------------------------------------- optimisation

RIPPLE_LIMIT = 0.25
MEAN_LOG_LIMIT = math.log(1.3)
POLE_PENALTY = 100.0
#: log-space box outside which values are pushed back (F and H)
_CAP_BOX = (1e-17, 1e-10)
_IND_BOX = (1e-12, 1e-6)
_START_CAP = (1e-15, 1e-12)
_START_IND = (1e-10, 1e-8)


def _box(n):
    lo = np.array([_CAP_BOX[0] if i % 2 == 0 else _IND_BOX[0] for i in range(n)])
    hi = np.array([_CAP_BOX[1] if i % 2 == 0 else _IND_BOX[1] for i in range(n)])
    return np.log(lo), np.log(hi)


def plateau_objective(log_values, spec: PlateauSpec, z0: float = 50.0) -> float:
    """Mean squared log-deviation from the target plus hinge penalties."""
    log_values = np.asarray(log_values, dtype=float)
    lo, hi = _box(len(log_values))
    box = np.sum(np.clip(lo - log_values, 0, None) ** 2 + np.clip(log_values - hi, 0, None) ** 2)
    f = LadderFilter(tuple(np.exp(np.clip(log_values, lo, hi))), z0)
    vals = filter_re_admittance(f, spec.grid())
    obj = float(np.mean(np.log(vals / spec.target_re_y) ** 2)) + box
    if spec.pole_margin is not None:
        try:
            res = resonant_poles(f)
        except PoleFindingError:
            return obj + POLE_PENALTY
        w_hi = spec.band[1]
        short = np.clip((w_hi + spec.pole_margin - res.real) / w_hi, 0, None)
        obj += POLE_PENALTY * float(np.sum(short**2))
    return obj


def is_converged(m: PlateauMetrics, spec: PlateauSpec) -> bool:
    ok = m.ripple <= RIPPLE_LIMIT and abs(math.log(m.mean / spec.target_re_y)) <= MEAN_LOG_LIMIT
    if spec.pole_margin is not None:
        ok = ok and m.min_pole_clearance > spec.pole_margin
    return ok


def _threads() -> int:
    try:
        n = int(os.environ.get(THREADS_ENV, "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def start_points(n_elements: int, n_starts: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo = np.log([_START_CAP[0] if i % 2 == 0 else _START_IND[0] for i in range(n_elements)])
    hi = np.log([_START_CAP[1] if i % 2 == 0 else _START_IND[1] for i in range(n_elements)])
    return rng.uniform(lo, hi, size=(n_starts, n_elements))


def optimize_plateau(
    n_elements: int,
    spec: PlateauSpec,
    seed: int = 0,
    n_starts: int = 16,
    init: Optional[LadderFilter] = None,
    z0: float = 50.0,
    max_fev: Optional[int] = None,
) -> PlateauDesign:
    """Multi-start Nelder-Mead on log element values.

    Starts are drawn log-uniformly from [1 fF, 1 pF] x [0.1 nH, 10 nH];
    ``init`` (if given) is tried first. The best start wins; ties keep the
    earlier start, so the result depends only on ``seed``.
    """
    if n_elements < 3:
        raise InvalidInputError("a plateau needs at least three elements")
    if init is not None and init.order != n_elements:
        raise InvalidInputError("init filter has the wrong order")
    starts = start_points(n_elements, n_starts, seed)
    if init is not None:
        starts = np.vstack([np.log(init.values), starts])
    max_fev = max_fev or 1500 * n_elements

    def run(x0):
        res = minimize(
            plateau_objective,
            x0,
            args=(spec, z0),
            method="Nelder-Mead",
            options={"maxfev": max_fev, "xatol": 1e-9, "fatol": 1e-14, "adaptive": True},
        )
        return float(res.fun), res.x

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, starts))
    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    lo, hi = _box(n_elements)
    filt = LadderFilter(tuple(np.exp(np.clip(results[best][1], lo, hi))), z0)
    metrics = plateau_metrics(filt, spec)
    return PlateauDesign(filt, metrics, is_converged(metrics, spec), results[best][0], seed, len(starts))


# --------------------------------------------------------------------- linewidth sweeps


@dataclass(frozen=True)
class LumpedResonator:
    """Parallel LC with fixed capacitance; the inductance is tuned."""

    capacitance: float


@dataclass(frozen=True)
class CPWResonator:
    """Open half-wave CPW section; the length is tuned."""

    z0: float = 50.0
    velocity: float = 1.2e8


@dataclass(frozen=True)
class SweepPoint:
    omega_target: float
    omega_r: float = math.nan
    kappa: float = math.nan
    element_value: float = math.nan
    mode: Optional[ModeLCR] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def loaded_resonator_admittance(f: LadderFilter, resonator, element_value: float) -> Callable:
    filt = f.netlist()
    if isinstance(resonator, LumpedResonator):
        c = resonator.capacitance

        def y(w):
            return 1j * w * c + 1.0 / (1j * w * element_value) + input_admittance(filt, w)
    else:
        z, v = resonator.z0, resonator.velocity

        def y(w):
            return 1j / z * np.tan(w * element_value / v) + input_admittance(filt, w)
    return y


def _place(f: LadderFilter, resonator, w: float) -> float:
    """Resonator element value putting the loaded zero of Im[Y] at ``w``."""
    im_f = float(np.imag(input_admittance(f.netlist(), w)))
    if isinstance(resonator, LumpedResonator):
        denom = w * resonator.capacitance + im_f
        if denom <= 0:
            raise InvalidDomainError("filter susceptance too negative for this capacitance")
        return 1.0 / (w * denom)
    # half-wave branch nearest the bare length pi*v/w
    theta = math.pi + math.atan(-resonator.z0 * im_f)
    return theta * resonator.velocity / w


def linewidth_sweep(f: LadderFilter, resonator, omegas: Sequence[float],
                    rel_bracket: float = 1e-4) -> list:
    """Loaded (w_r, kappa) for a resonator retuned to each target frequency."""
    out = []
    for w in np.atleast_1d(np.asarray(omegas, dtype=float)):
        try:
            value = _place(f, resonator, float(w))
            y = loaded_resonator_admittance(f, resonator, value)
            w_r = find_resonance(y, (w * (1 - rel_bracket), w * (1 + rel_bracket)))
            mode = linewidth(y, w_r, check=False)
            out.append(SweepPoint(float(w), w_r, mode.kappa, value, mode))
        except (ValueError, ArithmeticError) as exc:
            out.append(SweepPoint(float(w), error=f"{type(exc).__name__}: {exc}"))
    return out
