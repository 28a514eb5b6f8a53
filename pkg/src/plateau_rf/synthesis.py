"""Effective LCR (lossy Foster) models extracted from admittance spectra.

Near a resonance ``Y(w) ~ 2j*C*(w - w_r) + Re[Y(w_r)]``, so a mode is fixed
by the rising zero of Im[Y], half the slope of Im[Y] there, and the real
part at that point. The linewidth follows as ``kappa = Re[Y]/C``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AmbiguousBracketError,
    InvalidInputError,
    NonResonantPointError,
    NotBracketedError,
)

Admittance = Callable[[float], complex]

DEFAULT_SCAN_POINTS = 2001
#: relative first finite-difference step for dIm[Y]/dw
FD_REL_STEP = 1e-6
RESONANCE_RTOL = 1e-12


class FosterValidityWarning(UserWarning):
    """The single-mode LCR approximation is being pushed outside its domain."""


@dataclass(frozen=True)
class ModeLCR:
    omega_r: float
    c_eff: float
    l_eff: float
    re_y: float
    kappa: float

    @classmethod
    def from_foster(cls, omega_r: float, c_eff: float, re_y: float) -> "ModeLCR":
        if omega_r <= 0 or c_eff <= 0:
            raise InvalidInputError("resonance and effective capacitance must be positive")
        return cls(omega_r, c_eff, 1.0 / (c_eff * omega_r**2), re_y, re_y / c_eff)

    @property
    def f_r(self) -> float:
        return self.omega_r / (2 * math.pi)

    @property
    def kappa_hz(self) -> float:
        """Linewidth kappa/2pi in Hz (full width of the Lorentzian)."""
        return self.kappa / (2 * math.pi)

    @property
    def quality_factor(self) -> float:
        return self.omega_r / self.kappa if self.kappa > 0 else math.inf


@dataclass(frozen=True)
class QubitMode:
    c_q: float
    omega_q: float

    def __post_init__(self):
        if self.c_q <= 0 or self.omega_q <= 0:
            raise InvalidInputError("qubit capacitance and frequency must be positive")

    def kappa(self, re_y: float) -> float:
        return re_y / self.c_q

    def t1(self, re_y: float) -> float:
        return qubit_t1_limit(re_y, self.c_q)


# --------------------------------------------------------------------- resonances


def _im(Y: Admittance, w) -> float:
    return float(np.imag(Y(w)))


def scan_brackets(Y: Admittance, band, n_points: int = DEFAULT_SCAN_POINTS):
    """Sub-intervals of ``band`` where Im[Y] rises through zero.

    Falling crossings (antiresonances, or the jump across a pole of Y)
    are skipped.
    """
    lo, hi = band
    w = np.linspace(lo, hi, n_points)
    im = np.array([_im(Y, x) for x in w])
    out = []
    for i in range(n_points - 1):
        if im[i] == 0 and i > 0:
            continue
        if im[i] <= 0 < im[i + 1] or (im[i] < 0 and im[i + 1] == 0):
            out.append((w[i], w[i + 1]))
    return out


def find_resonance(Y: Admittance, bracket, check_points: int = 65) -> float:
    """Root of Im[Y] with positive slope inside ``bracket`` (rad/s)."""
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise InvalidInputError(f"bad bracket {bracket!r}")
    w = np.linspace(lo, hi, check_points)
    im = np.array([_im(Y, x) for x in w])
    s = np.sign(im)
    nz = s[s != 0]
    changes = np.flatnonzero(nz[1:] != nz[:-1])
    if len(changes) == 0:
        if im[0] == 0 or im[-1] == 0:
            return lo if im[0] == 0 else hi
        raise NotBracketedError(f"Im[Y] does not change sign in [{lo:g}, {hi:g}]")
    if len(changes) > 1:
        raise AmbiguousBracketError(
            f"Im[Y] changes sign {len(changes)} times in [{lo:g}, {hi:g}]"
        )
    k = np.flatnonzero(s != 0)
    i0, i1 = k[changes[0]], k[changes[0] + 1]
    if im[i0] > 0:
        raise NotBracketedError("only a falling zero of Im[Y] (antiresonance) in bracket")
    a, b = w[i0], w[i1]
    return brentq(lambda x: _im(Y, x), a, b, xtol=1e-300 + RESONANCE_RTOL * a * 1e-3,
                  rtol=RESONANCE_RTOL, maxiter=500)


def find_resonances(Y: Admittance, band, n_points: int = DEFAULT_SCAN_POINTS) -> list:
    return [find_resonance(Y, br) for br in scan_brackets(Y, band, n_points)]


# --------------------------------------------------------------------- Foster model


def _slope(Y, w, h):
    return (_im(Y, w + h) - _im(Y, w - h)) / (2 * h)


def effective_capacitance(Y: Admittance, omega_r: float, rel_step: float = FD_REL_STEP) -> float:
    """Half the slope of Im[Y] at ``omega_r``.

    Central differences at h, h/2, h/4 combined by two Richardson passes.
    """
    h = rel_step * omega_r
    d1, d2, d4 = (_slope(Y, omega_r, h / k) for k in (1, 2, 4))
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    slope = (16 * r2 - r1) / 15
    if not slope > 0:
        raise NonResonantPointError(
            f"dIm[Y]/dw = {slope:.3e} at {omega_r:.6e} rad/s; not a resonance"
        )
    return slope / 2


def linewidth(Y: Admittance, omega_r: float, rel_step: float = FD_REL_STEP,
              check: bool = True) -> ModeLCR:
    c_eff = effective_capacitance(Y, omega_r, rel_step)
    re_y = float(np.real(Y(omega_r)))
    mode = ModeLCR.from_foster(omega_r, c_eff, re_y)
    if check:
        _check_validity(Y, mode)
    return mode


def _check_validity(Y, mode: ModeLCR):
    if mode.kappa / mode.omega_r > 1e-2:
        warnings.warn(
            f"kappa/omega_r = {mode.kappa / mode.omega_r:.2e} > 1e-2; "
            "the single-pole LCR approximation is unreliable",
            FosterValidityWarning,
            stacklevel=3,
        )
    half = abs(mode.kappa) / 2
    if half > 0 and mode.re_y != 0:
        lo = float(np.real(Y(mode.omega_r - half)))
        hi = float(np.real(Y(mode.omega_r + half)))
        spread = max(abs(lo - mode.re_y), abs(hi - mode.re_y)) / abs(mode.re_y)
        if spread > 0.1:
            warnings.warn(
                f"Re[Y] varies by {spread:.0%} across the linewidth",
                FosterValidityWarning,
                stacklevel=3,
            )


def cpw_halfwave_mode(length: float, z0: float, velocity: float, re_y: float) -> ModeLCR:
    """Closed-form LCR model of the lambda/2 mode of an open CPW section."""
    for name, v in (("length", length), ("z0", z0), ("velocity", velocity), ("re_y", re_y)):
        if not v > 0:
            raise InvalidInputError(f"{name} must be positive, got {v!r}")
    omega_r = math.pi * velocity / length
    c_r = math.pi / (2 * omega_r * z0)
    return ModeLCR(omega_r, c_r, 2 * z0 / (math.pi * omega_r), re_y, re_y / c_r)


def open_line_admittance(length: float, z0: float, velocity: float) -> Admittance:
    """Y(w) = (i/Z0) tan(w l / v), seen at one end of an open line."""
    return lambda w: 1j / z0 * np.tan(w * length / velocity)


def indirect_re_admittance(couplings: Iterable[complex], z0: float) -> float:
    """Re[Y_q] ~ sum_j |Y_qj|^2 Z0 from transadmittances to loaded ports."""
    if not z0 > 0:
        raise InvalidInputError("z0 must be positive")
    y = np.asarray(list(couplings), dtype=complex)
    return float(np.sum(abs(y) ** 2) * z0)


def qubit_t1_limit(re_y, c_q):
    """External T1 = C_q / Re[Y_q]; ``math.inf`` when Re[Y_q] is zero."""
    if np.any(np.asarray(c_q) <= 0):
        raise InvalidInputError("qubit capacitance must be positive")
    re_y = np.asarray(re_y, dtype=float)
    if np.any(re_y < 0):
        raise InvalidInputError("Re[Y] must be non-negative")
    with np.errstate(divide="ignore"):
        t1 = np.where(re_y > 0, c_q / np.where(re_y > 0, re_y, 1.0), math.inf)
    return float(t1) if t1.ndim == 0 else t1
