"""Resonance extraction from complex transmission traces.

Pipeline: remove cable delay -> algebraic (Taubin) circle fit ->
translate/rotate into canonical position -> least-squares fit of

    S21(f) = A_r + i A_i + 2 R e^{i phi} / (1 + 2i (f - f_r) / kappa)

which is the usual ``(i/(pi kappa))(w - w_r)`` form with ``w = 2 pi f``;
``kappa`` is therefore the full width in Hz. Windowed fits around the
resonance are combined into a weighted mean and spread.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    DegenerateGeometryError,
    GridMismatchError,
    InvalidInputError,
    PhaseUnwrapError,
)

MIN_FIT_POINTS = 8
DEFAULT_WINDOW_FACTORS = (1.0, 1.5, 2.0, 3.0, 5.0)
PHI_WARN = 0.3


class FitWarning(UserWarning):
    pass


# --------------------------------------------------------------------- data types


@dataclass(frozen=True)
class ComplexTrace:
    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float).ravel()
        v = np.asarray(self.values, dtype=complex).ravel()
        if f.shape != v.shape:
            raise InvalidInputError("frequency and value arrays differ in length")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise InvalidInputError("frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.freqs)

    def select(self, mask) -> "ComplexTrace":
        return ComplexTrace(self.freqs[mask], self.values[mask])

    def window(self, center: float, half_width: float) -> "ComplexTrace":
        return self.select(np.abs(self.freqs - center) <= half_width)

    def with_values(self, values) -> "ComplexTrace":
        return ComplexTrace(self.freqs, values)


@dataclass(frozen=True)
class CircleParams:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateGeometryError(f"radius must be positive, got {self.radius!r}")


@dataclass(frozen=True)
class ResonanceFit:
    a_r: float
    a_i: float
    radius: float
    phi: float
    kappa: float
    f_r: float
    rms_residual: float = math.nan
    kappa_err: float = math.nan
    f_r_err: float = math.nan
    converged: bool = True

    def model(self, freqs):
        return resonance_model(np.asarray(freqs, dtype=float), self.a_r, self.a_i,
                               self.radius, self.phi, self.kappa, self.f_r)


@dataclass(frozen=True)
class InterferenceParams:
    """``S_tot = A * S + B exp(i (C + w D))`` with ``w = 2 pi f``."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidInputError(f"amplitude scale A must be positive, got {self.A!r}")
        if not self.B >= 0:
            raise InvalidInputError(f"offset amplitude B must be non-negative, got {self.B!r}")

    def apply(self, freqs, values):
        w = 2 * np.pi * np.asarray(freqs, dtype=float)
        return self.A * np.asarray(values) + self.B * np.exp(1j * (self.C + w * self.D))


def resonance_model(f, a_r, a_i, radius, phi, kappa, f_r):
    return a_r + 1j * a_i + 2 * radius * np.exp(1j * phi) / (1 + 2j * (f - f_r) / kappa)


def _wrap(phase):
    return (phase + np.pi) % (2 * np.pi) - np.pi


# --------------------------------------------------------------------- synthesis


def synth_trace(params: ResonanceFit, freqs, noise_sigma: float = 0.0, tau: float = 0.0,
                interference: Optional[InterferenceParams] = None,
                seed: Optional[int] = None) -> ComplexTrace:
    """Model trace with cable delay, optional background and complex noise.

    ``noise_sigma`` is the standard deviation of each quadrature.
    """
    f = np.asarray(freqs, dtype=float)
    s = params.model(f) * np.exp(-2j * np.pi * f * tau)
    if interference is not None:
        s = interference.apply(f, s)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        s = s + noise_sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    return ComplexTrace(f, s)


# --------------------------------------------------------------------- delay


def remove_cable_delay(t: ComplexTrace, edge_fraction: float = 0.1):
    """Estimate and remove a linear phase ``-2 pi f tau``.

    The slope is fitted jointly on the lowest and highest ``edge_fraction``
    of the points (20% in total), each edge with its own phase offset so
    the resonance's phase step between them does not bias the slope.
    Returns ``(corrected_trace, tau)``.
    """
    n = len(t)
    k = max(2, int(round(edge_fraction * n)))
    if 2 * k > n:
        raise InvalidInputError("trace too short to estimate the cable delay")
    f_lo, f_hi = t.freqs[:k], t.freqs[-k:]
    ph = []
    for vals in (t.values[:k], t.values[-k:]):
        raw = np.angle(vals)
        steps = np.abs(np.diff(np.unwrap(raw)))
        if np.any(steps > 0.9 * np.pi):
            raise PhaseUnwrapError("phase changes by ~pi between adjacent edge points")
        ph.append(np.unwrap(raw))
    design = np.zeros((2 * k, 3))
    f_c = 0.5 * (t.freqs[0] + t.freqs[-1])
    design[:, 0] = -2 * np.pi * (np.concatenate([f_lo, f_hi]) - f_c)
    design[:k, 1] = 1.0
    design[k:, 2] = 1.0
    sol, *_ = np.linalg.lstsq(design, np.concatenate(ph), rcond=None)
    tau = float(sol[0])
    return t.with_values(t.values * np.exp(2j * np.pi * t.freqs * tau)), tau


# --------------------------------------------------------------------- circle geometry


def taubin_fit(points) -> CircleParams:
    """Taubin algebraic circle fit (SVD form), exact on exact circles."""
    z = np.asarray(points, dtype=complex).ravel()
    if z.size < 3:
        raise DegenerateGeometryError("need at least three points")
    centroid = z.mean()
    x, y = (z - centroid).real, (z - centroid).imag
    zz = x * x + y * y
    zmean = zz.mean()
    if zmean == 0:
        raise DegenerateGeometryError("all points coincide")
    z0 = (zz - zmean) / (2 * math.sqrt(zmean))
    _, sv, vt = np.linalg.svd(np.column_stack([z0, x, y]), full_matrices=False)
    a = vt[2].copy()
    a0 = a[0] / (2 * math.sqrt(zmean))
    # a0 -> 0 means the best algebraic "circle" is a line
    if abs(a0) * math.sqrt(zmean) < 1e-12 * np.linalg.norm(a[1:]):
        raise DegenerateGeometryError("points are collinear")
    a3 = -zmean * a0
    cx, cy = -a[1] / a0 / 2, -a[2] / a0 / 2
    r = math.sqrt(a[1] ** 2 + a[2] ** 2 - 4 * a0 * a3) / abs(a0) / 2
    return CircleParams(complex(cx, cy) + centroid, r)


def canonical_transform(t: ComplexTrace, c: CircleParams, f_r_est: float):
    """``(center, unit_rotation)`` such that ``(v - center) * u + radius`` puts
    the circle centre at (R, 0) and the point nearest ``f_r_est`` on the
    positive real axis."""
    if not t.freqs[0] <= f_r_est <= t.freqs[-1]:
        raise InvalidInputError("resonance estimate lies outside the trace")
    k = int(np.argmin(np.abs(t.freqs - f_r_est)))
    d = t.values[k] - c.center
    if d == 0:
        raise DegenerateGeometryError("resonance sample sits on the circle centre")
    return c.center, abs(d) / d


def canonicalize(t: ComplexTrace, c: CircleParams, f_r_est: float) -> ComplexTrace:
    center, u = canonical_transform(t, c, f_r_est)
    return t.with_values((t.values - center) * u + c.radius)


# --------------------------------------------------------------------- least squares


def initial_guess(t: ComplexTrace):
    """``(f_r, kappa)`` from the peak of ``|S - median(S)|``.

    A Lorentzian amplitude exceeds half its peak over sqrt(3) linewidths.
    """
    ref = np.median(t.values.real) + 1j * np.median(t.values.imag)
    dev = np.abs(t.values - ref)
    k = int(np.argmax(dev))
    above = np.flatnonzero(dev >= dev[k] / 2)
    lo, hi = k, k
    while lo - 1 in above:
        lo -= 1
    while hi + 1 in above:
        hi += 1
    span = t.freqs[hi] - t.freqs[lo]
    if span <= 0:
        span = t.freqs[min(k + 1, len(t) - 1)] - t.freqs[max(k - 1, 0)]
    return float(t.freqs[k]), float(span / math.sqrt(3))


def _fit_errors(res, n_res, n_par):
    dof = max(n_res - n_par, 1)
    s2 = float(np.sum(res.fun**2)) / dof
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * s2
        return np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        return np.full(n_par, math.nan)


def _polish(resid, x, max_iter: int = 8):
    """Gauss-Newton steps after lm, which stops on ``xtol`` short of the minimum.

    Central-difference Jacobian; a step is kept only if the cost drops.
    """
    x = np.array(x, dtype=float)
    r = resid(x)
    cost = float(r @ r)
    for _ in range(max_iter):
        h = 1e-7 * np.maximum(1.0, np.abs(x))
        jac = np.column_stack([(resid(x + h[j] * e) - resid(x - h[j] * e)) / (2 * h[j])
                               for j, e in enumerate(np.eye(len(x)))])
        dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        if not np.all(np.isfinite(dx)):
            break
        r_new = resid(x + dx)
        c_new = float(r_new @ r_new)
        if not c_new <= cost:
            break
        x, r, cost = x + dx, r_new, c_new
        if np.max(np.abs(dx) / np.maximum(1.0, np.abs(x))) < 1e-13:
            break
    return x, r


def lsq_resonance_fit(t: ComplexTrace, init: ResonanceFit, max_nfev: int = 2000) -> ResonanceFit:
    """Nonlinear least squares over (A_r, A_i, R, phi, kappa, f_r).

    ``kappa`` is fitted as ``kappa0 * exp(s)`` (so it stays positive) and
    ``f_r`` as an offset in units of ``kappa0``.
    """
    if len(t) < MIN_FIT_POINTS:
        raise InvalidInputError(f"need at least {MIN_FIT_POINTS} points, got {len(t)}")
    if not init.kappa > 0:
        raise InvalidInputError("initial kappa must be positive")
    k0, f0 = init.kappa, init.f_r
    f, v = t.freqs, t.values

    def unpack(p):
        return p[0], p[1], p[2], p[3], k0 * math.exp(p[4]), f0 + k0 * p[5]

    def resid(p):
        r = resonance_model(f, *unpack(p)) - v
        return np.concatenate([r.real, r.imag])

    p0 = np.array([init.a_r, init.a_i, init.radius, init.phi, 0.0, 0.0])
    res = least_squares(resid, p0, method="lm", xtol=1e-10, ftol=1e-15, gtol=1e-15, x_scale="jac",
                        max_nfev=max_nfev)
    if res.status > 0:
        res.x, res.fun = _polish(resid, res.x)
    a_r, a_i, radius, phi, kappa, f_r = unpack(res.x)
    if radius < 0:
        radius, phi = -radius, phi + math.pi
    phi = float(_wrap(phi))
    err = _fit_errors(res, 2 * len(f), 6)
    if kappa < 1e-6 * k0:
        warnings.warn("kappa collapsed towards zero", FitWarning, stacklevel=2)
    if abs(phi) > PHI_WARN:
        warnings.warn(f"large residual rotation phi={phi:.2f} rad after canonicalisation",
                      FitWarning, stacklevel=2)
    rms = float(np.sqrt(np.mean(np.abs(resonance_model(f, a_r, a_i, radius, phi, kappa, f_r) - v) ** 2)))
    return ResonanceFit(float(a_r), float(a_i), float(radius), phi, float(kappa), float(f_r),
                        rms, float(kappa * err[4]), float(k0 * err[5]), bool(res.status > 0))


@dataclass(frozen=True)
class WindowedFit:
    kappa_mean: float
    kappa_std: float
    f_r_mean: float
    per_window: list = field(default_factory=list)
    half_widths: list = field(default_factory=list)


def _weighted(values, errors):
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.all(np.isfinite(errors)) and np.all(errors > 0):
        w = 1.0 / errors**2
    else:
        w = np.ones_like(values)
    w = w / w.sum()
    mean = float(np.sum(w * values))
    std = float(np.sqrt(np.sum(w * (values - mean) ** 2)))
    return mean, std


def windowed_fit(t: ComplexTrace, windows: Sequence[float], init: ResonanceFit) -> WindowedFit:
    """Fit ``f_r +/- w`` for every half-width ``w`` and combine.

    Weights are inverse variances of the per-window kappa estimates; the
    spread is the weighted standard deviation across windows.
    """
    if len(windows) < 2:
        raise InvalidInputError("need at least two windows")
    fits, used = [], []
    for w in windows:
        sub = t.window(init.f_r, w)
        if len(sub) < MIN_FIT_POINTS:
            warnings.warn(f"window +/-{w:.4g} Hz has {len(sub)} points; skipped",
                          FitWarning, stacklevel=2)
            continue
        fits.append(lsq_resonance_fit(sub, init))
        used.append(float(w))
    if not fits:
        raise InvalidInputError("no window contains enough points")
    k_mean, k_std = _weighted([x.kappa for x in fits], [x.kappa_err for x in fits])
    f_mean, _ = _weighted([x.f_r for x in fits], [x.f_r_err for x in fits])
    return WindowedFit(k_mean, k_std, f_mean, fits, used)


# --------------------------------------------------------------------- full pipeline


@dataclass(frozen=True)
class Background:
    """Interfering path ``b * exp(2 pi i (f - f_c) D)`` in the raw trace."""

    b: complex
    delay: float
    f_c: float

    def __call__(self, f):
        return self.b * np.exp(2j * np.pi * (np.asarray(f) - self.f_c) * self.delay)


@dataclass(frozen=True)
class TraceFit:
    f_r: float
    kappa: float
    kappa_std: float
    tau: float
    full: ResonanceFit
    windows: WindowedFit
    converged: bool
    background: Optional[Background] = None

    def to_dict(self) -> dict:
        bg = self.background
        return {
            "f_r_hz": self.f_r,
            "kappa_hz": self.kappa,
            "kappa_std_hz": self.kappa_std,
            "tau_s": self.tau,
            "converged": self.converged,
            "background": None if bg is None else {
                "amplitude": float(abs(bg.b)), "delay_s": bg.delay},
            "per_window": [
                {"half_width_hz": w, "f_r_hz": x.f_r, "kappa_hz": x.kappa,
                 "kappa_err_hz": x.kappa_err, "rms_residual": x.rms_residual,
                 "converged": x.converged}
                for w, x in zip(self.windows.half_widths, self.windows.per_window)
            ],
        }


def _joint_fit(t: ComplexTrace, fit: ResonanceFit, tau0: float, f_c: float,
               background: Optional[Background] = None):
    """Joint fit of the raw trace including the cable delay.

    Model ``exp(-2 pi i (f - f_c) tau) * (A + 2 R e^{i phi} L(f))`` plus an
    optional interfering path; the constant phase ``2 pi f_c tau`` is
    absorbed by A and phi. Removes the bias left by the edge-only delay
    estimate. Returns ``(fit, tau, background, cost)``.
    """
    k0, f0 = fit.kappa, fit.f_r
    f, v = t.freqs, t.values
    tscale = 1.0 / (2 * math.pi * (f[-1] - f[0]))

    def unpack(p):
        return p[0], p[1], p[2], p[3], k0 * math.exp(p[4]), f0 + k0 * p[5], tau0 + tscale * p[6]

    def model(p):
        a_r, a_i, radius, phi, kappa, f_r, tau = unpack(p)
        out = np.exp(-2j * np.pi * (f - f_c) * tau) * resonance_model(f, a_r, a_i, radius, phi, kappa, f_r)
        if background is not None:
            d = background.delay + tscale * p[9]
            out = out + (p[7] + 1j * p[8]) * np.exp(2j * np.pi * (f - f_c) * d)
        return out

    def resid(p):
        r = model(p) - v
        return np.concatenate([r.real, r.imag])

    p0 = [fit.a_r, fit.a_i, fit.radius, fit.phi, 0.0, 0.0, 0.0]
    if background is not None:
        p0 += [background.b.real, background.b.imag, 0.0]
    res = least_squares(resid, np.array(p0), method="lm", xtol=1e-12, ftol=1e-15, gtol=1e-15, x_scale="jac",
                        max_nfev=4000)
    if res.status > 0:
        res.x, res.fun = _polish(resid, res.x)
    a_r, a_i, radius, phi, kappa, f_r, tau = unpack(res.x)
    if radius < 0:
        radius, phi = -radius, phi + math.pi
    bg = None
    if background is not None:
        bg = Background(complex(res.x[7], res.x[8]), background.delay + tscale * res.x[9], f_c)
    out = ResonanceFit(a_r, a_i, radius, float(_wrap(phi)), kappa, f_r, converged=bool(res.status > 0))
    return out, tau, bg, float(np.sum(res.fun**2))


def _residual_background(f, r, f_c, max_delay):
    """Strongest single-delay component of a residual (periodogram peak)."""
    grid = _delay_grid(f, max_delay)
    x = f - f_c
    best, best_d = -1.0, 0.0
    for chunk in np.array_split(grid, max(1, len(grid) // 256)):
        power = np.abs(np.exp(-2j * np.pi * np.outer(chunk, x)) @ r)
        k = int(np.argmax(power))
        if power[k] > best:
            best, best_d = float(power[k]), float(chunk[k])
    b = complex(np.mean(r * np.exp(-2j * np.pi * x * best_d)))
    return Background(b, best_d, f_c)


def _delay_grid(f, max_delay):
    step = 1.0 / (8 * (f[-1] - f[0]))
    d_max = min(max_delay, 0.5 / np.min(np.diff(f)))
    return np.arange(-d_max, d_max + step / 2, step)


def _projection_cost(t: ComplexTrace, f_r: float, kappa: float, taus) -> np.ndarray:
    """Residual of ``exp(-2 pi i f tau) (A + c L(f))`` with A, c eliminated.

    The Gram matrix of the two basis columns does not depend on tau, so
    the cost over many delays costs two periodograms.
    """
    f, v = t.freqs, t.values
    x = f - f.mean()
    lor = 1.0 / (1 + 2j * (f - f_r) / kappa)
    gram = np.array([[len(f), lor.sum()], [np.conj(lor).sum(), np.sum(abs(lor) ** 2)]])
    ginv = np.linalg.inv(gram)
    taus = np.asarray(taus, dtype=float)
    out = np.empty(taus.size)
    for i in range(0, taus.size, 256):
        ph = np.exp(2j * np.pi * np.outer(taus[i:i + 256], x))
        r = np.stack([ph @ v, ph @ (np.conj(lor) * v)], axis=-1)
        out[i:i + 256] = np.sum(abs(v) ** 2) - np.real(np.einsum("ki,ij,kj->k", np.conj(r), ginv, r))
    return out


def _scan_delay(t: ComplexTrace, f_r: float, kappa: float, max_delay: float) -> float:
    grid = _delay_grid(t.freqs, max_delay)
    cost = _projection_cost(t, f_r, kappa, grid)
    k = int(np.argmin(cost))
    if 0 < k < len(grid) - 1:
        # parabolic refinement between grid points
        c0, c1, c2 = cost[k - 1], cost[k], cost[k + 1]
        den = c0 - 2 * c1 + c2
        if den > 0:
            return float(grid[k] + 0.5 * (c0 - c2) / den * (grid[1] - grid[0]))
    return float(grid[k])


def fit_trace(t: ComplexTrace, window_factors: Sequence[float] = DEFAULT_WINDOW_FACTORS,
              circle_span: float = 5.0, background: bool = True,
              max_delay: float = 100e-9) -> TraceFit:
    """Run the whole extraction on a raw S21 trace.

    With ``background`` set, an interfering path with its own delay is
    tried on the residual of the resonance fit and kept only if it lowers
    the Bayesian information criterion.
    """
    if len(t) < MIN_FIT_POINTS:
        raise InvalidInputError(f"need at least {MIN_FIT_POINTS} points, got {len(t)}")
    try:
        corrected, tau0 = remove_cable_delay(t)
    except PhaseUnwrapError:
        corrected, tau0 = t, math.nan
    f0, k0 = initial_guess(corrected)
    tau_scan = _scan_delay(t, f0, k0, max_delay)
    if math.isnan(tau0) or (_projection_cost(t, f0, k0, [tau_scan])[0]
                            < _projection_cost(t, f0, k0, [tau0])[0]):
        # edge phases are unreliable when the off-resonant signal is weak
        tau0 = tau_scan
        corrected = t.with_values(t.values * np.exp(2j * np.pi * t.freqs * tau0))
        f0, k0 = initial_guess(corrected)
    near = corrected.window(f0, circle_span * k0)
    circle = taubin_fit((near if len(near) >= MIN_FIT_POINTS else corrected).values)
    canon = canonicalize(corrected, circle, f0)
    first = lsq_resonance_fit(canon, ResonanceFit(0.0, 0.0, circle.radius, 0.0, k0, f0))

    # back to the delay-corrected frame, then rotate by the centre frequency phase
    center, u = canonical_transform(corrected, circle, f0)
    offset = (complex(first.a_r, first.a_i) - circle.radius) / u + center
    f_c = 0.5 * (t.freqs[0] + t.freqs[-1])
    rot = np.exp(-2j * np.pi * f_c * tau0)
    offset *= rot
    start = replace(first, a_r=offset.real, a_i=offset.imag,
                    phi=float(_wrap(first.phi - np.angle(u) + np.angle(rot))))
    full, tau, bg, cost = _joint_fit(t, start, tau0, f_c)

    n_res = 2 * len(t)
    if background and n_res > 20 and cost > 0:
        model = np.exp(-2j * np.pi * (t.freqs - f_c) * tau) * full.model(t.freqs)
        seed_bg = _residual_background(t.freqs, t.values - model, f_c, max_delay)
        full_b, tau_b, bg_b, cost_b = _joint_fit(t, full, tau, f_c, seed_bg)
        bic = n_res * math.log(cost / n_res) + 7 * math.log(n_res)
        bic_b = n_res * math.log(max(cost_b, 1e-300) / n_res) + 10 * math.log(n_res)
        if bic_b < bic:
            full, tau, bg = full_b, tau_b, bg_b

    # canonical frame of the polished model, for the windowed fits
    clean = t.values - (bg(t.freqs) if bg is not None else 0.0)
    shift = np.exp(2j * np.pi * (t.freqs - f_c) * tau)
    a = complex(full.a_r, full.a_i)
    rot_phi = np.exp(-1j * full.phi)
    canon = t.with_values((clean * shift - a - full.radius / rot_phi) * rot_phi + full.radius)
    init = ResonanceFit(0.0, 0.0, full.radius, 0.0, full.kappa, full.f_r)
    widths = [m * full.kappa for m in window_factors]
    win = windowed_fit(canon, widths, init)
    converged = full.converged and all(x.converged for x in win.per_window)
    return TraceFit(win.f_r_mean, win.kappa_mean, win.kappa_std, tau, full, win, converged, bg)


# --------------------------------------------------------------------- background


def interference_fit(measured: ComplexTrace, modeled: ComplexTrace,
                     max_delay: float = 50e-9) -> InterferenceParams:
    """Fit ``measured ~ A * modeled + B exp(i (C + w D))``.

    For fixed D the model is linear in A (real) and ``b = B e^{iC}``; D is
    scanned on a grid fine enough to resolve one phase turn across the
    band, and the best grid point seeds a joint nonlinear refinement.
    """
    if len(measured) != len(modeled) or not np.array_equal(measured.freqs, modeled.freqs):
        raise GridMismatchError("measured and modeled traces use different frequency grids")
    f = measured.freqs
    w = 2 * np.pi * f
    m, s = measured.values, modeled.values
    span = f[-1] - f[0]
    df = np.min(np.diff(f)) if len(f) > 1 else span
    d_max = min(max_delay, 0.5 / df)
    step = 1.0 / (8 * span)
    grid = np.arange(-d_max, d_max + step / 2, step)

    def solve_linear(e):
        # real unknowns [A, Re b, Im b]
        cols = np.stack([s, e, 1j * e], axis=-1)
        mat = np.concatenate([cols.real, cols.imag], axis=0)
        rhs = np.concatenate([m.real, m.imag])
        sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        r = mat @ sol - rhs
        return sol, float(r @ r)

    best = (math.inf, 0.0, None)
    wc = w - w.mean()
    for d in grid:
        sol, cost = solve_linear(np.exp(1j * wc * d))
        if cost < best[0]:
            best = (cost, d, sol)
    _, d0, sol = best

    def resid(p):
        r = p[0] * s + (p[1] + 1j * p[2]) * np.exp(1j * wc * (d0 + step * p[3])) - m
        return np.concatenate([r.real, r.imag])

    res = least_squares(resid, np.array([sol[0], sol[1], sol[2], 0.0]), method="lm",
                        xtol=1e-14, ftol=1e-15, gtol=1e-15)
    a, br, bi, dd = res.x
    d = d0 + step * dd
    b = complex(br, bi) * np.exp(-1j * w.mean() * d)  # back to absolute w
    return InterferenceParams(float(a), float(abs(b)), float(_wrap(np.angle(b))) if abs(b) > 0 else 0.0, float(d))
