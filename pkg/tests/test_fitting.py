import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plateau_rf.errors import (
    DegenerateGeometryError,
    GridMismatchError,
    InvalidInputError,
    PhaseUnwrapError,
)
from plateau_rf.fitting import (
    CircleParams,
    ComplexTrace,
    FitWarning,
    InterferenceParams,
    ResonanceFit,
    canonicalize,
    fit_trace,
    initial_guess,
    interference_fit,
    lsq_resonance_fit,
    remove_cable_delay,
    resonance_model,
    synth_trace,
    taubin_fit,
    windowed_fit,
)

F_R, KAPPA, R = 7.3e9, 8e6, 0.5
BASE = ResonanceFit(0.0, 0.0, R, 0.0, KAPPA, F_R)


def grid(f_r=F_R, kappa=KAPPA, span=10, n=401):
    return np.linspace(f_r - span * kappa, f_r + span * kappa, n)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FitWarning)
        yield


# ---------------------------------------------------------------- model and synthesis


def test_synth_matches_formula():
    f = grid()
    p = ResonanceFit(0.1, -0.2, 0.4, 0.3, KAPPA, F_R)
    t = synth_trace(p, f)
    expect = 0.1 - 0.2j + 2 * 0.4 * np.exp(0.3j) / (1 + 2j * (f - F_R) / KAPPA)
    np.testing.assert_array_equal(t.values, expect)


def test_synth_at_resonance():
    p = ResonanceFit(0.1, -0.2, 0.4, 0.3, KAPPA, F_R)
    v = synth_trace(p, [F_R]).values[0]
    assert v == pytest.approx(0.1 - 0.2j + 0.8 * np.exp(0.3j), abs=1e-15)


def test_kappa_is_full_width():
    # |S - offset|^2 falls to half its peak at f_r +/- kappa/2
    v = resonance_model(np.array([F_R, F_R + KAPPA / 2, F_R - KAPPA / 2]), 0, 0, R, 0, KAPPA, F_R)
    assert abs(v[1]) ** 2 / abs(v[0]) ** 2 == pytest.approx(0.5, rel=1e-14)
    assert abs(v[2]) ** 2 / abs(v[0]) ** 2 == pytest.approx(0.5, rel=1e-14)


def test_synth_deterministic_per_seed():
    a = synth_trace(BASE, grid(), noise_sigma=0.01, seed=4)
    b = synth_trace(BASE, grid(), noise_sigma=0.01, seed=4)
    c = synth_trace(BASE, grid(), noise_sigma=0.01, seed=5)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_trace_validation():
    with pytest.raises(InvalidInputError):
        ComplexTrace([1.0, 2.0], [1.0])
    with pytest.raises(InvalidInputError):
        ComplexTrace([2.0, 1.0], [1.0, 1.0])


# ---------------------------------------------------------------- cable delay


def test_pure_delay_constant_trace():
    f = grid()
    tau = 30e-9
    t = ComplexTrace(f, 0.7 * np.exp(-2j * np.pi * f * tau))
    out, est = remove_cable_delay(t)
    assert abs(est - tau) < 1e-12
    np.testing.assert_allclose(out.values, 0.7, atol=1e-6)


def test_zero_delay():
    t = ComplexTrace(grid(), np.full(401, 0.3 + 0.1j))
    out, est = remove_cable_delay(t)
    assert abs(est) < 1e-18
    np.testing.assert_allclose(out.values, t.values, rtol=0, atol=1e-11)


def test_delay_on_resonance_trace():
    t = synth_trace(BASE, grid(), tau=30e-9)
    _, est = remove_cable_delay(t)
    assert est == pytest.approx(30e-9, rel=0.01)


def test_unwrap_failure():
    f = np.linspace(7e9, 7.1e9, 50)
    # alternating sign: adjacent edge samples jump by pi
    v = np.where(np.arange(50) % 2 == 0, 1.0, -1.0) + 0j
    with pytest.raises(PhaseUnwrapError):
        remove_cable_delay(ComplexTrace(f, v))


# ---------------------------------------------------------------- Taubin


def test_taubin_exact_circle():
    z = 0.3 + 0.1j + 0.25 * np.exp(1j * np.linspace(0, 2 * np.pi, 16, endpoint=False))
    c = taubin_fit(z)
    assert abs(c.center - (0.3 + 0.1j)) < 1e-12
    assert abs(c.radius - 0.25) < 1e-12


def test_taubin_three_points():
    pts = np.array([1.0, 1j, -1.0]) * 2 + (0.5 - 0.5j)
    c = taubin_fit(pts)
    assert abs(c.center - (0.5 - 0.5j)) < 1e-12
    assert c.radius == pytest.approx(2.0, rel=1e-12)


@given(st.complex_numbers(max_magnitude=10), st.floats(1e-3, 1e3),
       st.floats(0, 2 * np.pi), st.floats(0.5, 2 * np.pi), st.integers(3, 40))
def test_taubin_exact_on_arcs(center, radius, start, arc, n):
    z = center + radius * np.exp(1j * np.linspace(start, start + arc, n, endpoint=False))
    c = taubin_fit(z)
    assert abs(c.center - center) <= 1e-8 * radius
    assert abs(c.radius - radius) <= 1e-8 * radius


def test_taubin_collinear():
    with pytest.raises(DegenerateGeometryError):
        taubin_fit(np.linspace(0, 1, 10) * (1 + 2j) + 0.5)
    with pytest.raises(DegenerateGeometryError):
        taubin_fit([1 + 1j, 2 + 2j])


def test_taubin_noisy_monte_carlo():
    n, sigma, r0, c0 = 64, 0.01, 0.5, 0.2 - 0.1j
    theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
    errs_c, errs_r = [], []
    for seed in range(500):
        rng = np.random.default_rng(seed)
        z = c0 + r0 * np.exp(1j * theta) + sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        c = taubin_fit(z)
        errs_c.append(abs(c.center - c0))
        errs_r.append(c.radius - r0)
    bound = 3 * sigma / math.sqrt(n)
    assert math.sqrt(np.mean(np.square(errs_c))) < bound
    assert math.sqrt(np.mean(np.square(errs_r))) < bound


# ---------------------------------------------------------------- canonicalisation


def test_canonical_identity():
    t = synth_trace(BASE, grid())
    out = canonicalize(t, CircleParams(R + 0j, R), F_R)
    np.testing.assert_allclose(out.values, t.values, atol=1e-15)


@given(st.floats(0, 2 * np.pi), st.complex_numbers(max_magnitude=5))
def test_canonical_rigid_motion_invariance(theta, shift):
    t = synth_trace(ResonanceFit(0.1, 0.2, R, 0.4, KAPPA, F_R), grid())
    moved = t.with_values(t.values * np.exp(1j * theta) + shift)
    a = canonicalize(t, taubin_fit(t.values), F_R)
    b = canonicalize(moved, taubin_fit(moved.values), F_R)
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_canonical_preserves_distances():
    t = synth_trace(ResonanceFit(0.1, 0.2, R, 0.4, KAPPA, F_R), grid(n=50))
    out = canonicalize(t, taubin_fit(t.values), F_R)
    d0 = abs(t.values[:, None] - t.values[None, :])
    d1 = abs(out.values[:, None] - out.values[None, :])
    np.testing.assert_allclose(d1, d0, atol=1e-12)


def test_canonical_resonance_point():
    t = synth_trace(ResonanceFit(-0.3, 0.2, R, 1.1, KAPPA, F_R), grid(), noise_sigma=0.005, seed=1)
    out = canonicalize(t, taubin_fit(t.values), F_R)
    k = np.argmin(abs(t.freqs - F_R))
    assert abs(out.values[k] - 2 * R) < 0.01 * 2 * R


def test_canonical_outside_span():
    t = synth_trace(BASE, grid())
    with pytest.raises(InvalidInputError):
        canonicalize(t, CircleParams(R + 0j, R), 1e9)


# ---------------------------------------------------------------- least squares


def test_lsq_exact_recovery():
    t = synth_trace(BASE, grid())
    fit = lsq_resonance_fit(t, ResonanceFit(0.01, -0.01, 0.45, 0.05, 0.9 * KAPPA, F_R + 0.2 * KAPPA))
    assert fit.kappa == pytest.approx(KAPPA, rel=1e-9)
    assert fit.f_r == pytest.approx(F_R, rel=1e-12)
    assert fit.radius == pytest.approx(R, rel=1e-9)
    assert fit.converged
    assert fit.rms_residual < 1e-8


def test_lsq_too_few_points():
    t = synth_trace(BASE, grid(n=7))
    with pytest.raises(InvalidInputError):
        lsq_resonance_fit(t, BASE)


def test_lsq_noisy_monte_carlo():
    f = grid()
    hits = 0
    for seed in range(500):
        t = synth_trace(BASE, f, noise_sigma=0.05 * R, seed=seed)
        hits += abs(lsq_resonance_fit(t, BASE).kappa / KAPPA - 1) < 0.05
    assert hits >= 475


def test_lsq_error_estimate_is_calibrated():
    f = grid()
    fits = [lsq_resonance_fit(synth_trace(BASE, f, noise_sigma=0.02, seed=s), BASE) for s in range(200)]
    spread = np.std([x.kappa for x in fits])
    reported = np.median([x.kappa_err for x in fits])
    assert reported == pytest.approx(spread, rel=0.25)


# ---------------------------------------------------------------- windows


def test_windows_ideal_trace():
    t = synth_trace(BASE, grid())
    w = windowed_fit(t, [1 * KAPPA, 2 * KAPPA, 5 * KAPPA], BASE)
    np.testing.assert_allclose([x.kappa for x in w.per_window], KAPPA, rtol=1e-9)
    assert w.kappa_std < 1e-8 * KAPPA


def test_windows_equal_errors_give_arithmetic_mean():
    from plateau_rf.fitting import _weighted

    mean, std = _weighted([1.0, 2.0, 6.0], [0.5, 0.5, 0.5])
    assert mean == pytest.approx(3.0)
    assert std == pytest.approx(np.std([1.0, 2.0, 6.0]))


def test_windows_asymmetric_background():
    # Fano-like distortion: background with its own delay
    f = grid()
    t = synth_trace(BASE, f, interference=InterferenceParams(1.0, 0.05, 0.3, 20e-9))
    w = windowed_fit(t, [1 * KAPPA, 1.5 * KAPPA, 2 * KAPPA, 3 * KAPPA, 5 * KAPPA], BASE)
    ks = [x.kappa for x in w.per_window]
    assert w.kappa_std > 0
    assert min(ks) <= w.kappa_mean <= max(ks)


def test_windows_skip_sparse():
    t = synth_trace(BASE, grid(n=41))
    with pytest.warns(FitWarning):
        w = windowed_fit(t, [0.1 * KAPPA, 3 * KAPPA, 5 * KAPPA], BASE)
    assert len(w.per_window) == 2


def test_windows_need_two():
    with pytest.raises(InvalidInputError):
        windowed_fit(synth_trace(BASE, grid()), [KAPPA], BASE)


# ---------------------------------------------------------------- interference


def test_interference_identity_and_scale():
    f = grid()
    s = synth_trace(BASE, f)
    p = interference_fit(s, s)
    assert p.A == pytest.approx(1.0, abs=1e-10) and p.B < 1e-10
    p = interference_fit(s.with_values(0.5 * s.values), s)
    assert p.A == pytest.approx(0.5, abs=1e-10) and p.B < 1e-10


def test_interference_roundtrip():
    f = grid()
    s = synth_trace(BASE, f)
    true = InterferenceParams(0.8, 0.01, 1.0, 2e-9)
    p = interference_fit(ComplexTrace(f, true.apply(f, s.values)), s)
    assert p.A == pytest.approx(0.8, rel=0.01)
    assert p.B == pytest.approx(0.01, rel=0.01)
    assert abs(math.remainder(p.C - 1.0, 2 * math.pi)) < 0.05
    assert p.D == pytest.approx(2e-9, rel=0.02)


def test_interference_grid_mismatch():
    s = synth_trace(BASE, grid())
    with pytest.raises(GridMismatchError):
        interference_fit(s, synth_trace(BASE, grid(n=400)))


def test_interference_params_validated():
    with pytest.raises(InvalidInputError):
        InterferenceParams(0.0, 0.1, 0, 0)
    with pytest.raises(InvalidInputError):
        InterferenceParams(1.0, -0.1, 0, 0)


# ---------------------------------------------------------------- full pipeline


def test_initial_guess():
    f0, k0 = initial_guess(synth_trace(BASE, grid(n=2001)))
    assert f0 == pytest.approx(F_R, abs=KAPPA / 100)
    assert k0 == pytest.approx(KAPPA, rel=0.05)


def test_pipeline_roundtrip_with_delay():
    t = synth_trace(ResonanceFit(0.2, -0.1, R, 0.7, KAPPA, F_R), grid(), tau=30e-9)
    r = fit_trace(t)
    assert r.f_r == pytest.approx(F_R, rel=1e-12)
    assert r.kappa == pytest.approx(KAPPA, rel=1e-9)
    assert r.tau == pytest.approx(30e-9, rel=1e-6)
    assert r.converged


@settings(max_examples=25)
@given(st.floats(-5, -2), st.floats(4e9, 9e9), st.floats(-np.pi, np.pi),
       st.complex_numbers(max_magnitude=1), st.floats(0, 50e-9))
def test_pipeline_noise_free_property(log_ratio, f_r, phi, offset, tau):
    kappa = 10**log_ratio * f_r
    p = ResonanceFit(offset.real, offset.imag, 0.4, phi, kappa, f_r)
    r = fit_trace(synth_trace(p, grid(f_r, kappa), tau=tau))
    assert r.f_r == pytest.approx(f_r, rel=1e-9)
    assert r.kappa == pytest.approx(kappa, rel=1e-9)


@settings(max_examples=15)
@given(st.floats(0, 2 * np.pi), st.complex_numbers(max_magnitude=0.5))
def test_pipeline_rigid_motion_invariance(theta, shift):
    t = synth_trace(ResonanceFit(0.1, 0.05, R, 0.3, KAPPA, F_R), grid(), noise_sigma=0.01, seed=2)
    a = fit_trace(t)
    b = fit_trace(t.with_values(t.values * np.exp(1j * theta) + shift))
    assert b.kappa == pytest.approx(a.kappa, rel=1e-9)
    assert b.f_r == pytest.approx(a.f_r, rel=1e-9)


@settings(max_examples=15)
@given(st.floats(0, 2 * np.pi))
def test_pipeline_rotation_invariance_noisy(theta):
    t = synth_trace(ResonanceFit(0.1, 0.05, R, 0.3, KAPPA, F_R), grid(), noise_sigma=0.01, seed=2)
    a = fit_trace(t)
    b = fit_trace(t.with_values(t.values * np.exp(1j * theta)))
    assert b.kappa == pytest.approx(a.kappa, rel=1e-9)
    assert b.f_r == pytest.approx(a.f_r, rel=1e-9)


@settings(max_examples=15)
@given(st.floats(0, 2 * np.pi), st.complex_numbers(max_magnitude=0.5))
def test_pipeline_rigid_motion_invariance_noise_free(theta, shift):
    t = synth_trace(ResonanceFit(0.1, 0.05, R, 0.3, KAPPA, F_R), grid())
    a = fit_trace(t)
    b = fit_trace(t.with_values(t.values * np.exp(1j * theta) + shift))
    assert b.kappa == pytest.approx(a.kappa, rel=1e-9)
    assert b.f_r == pytest.approx(a.f_r, rel=1e-9)


@settings(max_examples=10)
@given(st.floats(-1e9, 1e9))
def test_pipeline_frequency_shift(df):
    t = synth_trace(BASE, grid(), noise_sigma=0.01, seed=3)
    a = fit_trace(t)
    b = fit_trace(ComplexTrace(t.freqs + df, t.values))
    assert b.f_r - a.f_r == pytest.approx(df, abs=1e-9 * F_R)
    assert b.kappa == pytest.approx(a.kappa, rel=1e-9)


def test_estimator_consistency():
    f = grid()
    bias = []
    for sigma in (0.04, 0.02, 0.005):
        ks = [fit_trace(synth_trace(BASE, f, noise_sigma=sigma, seed=s)).kappa for s in range(60)]
        bias.append(abs(np.mean(ks) / KAPPA - 1))
    assert bias[2] < bias[0]
    assert bias[2] < 2e-3


def test_pipeline_recovers_background():
    f = grid(span=10, n=801)
    t = synth_trace(BASE, f, tau=30e-9, interference=InterferenceParams(0.8, 0.05, -2.0, -4e-9),
                    noise_sigma=0.002, seed=0)
    r = fit_trace(t)
    assert r.background is not None
    assert r.background.delay == pytest.approx(-4e-9, rel=0.02)
    assert r.kappa == pytest.approx(KAPPA, rel=0.01)
