import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plateau_rf.errors import InvalidInputError, LosslessContractError, SingularMatrixError
from plateau_rf.network import (
    FrequencyGrid,
    Netlist,
    SeriesCapacitor,
    SeriesImpedance,
    SeriesInductor,
    ShuntAdmittance,
    ShuntCapacitor,
    ShuntInductor,
    TransmissionLine,
    TwoPort,
    cascade,
    element_abcd,
    input_admittance,
    is_lossless,
    nodal_oracle,
    re_admittance_lossless,
)

from conftest import TWO_PI, random_ladder_elements

omegas = st.floats(min_value=TWO_PI * 0.1e9, max_value=TWO_PI * 20e9)
caps = st.floats(min_value=1e-16, max_value=1e-11)
inds = st.floats(min_value=1e-11, max_value=1e-7)


def element_strategy():
    return st.one_of(
        caps.map(SeriesCapacitor),
        caps.map(ShuntCapacitor),
        inds.map(SeriesInductor),
        inds.map(ShuntInductor),
        st.tuples(st.floats(1e-4, 0.05), st.floats(10, 120), st.floats(5e7, 3e8)).map(
            lambda t: TransmissionLine(*t)
        ),
    )


def close(m1: TwoPort, m2: TwoPort, rtol=1e-12):
    a, b = m1.as_array(), m2.as_array()
    return np.max(abs(a - b)) <= rtol * max(np.max(abs(a)), np.max(abs(b)))


# ---------------------------------------------------------------- element_abcd


def test_zero_series_impedance_is_identity():
    m = element_abcd(SeriesImpedance(0.0), TWO_PI * 5e9)
    assert m == TwoPort.identity() or np.allclose(m.as_array(), np.eye(2), atol=0)


def test_half_wave_line_is_minus_identity():
    v, w = 1.2e8, TWO_PI * 7e9
    line = TransmissionLine(length=math.pi * v / w, z0=50.0, velocity=v)
    m = element_abcd(line, w).as_array()
    assert np.allclose(m, -np.eye(2), atol=1e-12)


def test_series_capacitor_table_value():
    c, w = 7.92e-15, TWO_PI * 7e9
    m = element_abcd(SeriesCapacitor(c), w)
    # |Z| = 1/(wC) = 2870.88... ohm
    assert abs(m.b) == pytest.approx(1 / (w * c), rel=1e-15)
    assert m.b.real == 0 and m.b.imag < 0


@pytest.mark.parametrize("bad", [0.0, -1e-15, math.nan])
def test_nonpositive_values_rejected(bad):
    with pytest.raises(InvalidInputError):
        SeriesCapacitor(bad)
    with pytest.raises(InvalidInputError):
        ShuntInductor(bad)


def test_nonpositive_omega_rejected():
    with pytest.raises(InvalidInputError):
        element_abcd(SeriesCapacitor(1e-15), 0.0)
    with pytest.raises(InvalidInputError):
        element_abcd(SeriesCapacitor(1e-15), -1.0)


@given(element_strategy(), omegas)
def test_element_det_is_one(e, w):
    assert abs(element_abcd(e, w).det - 1) < 1e-12


@given(st.one_of(caps.map(SeriesCapacitor), inds.map(ShuntInductor), inds.map(SeriesInductor),
                 caps.map(ShuntCapacitor)), omegas)
def test_lossless_entries_real_or_imaginary(e, w):
    m = element_abcd(e, w)
    assert m.a.imag == 0 and m.d.imag == 0 and m.b.real == 0 and m.c.real == 0


# ---------------------------------------------------------------- cascade


def test_cascade_empty_and_identity():
    m = element_abcd(ShuntInductor(1e-9), 1e10)
    assert cascade([]) == TwoPort.identity()
    assert close(cascade([TwoPort.identity(), m]), m, 0)


def test_cascade_hand_product():
    w, c, l = 4.2e10, 8.1e-15, 1.7e-9
    zc, yl = 1 / (1j * w * c), 1 / (1j * w * l)
    # [[1, zc],[0,1]] @ [[1,0],[yl,1]]
    expect = TwoPort(1 + zc * yl, zc, yl, 1)
    got = cascade([SeriesCapacitor(c).abcd(w), ShuntInductor(l).abcd(w)])
    assert close(got, expect)


@given(st.lists(element_strategy(), min_size=3, max_size=3), omegas)
def test_cascade_associative(els, w):
    m1, m2, m3 = (e.abcd(w) for e in els)
    left = cascade([cascade([m1, m2]), m3])
    right = cascade([m1, cascade([m2, m3])])
    assert close(left, right, 1e-12)


@given(st.lists(element_strategy(), max_size=8), omegas)
def test_cascade_preserves_det(els, w):
    m = cascade([e.abcd(w) for e in els])
    assert abs(m.det - 1) < 1e-9 * max(1.0, m.norm() ** 2)


# ---------------------------------------------------------------- input admittance


def test_empty_netlist_is_bare_load():
    assert input_admittance(Netlist((), 50.0), 1e9) == 0.02
    assert nodal_oracle(Netlist((), 50.0), 1e9) == pytest.approx(0.02, rel=1e-15)


def test_single_series_capacitor_closed_form():
    c, z0, w = 3e-14, 50.0, TWO_PI * 6e9
    expect = 1j * w * c / (1 + 1j * w * c * z0)
    assert input_admittance(Netlist([SeriesCapacitor(c)], z0), w) == pytest.approx(expect, rel=1e-14)


def test_single_shunt_inductor_nodal():
    l, z0, w = 2e-9, 50.0, TWO_PI * 3e9
    expect = 1 / (1j * w * l) + 1 / z0
    assert nodal_oracle(Netlist([ShuntInductor(l)], z0), w) == pytest.approx(expect, rel=1e-14)


def test_table1_third_order_matches_oracle(table1):
    net = table1[3].netlist()
    w = TWO_PI * 7.5e9
    assert abs(input_admittance(net, w) / nodal_oracle(net, w) - 1) < 1e-12


def test_vectorised_matches_scalar(table1):
    net = table1[5].netlist()
    w = TWO_PI * np.linspace(1e9, 10e9, 7)
    vec = input_admittance(net, w)
    assert np.allclose(vec, [input_admittance(net, x) for x in w], rtol=1e-14, atol=0)


def test_generic_elements_accept_callables():
    c = 5e-13
    w = 2e10
    a = Netlist([ShuntAdmittance(lambda x: 1j * x * c)], 50.0)
    b = Netlist([ShuntCapacitor(c)], 50.0)
    assert input_admittance(a, w) == pytest.approx(input_admittance(b, w), rel=1e-15)


def test_nodal_zero_series_impedance_merges_nodes():
    l, c = 1e-9, 1e-12
    w = 1 / math.sqrt(l * c)
    # series LC at resonance is a short, not a singularity
    net = Netlist([SeriesImpedance(lambda x: 1j * x * l + 1 / (1j * x * c))], 50.0)
    assert nodal_oracle(net, w) == pytest.approx(0.02, rel=1e-6)


def test_nodal_singular_raises():
    # an open series branch leaves the driven node floating
    with pytest.raises(SingularMatrixError):
        nodal_oracle(Netlist([SeriesImpedance(math.inf)], 50.0), 1e9)


def test_nodal_half_wave_line_is_transparent():
    # sin(beta l) is ~1e-16 here, so the stamp stays finite and correct
    v, w = 1.2e8, TWO_PI * 5e9
    net = Netlist([TransmissionLine(math.pi * v / w, 50.0, v)], 50.0)
    assert nodal_oracle(net, w) == pytest.approx(0.02, rel=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_nodal_equivalence_random(seed):
    rng = np.random.default_rng(seed)
    els = random_ladder_elements(rng, int(rng.integers(0, 8)))
    if rng.random() < 0.3:
        els.insert(int(rng.integers(len(els) + 1)), TransmissionLine(rng.uniform(1e-3, 2e-2), 50.0, 1.2e8))
    net = Netlist(els, 50.0)
    w = TWO_PI * rng.uniform(0.1e9, 20e9)
    y1, y2 = input_admittance(net, w), nodal_oracle(net, w)
    assert abs(y1 - y2) <= 1e-10 * abs(y2)


@given(st.lists(element_strategy(), max_size=8), omegas)
def test_passivity(els, w):
    y = input_admittance(Netlist(els, 50.0), w)
    assert y.real >= -1e-15


# ---------------------------------------------------------------- lossless formula


def test_lossless_identity_is_bare_load():
    assert re_admittance_lossless(TwoPort.identity(), 50.0) == 0.02


def test_lossless_single_series_c():
    c, z0, w = 8e-15, 50.0, TWO_PI * 7e9
    expect = w**2 * c**2 * z0 / (1 + w**2 * c**2 * z0**2)
    assert re_admittance_lossless(SeriesCapacitor(c).abcd(w), z0) == pytest.approx(expect, rel=1e-14)


def test_lossless_contract_violation():
    m = TwoPort(1.0 + 0.1j, 1j, 0.0, 1.0)
    assert not is_lossless(m)
    with pytest.raises(LosslessContractError):
        re_admittance_lossless(m, 50.0)


@given(st.lists(st.one_of(caps.map(SeriesCapacitor), inds.map(ShuntInductor),
                          inds.map(SeriesInductor), caps.map(ShuntCapacitor)), max_size=7), omegas)
def test_lossless_matches_general(els, w):
    net = Netlist(els, 50.0)
    y = input_admittance(net, w)
    r = re_admittance_lossless(net.abcd(w), 50.0)
    assert r > 0
    # the general formula loses digits when Im dominates; compare against |Y|
    assert abs(r - y.real) <= 1e-10 * max(abs(y.real), 1e-6 * abs(y))


def test_fifth_order_plateau_mean(table1):
    w = TWO_PI * np.linspace(7e9, 8e9, 41)
    vals = re_admittance_lossless(table1[5].abcd(w), 50.0)
    assert np.mean(vals) == pytest.approx(2e-5, rel=0.05)


def test_frequency_grid():
    g = FrequencyGrid.linear_hz(1e9, 2e9, 3)
    assert np.allclose(g.hz, [1e9, 1.5e9, 2e9])
    with pytest.raises(InvalidInputError):
        FrequencyGrid([1.0, 1.0])
    with pytest.raises(InvalidInputError):
        FrequencyGrid([-1.0, 1.0])


def test_netlist_termination_must_be_positive():
    with pytest.raises(InvalidInputError):
        Netlist((), 0.0)
