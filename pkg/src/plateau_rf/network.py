"""Two-port (ABCD) algebra for ladder networks.

All frequencies are angular (rad/s). Element matrices follow the usual
convention ``[V1, I1] = [[A, B], [C, D]] @ [V2, -I2]``, so a cascade is a
left-to-right matrix product and the input admittance against a load
``Z0`` is ``(C*Z0 + D) / (A*Z0 + B)``.

Entries may be numpy arrays, in which case everything broadcasts over a
frequency sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    InvalidInputError,
    LosslessContractError,
    SingularFrequencyError,
    SingularMatrixError,
)

Number = Union[complex, float, np.ndarray]

# |A Z0 + B| below this is treated as a network zero
SINGULAR_FLOOR = 1e-300
LOSSLESS_RTOL = 1e-12


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidInputError(f"angular frequency must be positive, got {omega!r}")
    return omega


def _positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise InvalidInputError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class TwoPort:
    """ABCD matrix of a reciprocal two-port at one frequency (or a sweep)."""

    a: Number
    b: Number
    c: Number
    d: Number

    @classmethod
    def identity(cls) -> "TwoPort":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, m) -> "TwoPort":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "TwoPort") -> "TwoPort":
        return TwoPort(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def norm(self):
        """Frobenius norm (entrywise over a sweep)."""
        return np.sqrt(abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2)


# --------------------------------------------------------------------- elements


class CircuitElement:
    """Base class; subclasses implement ``abcd(omega)``."""

    #: "series" elements add a node in the nodal picture, "shunt" ones do not
    topology = "series"

    def abcd(self, omega) -> TwoPort:  # pragma: no cover - abstract
        raise NotImplementedError


def _series(z) -> TwoPort:
    one = np.ones_like(z, dtype=complex) if np.ndim(z) else 1.0 + 0j
    return TwoPort(one, z, 0 * one, one)


def _shunt(y) -> TwoPort:
    one = np.ones_like(y, dtype=complex) if np.ndim(y) else 1.0 + 0j
    return TwoPort(one, 0 * one, y, one)


@dataclass(frozen=True)
class SeriesCapacitor(CircuitElement):
    capacitance: float

    def __post_init__(self):
        _positive("capacitance", self.capacitance)

    def impedance(self, omega):
        return 1.0 / (1j * omega * self.capacitance)

    def abcd(self, omega):
        return _series(self.impedance(omega))


@dataclass(frozen=True)
class SeriesInductor(CircuitElement):
    inductance: float

    def __post_init__(self):
        _positive("inductance", self.inductance)

    def impedance(self, omega):
        return 1j * omega * self.inductance

    def abcd(self, omega):
        return _series(self.impedance(omega))


@dataclass(frozen=True)
class ShuntInductor(CircuitElement):
    inductance: float
    topology = "shunt"

    def __post_init__(self):
        _positive("inductance", self.inductance)

    def admittance(self, omega):
        return 1.0 / (1j * omega * self.inductance)

    def abcd(self, omega):
        return _shunt(self.admittance(omega))


@dataclass(frozen=True)
class ShuntCapacitor(CircuitElement):
    capacitance: float
    topology = "shunt"

    def __post_init__(self):
        _positive("capacitance", self.capacitance)

    def admittance(self, omega):
        return 1j * omega * self.capacitance

    def abcd(self, omega):
        return _shunt(self.admittance(omega))


def _evaluate(f, omega):
    if callable(f):
        return f(omega)
    return f * np.ones_like(omega, dtype=complex) if np.ndim(omega) else complex(f)


@dataclass(frozen=True)
class SeriesImpedance(CircuitElement):
    """Generic series branch; ``z`` is a constant or a callable of omega."""

    z: Union[complex, Callable]

    def impedance(self, omega):
        return _evaluate(self.z, omega)

    def abcd(self, omega):
        return _series(np.asarray(self.impedance(omega), dtype=complex)[()])


@dataclass(frozen=True)
class ShuntAdmittance(CircuitElement):
    """Generic shunt branch; ``y`` is a constant or a callable of omega."""

    y: Union[complex, Callable]
    topology = "shunt"

    def admittance(self, omega):
        return _evaluate(self.y, omega)

    def abcd(self, omega):
        return _shunt(np.asarray(self.admittance(omega), dtype=complex)[()])


@dataclass(frozen=True)
class TransmissionLine(CircuitElement):
    """Lossless line segment: length (m), characteristic impedance (ohm),
    phase velocity (m/s)."""

    length: float
    z0: float
    velocity: float

    def __post_init__(self):
        _positive("length", self.length)
        _positive("characteristic impedance", self.z0)
        _positive("phase velocity", self.velocity)

    def electrical_length(self, omega):
        return omega * self.length / self.velocity

    def abcd(self, omega):
        bl = self.electrical_length(omega)
        cos, sin = np.cos(bl) + 0j, np.sin(bl)
        return TwoPort(cos, 1j * self.z0 * sin, 1j * sin / self.z0, cos)


def element_abcd(element: CircuitElement, omega) -> TwoPort:
    """ABCD matrix of a single element at ``omega`` (rad/s)."""
    _check_omega(omega)
    return element.abcd(omega)


def cascade(ports: Sequence[TwoPort]) -> TwoPort:
    """Left-to-right product; the empty cascade is the identity."""
    out = TwoPort.identity()
    for p in ports:
        out = out @ p
    return out


# --------------------------------------------------------------------- netlists


@dataclass(frozen=True)
class Netlist:
    """Ordered ladder (port-1 side first) terminated in a real load ``z0``."""

    elements: tuple = ()
    z0: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        _positive("termination", self.z0)
        for e in self.elements:
            if not isinstance(e, CircuitElement):
                raise InvalidInputError(f"not a circuit element: {e!r}")

    def abcd(self, omega) -> TwoPort:
        _check_omega(omega)
        start = _series(0j * np.asarray(omega, dtype=float)) if np.ndim(omega) else TwoPort.identity()
        return cascade([start] + [e.abcd(omega) for e in self.elements])

    def prepend(self, *elements: CircuitElement) -> "Netlist":
        return Netlist(tuple(elements) + self.elements, self.z0)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        if pts.size == 0 or np.any(pts <= 0) or np.any(np.diff(pts) <= 0):
            raise InvalidInputError("frequency grid must be positive and strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def linear_hz(cls, f_start: float, f_stop: float, n: int) -> "FrequencyGrid":
        return cls(2 * np.pi * np.linspace(f_start, f_stop, n))

    @classmethod
    def log_hz(cls, f_start: float, f_stop: float, n: int) -> "FrequencyGrid":
        return cls(2 * np.pi * np.geomspace(f_start, f_stop, n))

    @property
    def hz(self) -> np.ndarray:
        return self.points / (2 * np.pi)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def input_admittance(netlist: Netlist, omega):
    """Admittance at port 1 with port 2 terminated in ``netlist.z0``."""
    m = netlist.abcd(omega)
    z0 = netlist.z0
    den = m.a * z0 + m.b
    if np.any(abs(den) < SINGULAR_FLOOR):
        raise SingularFrequencyError(f"network zero at omega={omega!r}")
    return (m.c * z0 + m.d) / den


def is_lossless(m: TwoPort, rtol: float = LOSSLESS_RTOL) -> bool:
    tol = rtol * m.norm()
    worst = np.maximum.reduce(
        [abs(np.imag(m.a)), abs(np.imag(m.d)), abs(np.real(m.b)), abs(np.real(m.c))]
    )
    return bool(np.all(worst <= tol))


def re_admittance_lossless(filter_abcd: TwoPort, z0: float):
    """Re[Y] of a lossless filter terminated in ``z0``.

    With A, D real and B, C imaginary the real part reduces to
    ``Z0 / (|A|^2 Z0^2 + |B|^2)``, which is strictly positive and avoids
    the cancellation in ``Re[(C Z0 + D)/(A Z0 + B)]``.
    """
    _positive("termination", z0)
    if not is_lossless(filter_abcd):
        raise LosslessContractError("ABCD matrix is not lossless (A, D real; B, C imaginary)")
    return z0 / (abs(filter_abcd.a) ** 2 * z0**2 + abs(filter_abcd.b) ** 2)


# --------------------------------------------------------------------- nodal oracle


def nodal_oracle(netlist: Netlist, omega: float) -> complex:
    """Input admittance by nodal analysis, independent of the ABCD route.

    Each run of adjacent series elements becomes one branch to a new node
    (its impedances summed, so a near series resonance does not leave an
    ill-conditioned internal node); shunt branches load the current node;
    a line segment is stamped through its Y-parameters; the load is a
    resistor to ground on the last node. A unit current is injected at
    node 0 and ``Y = 1 / V0``.
    """
    omega = float(omega)
    _check_omega(omega)
    stamps = []  # (i, j, y) ; j is None for ground
    diag_extra = {}
    node = 0
    n_nodes = 1
    pending = 0j  # series impedance not yet stamped

    def flush():
        nonlocal node, n_nodes, pending
        if pending != 0:
            stamps.append(("branch", node, n_nodes, 1.0 / pending))
            node = n_nodes
            n_nodes += 1
        pending = 0j

    for e in netlist.elements:
        if e.topology != "series" or isinstance(e, TransmissionLine):
            flush()
        if isinstance(e, TransmissionLine):
            bl = e.electrical_length(omega)
            s = np.sin(bl)
            if abs(s) < 1e-300:
                raise SingularMatrixError("line segment is a multiple of a half wavelength")
            y_self = -1j / (e.z0 * np.tan(bl))
            y_mut = 1j / (e.z0 * s)
            new = n_nodes
            n_nodes += 1
            diag_extra[node] = diag_extra.get(node, 0) + y_self
            diag_extra[new] = diag_extra.get(new, 0) + y_self
            stamps.append(("mutual", node, new, y_mut))
            node = new
        elif e.topology == "series":
            pending += complex(e.impedance(omega))
        else:
            diag_extra[node] = diag_extra.get(node, 0) + complex(e.admittance(omega))
    flush()
    diag_extra[node] = diag_extra.get(node, 0) + 1.0 / netlist.z0

    # Diagonal sums mix large branch admittances with small shunt ones, and
    # the result depends on the small ones' low bits: stamp in extended
    # precision and refine the float64 solve against that matrix.
    Y = np.zeros((n_nodes, n_nodes), dtype=np.clongdouble)
    for kind, i, j, y in stamps:
        if kind == "branch":
            Y[i, i] += y
            Y[j, j] += y
            Y[i, j] -= y
            Y[j, i] -= y
        else:
            # two-port Y12 = Y21 enter the nodal matrix directly
            Y[i, j] += y
            Y[j, i] += y
    for i, y in diag_extra.items():
        Y[i, i] += y

    rhs = np.zeros(n_nodes, dtype=np.clongdouble)
    rhs[0] = 1.0
    y64 = Y.astype(complex)
    try:
        v = np.linalg.solve(y64, rhs.astype(complex)).astype(np.clongdouble)
        for _ in range(3):
            v += np.linalg.solve(y64, (rhs - Y @ v).astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    if not np.all(np.isfinite(v)) or v[0] == 0:
        raise SingularMatrixError("nodal system is singular")
    return complex(1 / v[0])
