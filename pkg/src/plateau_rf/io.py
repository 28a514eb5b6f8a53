"""File formats: JSON netlist documents and CSV spectra/traces.

Frequencies in files are in Hz; conversion to rad/s happens here. Floats
are written with ``repr`` so every CSV round-trips bit-exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .design import LadderFilter
from .errors import InvalidInputError
from .fitting import ComplexTrace
from .network import (
    Netlist,
    SeriesCapacitor,
    SeriesInductor,
    ShuntCapacitor,
    ShuntInductor,
    TransmissionLine,
)

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_LUMPED_KINDS = {
    "series_capacitor": SeriesCapacitor,
    "series_inductor": SeriesInductor,
    "shunt_capacitor": ShuntCapacitor,
    "shunt_inductor": ShuntInductor,
}

NETLIST_SCHEMA = {
    "type": "object",
    "required": ["z0_ohms", "elements"],
    "properties": {
        "z0_ohms": _POSITIVE,
        "elements": {
            "type": "array",
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["kind", "value"],
                        "properties": {"kind": {"enum": sorted(_LUMPED_KINDS)}, "value": _POSITIVE},
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "required": ["kind", "z_ohms", "v_mps", "l_m"],
                        "properties": {
                            "kind": {"const": "transmission_line"},
                            "z_ohms": _POSITIVE,
                            "v_mps": _POSITIVE,
                            "l_m": _POSITIVE,
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "qubit": {
            "type": "object",
            "required": ["c_c_f", "c_res_f", "l_res_h", "c_q_f"],
            "properties": {
                "c_c_f": {"type": "number", "minimum": 0},
                "c_res_f": _POSITIVE,
                "l_res_h": _POSITIVE,
                "c_q_f": _POSITIVE,
            },
            "additionalProperties": False,
        },
    },
}


class DocumentError(InvalidInputError):
    """Malformed or schema-violating input file."""


@dataclass(frozen=True)
class QubitBlock:
    c_c: float
    c_res: float
    l_res: float
    c_q: float


@dataclass(frozen=True)
class NetlistDocument:
    netlist: Netlist
    raw: dict
    qubit: Optional[QubitBlock] = None

    def ladder(self) -> Optional[LadderFilter]:
        """The document as an alternating series-C/shunt-L ladder, if it is one."""
        kinds = [e["kind"] for e in self.raw["elements"]]
        want = ["series_capacitor" if i % 2 == 0 else "shunt_inductor" for i in range(len(kinds))]
        if not kinds or kinds != want:
            return None
        return LadderFilter(tuple(e["value"] for e in self.raw["elements"]), self.netlist.z0)


def schema_errors(doc) -> list:
    known = set(_LUMPED_KINDS) | {"transmission_line"}
    if isinstance(doc, dict) and isinstance(doc.get("elements"), list):
        bad = [f"elements/{i}: unknown kind {e.get('kind')!r} (expected one of {sorted(known)})"
               for i, e in enumerate(doc["elements"])
               if isinstance(e, dict) and e.get("kind") not in known]
        if bad:
            return bad
    v = jsonschema.Draft7Validator(NETLIST_SCHEMA)
    return [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
            for e in sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))]


def parse_netlist(doc: dict) -> NetlistDocument:
    errs = schema_errors(doc)
    if errs:
        raise DocumentError("invalid netlist document:\n  " + "\n  ".join(errs))
    elements = []
    for e in doc["elements"]:
        if e["kind"] == "transmission_line":
            elements.append(TransmissionLine(e["l_m"], e["z_ohms"], e["v_mps"]))
        else:
            elements.append(_LUMPED_KINDS[e["kind"]](e["value"]))
    q = doc.get("qubit")
    qubit = QubitBlock(q["c_c_f"], q["c_res_f"], q["l_res_h"], q["c_q_f"]) if q else None
    return NetlistDocument(Netlist(elements, doc["z0_ohms"]), doc, qubit)


def load_netlist(path) -> NetlistDocument:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: not valid JSON ({exc})") from exc
    return parse_netlist(doc)


def dump_json(obj, path) -> None:
    """Deterministic JSON: sorted keys, fixed indent, trailing newline."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


# --------------------------------------------------------------------- CSV


def _fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_columns(path, header, columns) -> None:
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])


def read_columns(path):
    """``(header, [column arrays])``; raises DocumentError on bad content."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DocumentError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    try:
        data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), -1)
    except ValueError as exc:
        raise DocumentError(f"{path}: non-numeric entry ({exc})") from exc
    if data.shape[1] != len(header) and len(body):
        raise DocumentError(f"{path}: rows do not match header {header}")
    return header, [data[:, i] for i in range(len(header))]


def write_sweep(path, freq_hz, re_y, kappa_hz=None) -> None:
    if kappa_hz is None:
        write_columns(path, ["freq_hz", "re_y_siemens"], [freq_hz, re_y])
    else:
        write_columns(path, ["freq_hz", "re_y_siemens", "kappa_hz"], [freq_hz, re_y, kappa_hz])


def read_sweep(path) -> dict:
    header, cols = read_columns(path)
    if header[:2] != ["freq_hz", "re_y_siemens"]:
        raise DocumentError(f"{path}: unexpected header {header}")
    if np.any(np.diff(cols[0]) <= 0):
        raise DocumentError(f"{path}: frequency column is not increasing")
    return dict(zip(header, cols))


def write_trace(path, trace: ComplexTrace) -> None:
    write_columns(path, ["freq_hz", "re", "im"], [trace.freqs, trace.values.real, trace.values.imag])


def read_trace(path) -> ComplexTrace:
    header, cols = read_columns(path)
    if header != ["freq_hz", "re", "im"]:
        raise DocumentError(f"{path}: expected header freq_hz,re,im, got {header}")
    return ComplexTrace(cols[0], cols[1] + 1j * cols[2])
