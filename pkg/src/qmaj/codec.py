"""JSON file formats for matrices, spectra, ensembles, measurements and plans.

A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with ``data``
in row-major order. Every other payload is built from matrix payloads plus
plain arrays. Decoders reject NaN/Inf and any dimension mismatch with
:class:`~qmaj.errors.FormatError`; semantic checks (Hermitian, trace, ...)
are left to the domain constructors.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError

__all__ = [
    "encode_matrix",
    "decode_matrix",
    "encode_spectrum",
    "decode_spectrum",
    "encode_ensemble",
    "decode_ensemble",
    "encode_measurement",
    "decode_measurement",
    "encode_spectral_targets",
    "decode_spectral_targets",
    "encode_state_targets",
    "decode_state_targets",
    "encode_bipartite",
    "decode_bipartite",
    "encode_bipartite_targets",
    "decode_bipartite_targets",
    "encode_plan",
    "decode_plan",
    "encode_label",
    "decode_label",
    "dumps",
    "loads",
    "read",
    "write",
]


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    try:
        return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _reject_constant(name: str):
    raise FormatError(f"non-finite number {name} in input")


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from exc


def read(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def write(path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def _real(x, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(f"{what}: expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        raise FormatError(f"{what}: non-finite value")
    return float(x)


def _count(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise FormatError(f"{what}: expected a positive integer, got {x!r}")
    return x


def _field(obj, key: str, what: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{what}: expected an object")
    if key not in obj:
        raise FormatError(f"{what}: missing field {key!r}")
    return obj[key]


def _list(x, what: str) -> list:
    if not isinstance(x, list):
        raise FormatError(f"{what}: expected an array")
    return x


def _complex_pairs(data, n: int, what: str) -> np.ndarray:
    data = _list(data, what)
    if len(data) != n:
        raise FormatError(f"{what}: expected {n} entries, got {len(data)}")
    out = np.empty(n, dtype=complex)
    for k, pair in enumerate(data):
        if not isinstance(pair, list) or len(pair) != 2:
            raise FormatError(f"{what}[{k}]: expected a [re, im] pair")
        out[k] = complex(_real(pair[0], what), _real(pair[1], what))
    return out


def _pairs(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).reshape(-1)]


def encode_matrix(m) -> dict:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise FormatError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise FormatError("matrix has NaN or Inf entries")
    return {"rows": a.shape[0], "cols": a.shape[1], "data": _pairs(a)}


def decode_matrix(obj, what: str = "matrix") -> np.ndarray:
    r = _count(_field(obj, "rows", what), f"{what}.rows")
    c = _count(_field(obj, "cols", what), f"{what}.cols")
    return _complex_pairs(_field(obj, "data", what), r * c, f"{what}.data").reshape(r, c)


def encode_spectrum(x) -> list:
    return [float(v) for v in np.asarray(x, dtype=float).reshape(-1)]


def decode_spectrum(obj, what: str = "spectrum") -> np.ndarray:
    vals = [_real(v, what) for v in _list(obj, what)]
    if any(v < 0 for v in vals):
        raise FormatError(f"{what}: negative entry")
    return np.array(vals, dtype=float)


def _probabilities(obj, what: str) -> np.ndarray:
    return np.array([_real(v, what) for v in _list(obj, what)], dtype=float)


def encode_ensemble(probabilities, states) -> dict:
    return {"probabilities": encode_spectrum(probabilities), "states": [encode_matrix(s) for s in states]}


def decode_ensemble(obj) -> tuple[np.ndarray, list[np.ndarray]]:
    p = _probabilities(_field(obj, "probabilities", "ensemble"), "ensemble.probabilities")
    states = [decode_matrix(s, f"ensemble.states[{k}]")
              for k, s in enumerate(_list(_field(obj, "states", "ensemble"), "ensemble.states"))]
    if len(states) != p.size:
        raise FormatError(f"ensemble: {p.size} probabilities for {len(states)} states")
    if len({m.shape for m in states}) > 1:
        raise FormatError("ensemble: states have different shapes")
    return p, states


encode_state_targets = encode_ensemble
decode_state_targets = decode_ensemble


def encode_spectral_targets(probabilities, spectra) -> dict:
    return {"probabilities": encode_spectrum(probabilities), "spectra": [encode_spectrum(s) for s in spectra]}


def decode_spectral_targets(obj) -> tuple[np.ndarray, list[np.ndarray]]:
    p = _probabilities(_field(obj, "probabilities", "targets"), "targets.probabilities")
    spectra = [decode_spectrum(s, f"targets.spectra[{k}]")
               for k, s in enumerate(_list(_field(obj, "spectra", "targets"), "targets.spectra"))]
    if len(spectra) != p.size:
        raise FormatError(f"targets: {p.size} probabilities for {len(spectra)} spectra")
    return p, spectra


def encode_label(label) -> str:
    """Tuples become ``"i,j"``; everything else its ``str``."""
    if isinstance(label, tuple):
        return ",".join(str(x) for x in label)
    return str(label)


def decode_label(text: str):
    if not isinstance(text, str):
        raise FormatError(f"label must be a string, got {text!r}")
    parts = text.split(",")
    if all(p.strip().lstrip("-").isdigit() for p in parts):
        ints = tuple(int(p) for p in parts)
        return ints if len(ints) > 1 else ints[0]
    return text


def encode_measurement(matrices, labels=None) -> list:
    labels = range(1, len(matrices) + 1) if labels is None else labels
    return [{"label": encode_label(lab), "matrix": encode_matrix(m)} for lab, m in zip(labels, matrices)]


def decode_measurement(obj) -> tuple[list[np.ndarray], list]:
    mats, labels = [], []
    for k, item in enumerate(_list(obj, "measurement")):
        labels.append(decode_label(_field(item, "label", f"measurement[{k}]")))
        mats.append(decode_matrix(_field(item, "matrix", f"measurement[{k}]"), f"measurement[{k}].matrix"))
    if not mats:
        raise FormatError("measurement: no matrices")
    shapes = {m.shape[1] for m in mats}
    if len(shapes) != 1:
        raise FormatError("measurement: matrices have different input dimensions")
    return mats, labels


def encode_bipartite(psi) -> dict:
    return {"dimA": psi.dim_a, "dimB": psi.dim_b, "amplitudes": _pairs(psi.amplitudes)}


def decode_bipartite(obj, what: str = "state"):
    from .entanglement import BipartitePureState

    da = _count(_field(obj, "dimA", what), f"{what}.dimA")
    db = _count(_field(obj, "dimB", what), f"{what}.dimB")
    amps = _complex_pairs(_field(obj, "amplitudes", what), da * db, f"{what}.amplitudes")
    return BipartitePureState(da, db, amps)


def encode_bipartite_targets(probabilities, states) -> dict:
    return {"probabilities": encode_spectrum(probabilities), "states": [encode_bipartite(s) for s in states]}


def decode_bipartite_targets(obj) -> tuple[np.ndarray, list]:
    p = _probabilities(_field(obj, "probabilities", "targets"), "targets.probabilities")
    states = [decode_bipartite(s, f"targets.states[{k}]")
              for k, s in enumerate(_list(_field(obj, "states", "targets"), "targets.states"))]
    if len(states) != p.size:
        raise FormatError(f"targets: {p.size} probabilities for {len(states)} states")
    return p, states


def encode_plan(plan) -> dict:
    outcomes = []
    for e, lab in zip(plan.alice.matrices, plan.alice.labels):
        outcomes.append({
            "label": encode_label(lab),
            "alice": encode_matrix(e),
            "bob": encode_matrix(plan.bob_unitaries[lab]),
            "probability": float(plan.outcome_probs.get(lab, 0.0)),
        })
    return {
        "dimA": plan.dim_a,
        "dimB": plan.dim_b,
        "targets": encode_bipartite_targets(plan.probabilities, plan.targets),
        "outcomes": outcomes,
    }


def decode_plan(obj):
    from .entanglement import LOCCProtocol
    from .measurement import GeneralizedMeasurement

    da = _count(_field(obj, "dimA", "plan"), "plan.dimA")
    db = _count(_field(obj, "dimB", "plan"), "plan.dimB")
    p, states = decode_bipartite_targets(_field(obj, "targets", "plan"))
    mats, labels, bob, probs, grouping = [], [], {}, {}, {}
    for k, item in enumerate(_list(_field(obj, "outcomes", "plan"), "plan.outcomes")):
        what = f"plan.outcomes[{k}]"
        lab = decode_label(_field(item, "label", what))
        if not (isinstance(lab, tuple) and len(lab) == 2):
            raise FormatError(f"{what}: label must be 'i,j'")
        e = decode_matrix(_field(item, "alice", what), f"{what}.alice")
        u = decode_matrix(_field(item, "bob", what), f"{what}.bob")
        if e.shape != (da, da) or u.shape != (db, db):
            raise FormatError(f"{what}: operator shapes do not match {da} x {db}")
        mats.append(e)
        labels.append(lab)
        bob[lab] = u
        if lab != (0, 0):
            probs[lab] = _real(_field(item, "probability", what), f"{what}.probability")
            grouping.setdefault(lab[0], []).append(lab[1])
    return LOCCProtocol(da, db, GeneralizedMeasurement(mats, labels), bob, probs, grouping, p, tuple(states))
