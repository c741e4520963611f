import json

import numpy as np
import pytest
from hypothesis import given

from conftest import seeds
from qmaj import codec
from qmaj.entanglement import build_protocol, outcome_distribution
from qmaj.errors import FormatError
from qmaj.generators import entanglement_instance, random_density, random_measurement


def roundtrip(obj):
    return codec.loads(codec.dumps(obj))


@given(seeds)
def test_matrix_round_trip_is_exact(seed):
    rng = np.random.default_rng(seed)
    r, c = (int(v) for v in rng.integers(1, 6, size=2))
    m = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    assert np.array_equal(codec.decode_matrix(roundtrip(codec.encode_matrix(m))), m)


def test_matrix_layout():
    payload = codec.encode_matrix(np.array([[1, 2j], [3, 4]]))
    assert payload == {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


def test_dumps_is_deterministic():
    text = codec.dumps({"b": 1, "a": [0.5]})
    assert text.endswith("\n")
    assert text == codec.dumps({"a": [0.5], "b": 1})


@pytest.mark.parametrize("text", ['{"rows": 1, "cols": 1, "data": [[NaN, 0]]}',
                                  '{"rows": 1, "cols": 1, "data": [[Infinity, 0]]}'])
def test_non_finite_input_rejected(text):
    with pytest.raises(FormatError):
        codec.decode_matrix(codec.loads(text))


def test_non_finite_output_rejected():
    with pytest.raises(FormatError):
        codec.dumps({"x": float("nan")})


@pytest.mark.parametrize("payload", [
    {"rows": 2, "cols": 2, "data": [[1, 0]] * 3},
    {"rows": 0, "cols": 1, "data": []},
    {"rows": 1, "cols": 1, "data": [[1, 0, 0]]},
    {"rows": 1, "cols": 1, "data": [["a", 0]]},
    {"rows": 1, "cols": 1},
    [1, 2],
])
def test_malformed_matrices_rejected(payload):
    with pytest.raises(FormatError):
        codec.decode_matrix(payload)


def test_malformed_json_rejected():
    with pytest.raises(FormatError):
        codec.loads("{not json")


def test_spectrum_and_targets():
    assert np.array_equal(codec.decode_spectrum(roundtrip(codec.encode_spectrum([0.5, 0.25, 0.25]))),
                          [0.5, 0.25, 0.25])
    p, spectra = codec.decode_spectral_targets(roundtrip(codec.encode_spectral_targets([0.4, 0.6], [[1.0], [0.5, 0.5]])))
    assert np.array_equal(p, [0.4, 0.6]) and np.array_equal(spectra[1], [0.5, 0.5])
    with pytest.raises(FormatError):
        codec.decode_spectral_targets({"probabilities": [1.0], "spectra": [[1.0], [1.0]]})
    with pytest.raises(FormatError):
        codec.decode_spectrum({"x": 1})


def test_ensemble_round_trip(rng):
    states = [random_density(rng, 3) for _ in range(2)]
    p, back = codec.decode_ensemble(roundtrip(codec.encode_ensemble([0.3, 0.7], states)))
    assert np.array_equal(p, [0.3, 0.7])
    assert all(np.array_equal(a, b) for a, b in zip(states, back))


def test_ensemble_dimension_mismatch_rejected(rng):
    payload = codec.encode_ensemble([0.5, 0.5], [random_density(rng, 2), random_density(rng, 3)])
    with pytest.raises(FormatError):
        codec.decode_ensemble(payload)


def test_labels():
    assert codec.encode_label((1, 2)) == "1,2"
    assert codec.decode_label("1,2") == (1, 2)
    assert codec.decode_label("0,0") == (0, 0)
    assert codec.decode_label("3") == 3
    assert codec.decode_label("up") == "up"
    with pytest.raises(FormatError):
        codec.decode_label(3)


def test_measurement_round_trip(rng):
    m = random_measurement(rng, 3, 3)
    mats, labels = codec.decode_measurement(roundtrip(codec.encode_measurement(m.matrices, m.labels)))
    assert labels == list(m.labels)
    assert all(np.array_equal(a, b) for a, b in zip(m.matrices, mats))
    with pytest.raises(FormatError):
        codec.decode_measurement([])
    with pytest.raises(FormatError):
        codec.decode_measurement(codec.encode_measurement([np.eye(2), np.eye(3)]))


def test_bipartite_round_trip(rng):
    psi, p, targets = entanglement_instance(rng, 2, 3, 2)
    back = codec.decode_bipartite(roundtrip(codec.encode_bipartite(psi)))
    assert (back.dim_a, back.dim_b) == (2, 3)
    assert np.array_equal(back.amplitudes, psi.amplitudes)
    q, states = codec.decode_bipartite_targets(roundtrip(codec.encode_bipartite_targets(p, targets)))
    assert np.array_equal(q, p) and len(states) == 2
    bad = codec.encode_bipartite(psi)
    bad["dimB"] = 2
    with pytest.raises(FormatError):
        codec.decode_bipartite(bad)


def test_plan_round_trip(rng):
    psi, p, targets = entanglement_instance(rng, 3, 2, 2)
    plan = build_protocol(psi, (p, targets))
    back = codec.decode_plan(roundtrip(codec.encode_plan(plan)))
    assert back.alice.labels == plan.alice.labels
    assert back.outcome_probs == plan.outcome_probs
    for lab in plan.alice.labels:
        assert np.array_equal(back.bob_unitaries[lab], plan.bob_unitaries[lab])
    a, b = outcome_distribution(psi, plan), outcome_distribution(psi, back)
    assert a.keys() == b.keys() and all(a[k] == b[k] for k in a)


def test_plan_with_bad_operator_shape_rejected(rng):
    psi, p, targets = entanglement_instance(rng, 2, 2, 1)
    payload = codec.encode_plan(build_protocol(psi, (p, targets)))
    payload["outcomes"][0]["bob"] = codec.encode_matrix(np.eye(3))
    with pytest.raises(FormatError):
        codec.decode_plan(payload)


def test_read_write(tmp_path):
    path = tmp_path / "m.json"
    codec.write(path, codec.encode_matrix(np.eye(2)))
    assert json.loads(path.read_text())["rows"] == 2
    assert np.array_equal(codec.decode_matrix(codec.read(path)), np.eye(2))
