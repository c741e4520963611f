from collections import Counter

import numpy as np
import pytest
from hypothesis import given

from conftest import seeds
from qmaj.entanglement import (
    BipartitePureState,
    apply_outcome,
    build_protocol,
    ensemble_feasible,
    execute_protocol,
    fidelity,
    nielsen_feasible,
    outcome_distribution,
    schmidt,
)
from qmaj.errors import DimensionError, InfeasibleError, QmajError
from qmaj.generators import entanglement_instance, haar_unitary, random_bipartite
from qmaj.linalg import eigenvalues, partial_trace

BELL = BipartitePureState(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))
PRODUCT = BipartitePureState(2, 2, [1, 0, 0, 0])


def with_schmidt(coeffs, dim=2):
    m = np.zeros((dim, dim))
    m[np.arange(len(coeffs)), np.arange(len(coeffs))] = np.sqrt(coeffs)
    return BipartitePureState.from_matrix(m)


def test_state_validation():
    with pytest.raises(QmajError):
        BipartitePureState(2, 2, [1, 1, 0, 0])
    with pytest.raises(DimensionError):
        BipartitePureState(2, 2, [1, 0, 0])
    with pytest.raises(QmajError):
        BipartitePureState(1, 2, [np.nan, 1])


def test_schmidt_examples():
    assert np.allclose(schmidt(PRODUCT).coefficients, [1, 0])
    assert np.allclose(schmidt(BELL).coefficients, [0.5, 0.5])


@given(seeds)
def test_schmidt_matches_partial_trace_and_reconstructs(seed):
    rng = np.random.default_rng(seed)
    da, db = (int(v) for v in rng.integers(1, 5, size=2))
    psi = random_bipartite(rng, da, db)
    form = schmidt(psi)
    assert abs(form.coefficients.sum() - 1) <= 1e-9
    rho_a = partial_trace(np.outer(psi.amplitudes, psi.amplitudes.conj()), da, db, "A")
    assert np.allclose(eigenvalues(rho_a)[: form.coefficients.size], form.coefficients, atol=1e-9)
    assert fidelity(form.state(), psi) >= 1 - 1e-9
    assert np.allclose(form.state().amplitudes, psi.amplitudes, atol=1e-9)


@given(seeds)
def test_schmidt_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    da, db = (int(v) for v in rng.integers(1, 5, size=2))
    psi = random_bipartite(rng, da, db)
    moved = BipartitePureState.from_matrix(haar_unitary(rng, da) @ psi.matrix @ haar_unitary(rng, db).T)
    assert np.allclose(schmidt(moved).coefficients, schmidt(psi).coefficients, atol=1e-9)


def test_nielsen_examples(rng):
    for _ in range(5):
        assert nielsen_feasible(BELL, random_bipartite(rng, 2, 2))
    assert not nielsen_feasible(PRODUCT, BELL)
    assert nielsen_feasible(with_schmidt([0.6, 0.4]), with_schmidt([0.7, 0.3]))
    assert not nielsen_feasible(with_schmidt([0.7, 0.3]), with_schmidt([0.6, 0.4]))


@given(seeds)
def test_nielsen_transitivity(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_bipartite(rng, 3, 3) for _ in range(3))
    if nielsen_feasible(a, b) and nielsen_feasible(b, c):
        assert nielsen_feasible(a, c)


def test_ensemble_feasible_examples(rng):
    psi, phi = random_bipartite(rng, 3, 3), random_bipartite(rng, 3, 3)
    assert ensemble_feasible(psi, ([1.0], [phi])) == nielsen_feasible(psi, phi)
    product = BipartitePureState.from_matrix(np.diag([1.0, 0, 0]))
    assert ensemble_feasible(psi, ([0.3, 0.7], [product, product]))
    assert ensemble_feasible(BELL, ([0.5, 0.5], [PRODUCT, BELL]))


@given(seeds)
def test_ensemble_feasible_matches_planted_construction(seed):
    rng = np.random.default_rng(seed)
    da, db = (int(v) for v in rng.integers(2, 5, size=2))
    n = int(rng.integers(1, 4))
    feasible = bool(rng.random() < 0.5)
    psi, p, targets = entanglement_instance(rng, da, db, n, feasible=feasible)
    assert ensemble_feasible(psi, (p, targets)) == feasible


def _check_protocol(psi, p, targets):
    plan = build_protocol(psi, (p, targets))
    assert plan.alice.completeness_residual() <= 1e-9
    dist = outcome_distribution(psi, plan)
    realized = np.zeros(len(p))
    for label, prob in dist.items():
        if label == (0, 0):
            assert prob <= 1e-12
            continue
        assert abs(prob - plan.outcome_probs[label]) <= 1e-9
        realized[label[0] - 1] += prob
        out = apply_outcome(psi, plan, label)
        assert fidelity(out, plan.target_of(label)) >= 1 - 1e-9
        # Alice's side after the measurement already has the target spectrum
        e = plan.alice.matrices[plan.alice.labels.index(label)]
        post = e @ psi.matrix
        reduced = post @ post.conj().T / prob
        lam = schmidt(plan.target_of(label)).coefficients
        assert np.allclose(eigenvalues(reduced)[: lam.size], lam, atol=1e-9)
    assert np.allclose(realized, p, atol=1e-10)
    for i, js in plan.grouping.items():
        assert abs(sum(plan.outcome_probs[(i, j)] for j in js) - p[i - 1]) <= 1e-10
    # closed loop with the feasibility criterion
    assert ensemble_feasible(psi, (realized / realized.sum(), targets))
    return plan


def test_protocol_from_maximally_entangled_state(rng):
    phi = random_bipartite(rng, 2, 2)
    _check_protocol(BELL, np.array([1.0]), [phi])


def test_protocol_for_identical_states(rng):
    psi = random_bipartite(rng, 3, 2)
    plan = _check_protocol(psi, np.array([1.0]), [psi])
    assert plan.outcome_probs == {(1, 1): pytest.approx(1.0)}


def test_protocol_to_product_and_bell_mixture():
    _check_protocol(BELL, np.array([0.5, 0.5]), [PRODUCT, BELL])


@given(seeds)
def test_protocol_on_random_feasible_instances(seed):
    rng = np.random.default_rng(seed)
    da, db = (int(v) for v in rng.integers(1, 5, size=2))
    psi, p, targets = entanglement_instance(rng, da, db, int(rng.integers(1, 4)))
    _check_protocol(psi, p, targets)


def test_protocol_with_singular_reduced_state():
    psi = BipartitePureState.from_matrix(np.diag([np.sqrt(0.7), np.sqrt(0.3), 0.0]))
    target = BipartitePureState.from_matrix(np.diag([np.sqrt(0.8), np.sqrt(0.2), 0.0]))
    plan = _check_protocol(psi, np.array([1.0]), [target])
    assert (0, 0) in plan.alice.labels


def test_infeasible_protocol_rejected():
    with pytest.raises(InfeasibleError):
        build_protocol(PRODUCT, ([1.0], [BELL]))


def test_target_shape_must_match():
    with pytest.raises(DimensionError):
        build_protocol(BELL, ([1.0], [BipartitePureState(1, 1, [1.0])]))


def test_execute_deterministic_plan_returns_target(rng):
    phi = random_bipartite(rng, 2, 2)
    plan = build_protocol(BELL, ([1.0], [phi]))
    for seed in range(5):
        label, out = execute_protocol(BELL, plan, seed)
        assert label[0] == 1
        assert fidelity(out, phi) >= 1 - 1e-9


def test_execute_rejects_mismatched_state():
    plan = build_protocol(BELL, ([1.0], [PRODUCT]))
    with pytest.raises(DimensionError):
        execute_protocol(BipartitePureState(3, 3, np.eye(3).ravel() / np.sqrt(3)), plan, 0)


def test_sampled_groups_within_four_sigma():
    rng = np.random.default_rng(5)
    psi, p, targets = entanglement_instance(rng, 3, 3, 3)
    plan = build_protocol(psi, (p, targets))
    shots = 100_000
    dist = outcome_distribution(psi, plan)
    labels = list(dist)
    w = np.array([dist[k] for k in labels])
    draws = np.random.default_rng(1).choice(len(labels), size=shots, p=w / w.sum())
    counts = Counter(labels[k][0] for k in draws)
    for i, pi in enumerate(p, start=1):
        sigma = np.sqrt(shots * pi * (1 - pi))
        assert abs(counts[i] - shots * pi) <= 4 * sigma + 1
    # the seeded executor follows the same distribution
    runs = Counter(execute_protocol(psi, plan, seed)[0][0] for seed in range(2000))
    for i, pi in enumerate(p, start=1):
        sigma = np.sqrt(2000 * pi * (1 - pi))
        assert abs(runs[i] - 2000 * pi) <= 4 * sigma + 1
