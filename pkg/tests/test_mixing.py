import numpy as np
import pytest
from hypothesis import given, settings

from conftest import seeds
from qmaj.errors import DimensionError, DistributionError, InfeasibleError, QmajError
from qmaj.generators import feasible_spectral_instance, haar_unitary, random_density, random_ensemble
from qmaj.linalg import eigenvalues
from qmaj.mixing import (
    Ensemble,
    SpectralTargetEnsemble,
    converse_mixture,
    exact_converse_search,
    kempe_mixing_counterexample,
    mix,
    verify_static_constraints,
)

WORKED = Ensemble([1 / 3, 2 / 3], [np.diag([0.75, 0.25]), np.diag([0.2, 0.8])])


def test_worked_example_mixture():
    assert np.allclose(mix(WORKED), np.diag([23 / 60, 37 / 60]), atol=1e-15)


def test_trivial_mixtures(rng):
    rho = random_density(rng, 3)
    assert np.allclose(mix(Ensemble([1.0], [rho])), rho)
    assert np.allclose(mix(Ensemble([0.5, 0.5], [rho, rho])), rho)


def test_ensemble_validation():
    with pytest.raises(DistributionError):
        Ensemble([0.5, 0.6], [np.eye(2) / 2, np.eye(2) / 2])
    with pytest.raises(DimensionError):
        Ensemble([0.5, 0.5], [np.eye(2) / 2, np.eye(3) / 3])
    with pytest.raises(QmajError):
        Ensemble([1.0], [np.eye(2) / 2, np.eye(2) / 2])


def test_worked_example_constraints():
    report = verify_static_constraints(WORKED)
    assert report.all_hold
    assert np.allclose(report.vectors["spectrum"], [37 / 60, 23 / 60], atol=1e-12)
    assert np.allclose(report.vectors["direct_sum"], np.array([32, 15, 8, 5]) / 60, atol=1e-12)
    assert np.all(report.relations["direct_sum_vs_mixed"].slacks >= 0)


def test_pure_state_ensemble_reduces_to_weights(rng):
    u = haar_unitary(rng, 3)
    p = np.array([0.5, 0.3, 0.2])
    states = [np.outer(u[:, k], u[:, k].conj()) for k in range(3)]
    report = verify_static_constraints(Ensemble(p, states))
    assert report.all_hold
    assert np.allclose(report.vectors["direct_sum"][:3], p)


@given(seeds)
def test_static_relations_hold(seed):
    rng = np.random.default_rng(seed)
    e = random_ensemble(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)))
    report = verify_static_constraints(e)
    assert report.all_hold
    assert report.worst_slack >= -1e-9


def test_converse_maximally_mixed_qubit():
    real = converse_mixture(np.eye(2) / 2, SpectralTargetEnsemble([1.0], [[1.0, 0.0]]))
    assert np.allclose(real.weights, [0.5, 0.5])
    assert sorted(np.round(np.diag(s).real, 12).tolist() for s in real.states) == [[0, 1], [1, 0]]
    for s in real.states:
        assert np.allclose(eigenvalues(s), [1, 0])


def test_converse_with_matching_spectra(rng):
    rho = random_density(rng, 3, rank=3)
    lam = eigenvalues(rho)
    real = converse_mixture(rho, SpectralTargetEnsemble([0.4, 0.6], [lam, lam]))
    assert real.labels == ((1, 1), (2, 1))
    for s in real.states:
        assert np.allclose(s, rho, atol=1e-12)


def test_converse_rejects_infeasible_targets():
    with pytest.raises(InfeasibleError) as info:
        converse_mixture(np.diag([0.9, 0.1]), SpectralTargetEnsemble([1.0], [[0.5, 0.5]]))
    assert info.value.index == 1
    assert info.value.slack < 0


def test_converse_rejects_overflowing_targets():
    with pytest.raises(InfeasibleError):
        converse_mixture(np.diag([1.0, 0.0]), SpectralTargetEnsemble([1.0], [[0.5, 0.3, 0.2]]))


@given(seeds)
def test_converse_round_trip(seed):
    rng = np.random.default_rng(seed)
    d, n = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    rho, p, spectra = feasible_spectral_instance(rng, d, n, singular=bool(rng.random() < 0.3))
    real = converse_mixture(rho, SpectralTargetEnsemble(p, spectra))
    assert np.max(np.abs(mix(real.as_ensemble()) - rho)) <= 1e-9
    groups = real.group_weights()
    for i, pi in enumerate(p, start=1):
        assert abs(groups[i] - pi) <= 1e-10
    for (i, _), s in zip(real.labels, real.states):
        assert np.max(np.abs(eigenvalues(s) - spectra[i - 1])) <= 1e-9
    assert verify_static_constraints(real.as_ensemble()).all_hold


def test_kempe_mixing_fixture():
    fixture = kempe_mixing_counterexample()
    assert all(c.holds for c in fixture.checks.values())
    assert fixture.witness is None
    assert fixture.certified
    assert fixture.min_residual > 1e-6
    assert np.allclose(fixture.notes["forced_spectrum"], [0.75, 0.25])


def test_forced_spectrum_is_analytic():
    # (|v><v| + I/2)/2 has eigenvalues 3/4, 1/4 whatever the pure state v
    rng = np.random.default_rng(8)
    for _ in range(50):
        u = haar_unitary(rng, 2)
        rho1 = np.outer(u[:, 0], u[:, 0].conj())
        assert np.allclose(eigenvalues(0.5 * rho1 + 0.25 * np.eye(2)), [0.75, 0.25], atol=1e-12)


def test_exact_search_finds_feasible_variant():
    targets = SpectralTargetEnsemble([0.5, 0.5], [[1.0, 0.0], [0.5, 0.5]])
    witness = exact_converse_search(np.diag([0.75, 0.25]), targets)
    assert witness is not None
    assert np.max(np.abs(mix(witness) - np.diag([0.75, 0.25]))) <= 1e-6


@settings(max_examples=8)
@given(seeds)
def test_exact_search_recovers_planted_witness(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet([2.0, 2.0])
    spectra = [np.sort(rng.dirichlet([1.0, 1.0]))[::-1] for _ in range(2)]
    states = []
    for s in spectra:
        u = haar_unitary(rng, 2)
        states.append(u @ np.diag(s) @ u.conj().T)
    rho = p[0] * states[0] + p[1] * states[1]
    witness, best = exact_converse_search(rho, SpectralTargetEnsemble(p, spectra), full_output=True)
    assert witness is not None and best <= 1e-6


def test_exact_search_is_qubit_only():
    with pytest.raises(QmajError):
        exact_converse_search(np.eye(3) / 3, SpectralTargetEnsemble([1.0], [[1 / 3] * 3]))
