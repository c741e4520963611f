import numpy as np
import pytest
from hypothesis import given

from conftest import random_hermitian, seeds
from qmaj.config import DEFAULT
from qmaj.errors import (
    ConvergenceError,
    DimensionError,
    NotHermitianError,
    NotPSDError,
    NotUnitaryError,
    QmajError,
    TraceError,
)
from qmaj.generators import haar_unitary, random_bipartite, random_density
from qmaj.linalg import (
    density_matrix,
    eigenvalues,
    hermitian,
    hermitian_eigensystem,
    partial_trace,
    sqrt_psd,
    support_inverse_sqrt,
    tensor_product,
    unitary,
)


def test_hermitian_is_symmetrized_and_read_only():
    m = np.array([[1.0, 2 + 1e-12j], [2, 3]])
    h = hermitian(m)
    assert np.array_equal(h, h.conj().T)
    with pytest.raises(ValueError):
        h[0, 0] = 5


def test_validators_reject_bad_input():
    with pytest.raises(NotHermitianError):
        hermitian([[0, 1], [0, 0]])
    with pytest.raises(DimensionError):
        hermitian(np.ones((2, 3)))
    with pytest.raises(QmajError):
        hermitian([[np.nan, 0], [0, 1]])
    with pytest.raises(NotPSDError):
        density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(TraceError):
        density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(NotUnitaryError):
        unitary(np.diag([1.0, 0.5]))


def test_relaxed_trace_admits_unnormalized_psd():
    assert np.allclose(density_matrix(np.diag([2.0, 3.0]), relaxed_trace=True), np.diag([2, 3]))


def test_psd_boundary_is_inclusive_of_tolerance():
    density_matrix(np.diag([1 + 5e-11, -5e-11]))
    with pytest.raises(NotPSDError):
        density_matrix(np.diag([1 + 1e-8, -1e-8]))


def test_eigensystem_diagonal_input():
    lam, w = hermitian_eigensystem(np.diag([0.25, 0.75]))
    assert np.allclose(lam, [0.75, 0.25], atol=1e-15)
    assert np.allclose(w, [[0, 1], [1, 0]], atol=1e-15)


def test_eigensystem_rank_one_projector():
    lam, w = hermitian_eigensystem([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(lam, [1, 0], atol=1e-14)
    assert np.allclose(np.abs(w[:, 0]), [2**-0.5, 2**-0.5])


@given(seeds)
def test_half_projector_plus_quarter_identity(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v /= np.linalg.norm(v)
    m = 0.5 * np.outer(v, v.conj()) + 0.25 * np.eye(2)
    assert np.allclose(eigenvalues(m), [0.75, 0.25], atol=1e-12)


def test_eigensystem_against_lapack_oracle():
    rng = np.random.default_rng(11)
    worst_lam, worst_recon, worst_trace = 0.0, 0.0, 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        h = random_hermitian(rng, d)
        lam, w = hermitian_eigensystem(h)
        ref = np.linalg.eigvalsh(h)[::-1]
        worst_lam = max(worst_lam, np.max(np.abs(lam - ref)))
        worst_recon = max(worst_recon, np.max(np.abs(w @ np.diag(lam) @ w.conj().T - h)))
        worst_trace = max(worst_trace, abs(lam.sum() - np.trace(h).real))
        assert np.allclose(w.conj().T @ w, np.eye(d), atol=1e-10)
    assert worst_lam < 1e-10
    assert worst_recon <= 1e-9
    assert worst_trace <= 1e-9


def test_eigensystem_output_is_deterministic_on_degenerate_input():
    rng = np.random.default_rng(3)
    u = haar_unitary(rng, 4)
    h = u @ np.diag([1.0, 1.0, 1.0, 0.0]) @ u.conj().T
    lam1, w1 = hermitian_eigensystem(h)
    lam2, w2 = hermitian_eigensystem(h.copy())
    assert np.array_equal(lam1, lam2) and np.array_equal(w1, w2)
    assert np.allclose(w1 @ np.diag(lam1) @ w1.conj().T, h, atol=1e-12)


def test_eigensystem_phase_normalized_columns():
    rng = np.random.default_rng(4)
    _, w = hermitian_eigensystem(random_hermitian(rng, 5))
    for col in w.T:
        lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert abs(lead.imag) < 1e-14 and lead.real > 0


def test_convergence_error_when_sweeps_capped():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 6)
    with pytest.raises(ConvergenceError) as info:
        hermitian_eigensystem(h, DEFAULT.with_overrides(jacobi_max_sweeps=1))
    assert info.value.residual > 0


def test_sqrt_psd_examples():
    assert np.allclose(sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2, 3]))
    with pytest.raises(NotPSDError):
        sqrt_psd(np.diag([1.0, -1e-6]))


@given(seeds)
def test_sqrt_psd_squares_back(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 7))
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    a = g @ g.conj().T
    s = np.asarray(sqrt_psd(a))
    assert np.max(np.abs(s @ s - a)) <= 1e-8 * max(1.0, np.max(np.abs(a)))
    assert np.allclose(eigenvalues(s), np.sqrt(np.clip(eigenvalues(a), 0, None)), atol=1e-9)


def test_support_inverse_sqrt_examples():
    inv, p, q = support_inverse_sqrt(np.eye(2) / 2)
    assert np.allclose(inv, np.sqrt(2) * np.eye(2)) and np.allclose(p, np.eye(2)) and np.allclose(q, 0)
    inv, p, q = support_inverse_sqrt(np.diag([1.0, 0.0]))
    assert np.allclose(inv, np.diag([1, 0])) and np.allclose(p, np.diag([1, 0])) and np.allclose(q, np.diag([0, 1]))
    inv, _, q = support_inverse_sqrt(np.diag([5 / 12, 7 / 12]))
    assert np.allclose(inv, np.diag([np.sqrt(12 / 5), np.sqrt(12 / 7)]), atol=1e-12)
    assert np.allclose(q, 0)
    with pytest.raises(QmajError):
        support_inverse_sqrt(np.eye(2) / 2, tau=0.0)


@given(seeds)
def test_support_inverse_sqrt_recovers_support_projector(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, int(rng.integers(1, 6)))
    inv, p, q = support_inverse_sqrt(rho)
    root = np.asarray(sqrt_psd(rho))
    assert np.allclose(inv @ root @ inv @ root, p, atol=1e-8)
    assert np.allclose(p + q, np.eye(rho.shape[0]))


def test_tensor_product_examples(rng):
    assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(tensor_product(np.diag([1, 0]), np.diag([0.3, 0.7])), np.diag([0.3, 0.7, 0, 0]))
    a, b, c, d = (random_hermitian(rng, 2) for _ in range(4))
    assert np.allclose(tensor_product(a, b) @ tensor_product(c, d), tensor_product(a @ c, b @ d))


def test_partial_trace_examples(rng):
    rho, sigma = random_density(rng, 3), random_density(rng, 2)
    assert np.allclose(partial_trace(np.kron(rho, sigma), 3, 2, "A"), rho)
    assert np.allclose(partial_trace(np.kron(rho, sigma), 3, 2, "B"), sigma)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(phi, phi), 2, 2), np.eye(2) / 2)
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4) / 4, 3, 2)
    with pytest.raises(QmajError):
        partial_trace(np.eye(4) / 4, 2, 2, keep="C")


@given(seeds)
def test_partial_trace_spectrum_matches_svd_oracle(seed):
    rng = np.random.default_rng(seed)
    da, db = (int(v) for v in rng.integers(1, 5, size=2))
    psi = random_bipartite(rng, da, db)
    v = psi.amplitudes
    rho_ab = np.outer(v, v.conj())
    ra = partial_trace(rho_ab, da, db, "A")
    rb = partial_trace(rho_ab, da, db, "B")
    s = np.linalg.svd(psi.matrix, compute_uv=False) ** 2
    assert np.allclose(eigenvalues(ra)[: s.size], s, atol=1e-9)
    assert abs(np.trace(ra) - np.trace(rb)) <= 1e-12
