"""Generalized measurements and the eigenvalue constraints they obey.

A measurement is a list of matrices ``E_i`` with ``sum_i E_i^H E_i = I``.
On a prior ``rho`` outcome ``i`` has probability ``tr(E_i rho E_i^H)`` and
posterior ``E_i rho E_i^H / p_i``. Whatever the measurement::

    lambda(rho) ≺ sum_i lambda(E_i rho E_i^H)
    ⊕_i lambda(E_i rho E_i^H) ≺ lambda(rho)

together with the two mixing relations for the unnormalized posteriors.
:func:`converse_measurement` constructs a measurement reaching prescribed
posteriors whenever the first relation allows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.optimize import least_squares

from ._rng import make_rng
from .config import DEFAULT, Tolerances
from .errors import CompletenessError, DimensionError, InfeasibleError, QmajError
from .linalg import as_matrix, density_matrix, eigenvalues, hermitian_eigensystem
from .majorization import majorization_check, pad_to, permutation_mixture, spectrum, weighted_spectrum_sum
from .mixing import _direction, _distribution, bloch_grid
from .reports import CertifiedFixture, ConstraintReport

__all__ = [
    "GeneralizedMeasurement",
    "MeasurementOutcome",
    "Dilation",
    "apply",
    "verify_dynamic_constraints",
    "pinch",
    "dilate",
    "converse_measurement",
    "two_outcome_search",
    "kempe_measurement_infeasibility",
    "sample_outcome",
    "sample_outcomes",
]


@dataclass(frozen=True)
class GeneralizedMeasurement:
    """Measurement matrices with outcome labels.

    Matrices may be rectangular (output dimension differing from input) but
    must share the input dimension. ``check=False`` skips the completeness
    test, for callers that verify it themselves.
    """

    matrices: tuple[np.ndarray, ...]
    labels: tuple[Hashable, ...]

    def __init__(self, matrices: Sequence, labels: Sequence | None = None, check: bool = True,
                 tol: Tolerances = DEFAULT):
        mats = []
        for m in matrices:
            a = as_matrix(m)
            a.setflags(write=False)
            mats.append(a)
        if not mats:
            raise QmajError("a measurement needs at least one matrix")
        if len({m.shape[1] for m in mats}) > 1:
            raise DimensionError("measurement matrices have different input dimensions")
        labels = tuple(range(1, len(mats) + 1)) if labels is None else tuple(labels)
        if len(labels) != len(mats):
            raise QmajError(f"{len(labels)} labels for {len(mats)} matrices")
        if len(set(labels)) != len(labels):
            raise QmajError("measurement labels must be distinct")
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "labels", labels)
        if check:
            r = self.completeness_residual()
            if r > tol.completeness:
                raise CompletenessError(f"||sum E^H E - I||_max = {r:.3e} exceeds {tol.completeness:.1e}")

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[1]

    def __len__(self) -> int:
        return len(self.matrices)

    def completeness_residual(self) -> float:
        total = sum(m.conj().T @ m for m in self.matrices)
        return float(np.max(np.abs(total - np.eye(self.dim))))


@dataclass(frozen=True)
class MeasurementOutcome:
    """One outcome: probability and posterior (``None`` for a null outcome)."""

    label: Hashable
    probability: float
    posterior: np.ndarray | None

    @property
    def is_null(self) -> bool:
        return self.posterior is None


def _check_dims(m: GeneralizedMeasurement, rho: np.ndarray) -> None:
    if rho.shape[0] != m.dim:
        raise DimensionError(f"state dimension {rho.shape[0]} does not match measurement input {m.dim}")


def _unnormalized(m: GeneralizedMeasurement, rho: np.ndarray) -> list[np.ndarray]:
    return [e @ rho @ e.conj().T for e in m.matrices]


def apply(m: GeneralizedMeasurement, rho, tol: Tolerances = DEFAULT) -> list[MeasurementOutcome]:
    """Outcome probabilities and posteriors of ``m`` on ``rho``."""
    rho = np.asarray(density_matrix(rho, tol=tol))
    _check_dims(m, rho)
    out = []
    for label, block in zip(m.labels, _unnormalized(m, rho)):
        p = float(np.trace(block).real)
        if p < 0:
            p = 0.0
        posterior = None
        if p > tol.null_outcome:
            posterior = (block + block.conj().T) / (2 * p)
        out.append(MeasurementOutcome(label, min(p, 1.0), posterior))
    return out


def _sum_padded(vectors, weights=None) -> np.ndarray:
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    d = max((v.size for v in vectors), default=0)
    weights = np.ones(len(vectors)) if weights is None else weights
    return sum((w * pad_to(v, d) for w, v in zip(weights, vectors)), np.zeros(d))


def _concat(vectors, weights=None) -> np.ndarray:
    weights = np.ones(len(vectors)) if weights is None else weights
    parts = [w * np.asarray(v, dtype=float) for w, v in zip(weights, vectors)]
    return np.concatenate(parts) if parts else np.zeros(0)


def verify_dynamic_constraints(m: GeneralizedMeasurement, rho, eps: float | None = None,
                               tol: Tolerances = DEFAULT) -> ConstraintReport:
    """Evaluate the four measurement relations and their probability-weighted forms.

    Relation names, with ``B_i = E_i rho E_i^H``:

    ``post_mixed_vs_sum``
        ``lambda(sum B_i) ≺ sum lambda(B_i)``
    ``direct_sum_vs_post_mixed``
        ``⊕ lambda(B_i) ≺ lambda(sum B_i)``
    ``prior_vs_sum``
        ``lambda(rho) ≺ sum lambda(B_i)``
    ``direct_sum_vs_prior``
        ``⊕ lambda(B_i) ≺ lambda(rho)``

    The same four names with a ``_weighted`` suffix restate them through
    ``p_i`` and the normalized posteriors, dropping null outcomes.
    """
    rho = np.asarray(density_matrix(rho, tol=tol))
    _check_dims(m, rho)
    blocks = _unnormalized(m, rho)
    lam_rho = eigenvalues(rho, tol)
    lam_blocks = [spectrum(eigenvalues(b, tol), tol) for b in blocks]
    lam_post_mixed = spectrum(eigenvalues(sum(blocks), tol), tol)
    summed = _sum_padded(lam_blocks)
    dsum = spectrum(_concat(lam_blocks), tol)

    outcomes = apply(m, rho, tol)
    live = [o for o in outcomes if not o.is_null]
    p = np.array([o.probability for o in live])
    lam_post = [spectrum(eigenvalues(o.posterior, tol), tol) for o in live]
    w_mixed = spectrum(eigenvalues(sum(pi * o.posterior for pi, o in zip(p, live)), tol), tol)
    w_sum = _sum_padded(lam_post, p)
    w_dsum = spectrum(_concat(lam_post, p), tol)

    def chk(x, y):
        return majorization_check(x, y, eps, tol)

    return ConstraintReport(
        vectors={
            "prior": lam_rho,
            "post_mixed": lam_post_mixed,
            "sum_of_spectra": summed,
            "direct_sum": dsum,
            "probabilities": p,
        },
        relations={
            "post_mixed_vs_sum": chk(lam_post_mixed, summed),
            "direct_sum_vs_post_mixed": chk(dsum, lam_post_mixed),
            "prior_vs_sum": chk(lam_rho, summed),
            "direct_sum_vs_prior": chk(dsum, lam_rho),
            "post_mixed_vs_sum_weighted": chk(w_mixed, w_sum),
            "direct_sum_vs_post_mixed_weighted": chk(w_dsum, w_mixed),
            "prior_vs_sum_weighted": chk(lam_rho, w_sum),
            "direct_sum_vs_prior_weighted": chk(w_dsum, lam_rho),
        },
    )


def pinch(rho, projectors: Sequence, tol: Tolerances = DEFAULT) -> np.ndarray:
    """``sum_i P_i rho P_i`` for an orthogonal resolution of the identity."""
    rho = np.asarray(density_matrix(rho, tol=tol))
    ps = [as_matrix(p) for p in projectors]
    d = rho.shape[0]
    if any(p.shape != (d, d) for p in ps):
        raise DimensionError("projector dimensions do not match the state")
    err = float(np.max(np.abs(sum(ps) - np.eye(d))))
    for a, p in enumerate(ps):
        err = max(err, float(np.max(np.abs(p @ p - p))), float(np.max(np.abs(p - p.conj().T))))
        for q in ps[a + 1:]:
            err = max(err, float(np.max(np.abs(p @ q))))
    if err > tol.completeness:
        raise QmajError(f"projectors are not an orthogonal resolution of identity (error {err:.3e})")
    return density_matrix(sum(p @ rho @ p for p in ps), tol=tol)


@dataclass(frozen=True)
class Dilation:
    """Unitary on system ⊗ ancilla implementing a measurement.

    Basis ordering is system-major: ``|s>|a>`` has index ``s * ancilla_dim + a``.
    ``U |psi>|standard_state_index> = sum_i E_i |psi> |i>``.
    """

    unitary: np.ndarray
    system_dim: int
    ancilla_dim: int
    standard_state_index: int = 0

    def isometry(self) -> np.ndarray:
        cols = np.arange(self.system_dim) * self.ancilla_dim + self.standard_state_index
        return self.unitary[:, cols]

    def measure(self, rho) -> list[tuple[float, np.ndarray | None]]:
        """Apply the unitary to ``rho ⊗ |0><0|`` and project the ancilla."""
        rho = np.asarray(rho)
        v = self.isometry()
        big = v @ rho @ v.conj().T
        d, n = self.system_dim, self.ancilla_dim
        t = big.reshape(d, n, d, n)
        out = []
        for i in range(n):
            block = t[:, i, :, i]
            p = float(np.trace(block).real)
            out.append((p, block / p if p > 1e-12 else None))
        return out

    def residual(self, m: GeneralizedMeasurement) -> float:
        """Worst deviation of ``U|e_t>|0>`` from ``sum_i E_i |e_t>|i>`` over basis inputs."""
        d, n = self.system_dim, self.ancilla_dim
        expect = np.zeros((d * n, d), dtype=complex)
        for i, e in enumerate(m.matrices):
            expect[i::n, :] = e
        return float(np.max(np.abs(self.isometry() - expect)))


def dilate(m: GeneralizedMeasurement, tol: Tolerances = DEFAULT) -> Dilation:
    """Complete the isometry ``|psi>|0> -> sum_i E_i|psi>|i>`` to a unitary.

    The missing columns come from Gram-Schmidt over the standard basis in
    index order (two orthogonalization passes per candidate, candidates
    with residual norm below 1e-8 skipped), so the result is deterministic.
    """
    d, n = m.dim, len(m)
    if any(e.shape != (d, d) for e in m.matrices):
        raise DimensionError("dilation needs square measurement matrices")
    v = np.zeros((d * n, d), dtype=complex)
    for i, e in enumerate(m.matrices):
        v[i::n, :] = e
    err = float(np.max(np.abs(v.conj().T @ v - np.eye(d))))
    if err > tol.completeness:
        raise CompletenessError(f"measurement is not complete (error {err:.3e})")

    basis = [v[:, t] for t in range(d)]
    extra = []
    for k in range(d * n):
        if len(basis) == d * n:
            break
        q = np.array(basis).T
        cand = np.zeros(d * n, dtype=complex)
        cand[k] = 1.0
        for _ in range(2):
            cand = cand - q @ (q.conj().T @ cand)
        norm = np.linalg.norm(cand)
        if norm < 1e-8:
            continue
        cand = cand / norm
        basis.append(cand)
        extra.append(cand)

    u = np.zeros((d * n, d * n), dtype=complex)
    std_cols = [t * n for t in range(d)]
    other_cols = [c for c in range(d * n) if c not in set(std_cols)]
    u[:, std_cols] = v
    u[:, other_cols] = np.array(extra).T if extra else np.zeros((d * n, 0))
    return Dilation(u, d, n, 0)


def converse_measurement(rho, probabilities, states: Sequence, eps: float | None = None,
                         tol: Tolerances = DEFAULT) -> tuple[GeneralizedMeasurement, dict]:
    """Measurement with outcomes ``(i, j)`` whose posteriors are the ``states[i]``.

    Needs ``lambda(rho) ≺ sum_i p_i lambda(sigma_i)``. With the permutation
    mixture ``lambda(rho) = sum_ij p_i q_j P_j lambda_i`` and everything
    diagonalized (eigenvalues non-increasing), the matrices are::

        E_ij = W_i sqrt(p_i q_j) sqrt(Lambda_i) P_j^T Lambda_rho^{-1/2} W_rho^H

    with the inverse square root taken on the support of ``rho``. The
    complement projector is appended as outcome ``(0, 0)`` when ``rho`` is
    singular. Labels are 1-based.

    Returns
    -------
    measurement : GeneralizedMeasurement
    table : dict
        ``{(i, j): p_i q_j}`` for every non-complement outcome.
    """
    rho = density_matrix(rho, tol=tol)
    p = _distribution(probabilities, tol)
    if len(states) != p.size:
        raise DimensionError(f"{p.size} probabilities for {len(states)} target states")
    lam, w_rho = hermitian_eigensystem(rho, tol)
    d = lam.size
    eig_targets = []
    for s in states:
        s = density_matrix(s, tol=tol)
        if s.shape[0] != d:
            raise DimensionError(f"target state dimension {s.shape[0]} differs from prior dimension {d}")
        lam_i, w_i = hermitian_eigensystem(s, tol)
        eig_targets.append((np.clip(lam_i, 0.0, None), w_i))

    avg = weighted_spectrum_sum(p, [lt for lt, _ in eig_targets], tol)
    check = majorization_check(lam, avg, eps, tol)
    if not check.holds:
        k = check.violated_index
        raise InfeasibleError(
            f"lambda(rho) is not majorized by sum_i p_i lambda(sigma_i) (k={k})",
            k,
            None if k is None else float(check.slacks[k - 1]),
        )
    mixture = permutation_mixture(lam, avg, eps, tol)

    # realized diagonal; using it in place of lambda keeps completeness exact
    realized = np.zeros(d)
    for pi, (lam_i, _) in zip(p, eig_targets):
        for qj, perm in zip(mixture.weights, mixture.permutations):
            realized += pi * qj * lam_i[list(perm)]
    support = lam > tol.support
    inv_sqrt = np.zeros(d)
    inv_sqrt[support] = 1.0 / np.sqrt(realized[support])

    mats, labels, table = [], [], {}
    for i, (pi, (lam_i, w_i)) in enumerate(zip(p, eig_targets), start=1):
        if pi <= 0:
            continue
        root = np.sqrt(lam_i)
        for j, (qj, perm) in enumerate(zip(mixture.weights, mixture.permutations), start=1):
            pt = np.zeros((d, d))
            pt[list(perm), np.arange(d)] = 1.0  # P_j^T
            core = np.sqrt(pi * qj) * (root[:, None] * pt) * inv_sqrt[None, :]
            mats.append(w_i @ core @ w_rho.conj().T)
            labels.append((i, j))
            table[(i, j)] = float(pi * qj)
    if not np.all(support):
        mats.append((w_rho * (~support)) @ w_rho.conj().T)
        labels.append((0, 0))
    return GeneralizedMeasurement(mats, labels, tol=tol), table


def _herm2_eigs(x: np.ndarray) -> np.ndarray:
    """Eigenvalues (descending) of a stack of 2x2 Hermitian matrices."""
    a, dd = x[..., 0, 0].real, x[..., 1, 1].real
    b = x[..., 0, 1]
    mean = (a + dd) / 2
    rad = np.sqrt(((a - dd) / 2) ** 2 + np.abs(b) ** 2)
    return np.stack([mean + rad, mean - rad], axis=-1)


def _projectors(dirs: np.ndarray) -> np.ndarray:
    """|n><n| for Bloch directions n."""
    out = np.empty((len(dirs), 2, 2), dtype=complex)
    out[:, 0, 0] = (1 + dirs[:, 2]) / 2
    out[:, 1, 1] = (1 - dirs[:, 2]) / 2
    out[:, 0, 1] = (dirs[:, 0] - 1j * dirs[:, 1]) / 2
    out[:, 1, 0] = (dirs[:, 0] + 1j * dirs[:, 1]) / 2
    return out


def _ket(n: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def two_outcome_search(rho, probabilities, posteriors: Sequence, n_alpha: int = 64,
                       sphere: tuple[int, int] = (16, 9), accept: float = 1e-6,
                       full_output: bool = False, tol: Tolerances = DEFAULT):
    """Search for a two-matrix qubit measurement with a pure first posterior.

    A pure first posterior forces ``E_1 = alpha |a><b|``; the polar
    decomposition then fixes ``E_2 = U sqrt(I - alpha^2 |b><b|)`` up to a
    free unitary ``U``, so the second outcome is achievable iff
    ``sqrt(M) rho sqrt(M)`` has the spectrum of ``p_2 rho_2'``. The residual
    minimized is the larger of the first-outcome matrix error and that
    spectral gap. Grid over ``alpha``, ``|a>`` and ``|b>`` followed by
    least-squares refinement.

    Returns the witness measurement (or ``None``); with ``full_output=True``
    returns ``(witness, best_residual)``.
    """
    rho = np.asarray(density_matrix(rho, tol=tol))
    if rho.shape != (2, 2) or len(posteriors) != 2:
        raise DimensionError("two-outcome search is defined for qubits with two outcomes")
    p = _distribution(probabilities, tol)
    post = [np.asarray(density_matrix(s, tol=tol)) for s in posteriors]
    if eigenvalues(post[0], tol)[1] > tol.psd:
        raise QmajError("first posterior must be pure")
    target1 = p[0] * post[0]
    target2 = np.sort(p[1] * eigenvalues(post[1], tol))[::-1]

    alphas = np.linspace(0.0, 1.0, n_alpha + 2)[1:-1]
    dirs = bloch_grid(*sphere)
    proj = _projectors(dirs)
    bb = np.einsum("nij,ji->n", proj, rho).real  # <b|rho|b>
    # sqrt(I - alpha^2 |b><b|) = I - (1 - sqrt(1 - alpha^2)) |b><b|
    shrink = 1.0 - np.sqrt(1.0 - alphas**2)
    m_half = np.eye(2)[None, None] - shrink[:, None, None, None] * proj[None]
    x = m_half @ rho @ m_half
    term2 = np.max(np.abs(_herm2_eigs(x) - target2), axis=-1)  # (alpha, b)
    scale = (alphas[:, None] ** 2) * bb[None, :]  # (alpha, b)
    diff = scale[:, :, None, None, None] * proj[None, None] - target1
    term1 = np.abs(diff).reshape(*diff.shape[:3], -1).max(axis=-1)  # (alpha, b, a)
    total = np.maximum(term1, term2[:, :, None])
    flat = np.argsort(total, axis=None)[:12]
    best_res = float(total.reshape(-1)[flat[0]])

    def unpack(params):
        alpha = 0.5 * (1 + np.tanh(params[0]))
        return alpha, _direction(params[1], params[2]), _direction(params[3], params[4])

    def matrices(params):
        alpha, nb, na = unpack(params)
        a, b = _ket(na), _ket(nb)
        e1 = alpha * np.outer(a, b.conj())
        pb = np.outer(b, b.conj())
        m2 = np.eye(2) - (1.0 - np.sqrt(1.0 - alpha**2)) * pb
        return e1, m2

    def residual_vec(params):
        e1, m2 = matrices(params)
        d1 = e1 @ rho @ e1.conj().T - target1
        lam2 = _herm2_eigs(m2 @ rho @ m2)
        return np.concatenate([d1.real.ravel(), d1.imag.ravel(), lam2 - target2])

    def params_of(flat_index):
        ia, ib, ina = np.unravel_index(flat_index, total.shape)
        alpha = np.clip(alphas[ia], 1e-9, 1 - 1e-9)
        nb, na = dirs[ib], dirs[ina]
        ang = lambda n: [np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])]
        return [np.arctanh(2 * alpha - 1), *ang(nb), *ang(na)]

    best_params = params_of(flat[0])
    for fi in flat:
        sol = least_squares(residual_vec, params_of(fi), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=3000)
        r = float(np.max(np.abs(residual_vec(sol.x))))
        if r < best_res:
            best_res, best_params = r, list(sol.x)

    witness = None
    if best_res <= accept:
        e1, m2 = matrices(best_params)
        x2 = m2 @ rho @ m2
        _, wx = hermitian_eigensystem((x2 + x2.conj().T) / 2, tol)
        _, wt = hermitian_eigensystem(post[1], tol)
        e2 = wt @ wx.conj().T @ m2
        witness = GeneralizedMeasurement([e1, e2], [1, 2], check=False)
    return (witness, best_res) if full_output else witness


def kempe_measurement_infeasibility(n_alpha: int = 64, sphere: tuple[int, int] = (16, 9),
                                    tol: Tolerances = DEFAULT) -> CertifiedFixture:
    """Prior ``diag(5/12, 7/12)`` with posteriors ``diag(1, 0)`` and ``I/2`` at 1/2 each.

    Both measurement relations between prior and posteriors hold, yet no
    two-matrix measurement produces them; the fixture bundles the two checks
    and the refuting search.
    """
    rho = np.diag([5 / 12, 7 / 12]).astype(complex)
    p = np.array([0.5, 0.5])
    posts = (np.diag([1.0, 0.0]).astype(complex), np.eye(2, dtype=complex) / 2)
    lam = eigenvalues(rho, tol)
    spectra = [eigenvalues(s, tol) for s in posts]
    checks = {
        "prior_vs_sum_weighted": majorization_check(lam, weighted_spectrum_sum(p, spectra, tol), tol=tol),
        "direct_sum_vs_prior_weighted": majorization_check(_concat(spectra, p), lam, tol=tol),
    }
    witness, residual = two_outcome_search(rho, p, posts, n_alpha, sphere, full_output=True, tol=tol)
    return CertifiedFixture(
        name="kempe-measurement",
        rho=rho,
        probabilities=p,
        targets=posts,
        checks=checks,
        witness=witness,
        min_residual=residual,
        tolerance=1e-6,
    )


def sample_outcome(m: GeneralizedMeasurement, rho, seed: int, tol: Tolerances = DEFAULT) -> MeasurementOutcome:
    """Draw one outcome with a generator seeded by ``seed``."""
    outcomes = apply(m, rho, tol)
    probs = np.array([o.probability for o in outcomes])
    k = int(make_rng(seed).choice(len(outcomes), p=probs / probs.sum()))
    return outcomes[k]


def sample_outcomes(m: GeneralizedMeasurement, rho, seed: int, shots: int,
                    tol: Tolerances = DEFAULT) -> dict:
    """Outcome counts over ``shots`` independent draws from one seeded stream."""
    outcomes = apply(m, rho, tol)
    probs = np.array([o.probability for o in outcomes])
    draws = make_rng(seed).choice(len(outcomes), size=shots, p=probs / probs.sum())
    counts = np.bincount(draws, minlength=len(outcomes))
    return {o.label: int(c) for o, c in zip(outcomes, counts)}
