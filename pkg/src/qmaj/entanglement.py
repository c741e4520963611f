"""Bipartite pure states: Schmidt forms, conversion criteria and LOCC protocols.

A state ``|psi> = sum_ab M[a, b] |a>|b>`` is stored through its amplitude
matrix ``M`` (shape ``dim_a x dim_b``). Alice's operator ``E`` acts as
``M -> E @ M`` and Bob's unitary ``V`` as ``M -> M @ V.T``.

The protocol builder reduces ensemble conversion to a measurement on Alice's
reduced state: a measurement whose posteriors have the target Schmidt
spectra leaves a joint pure state that differs from the target only by
local unitaries, which are then read off from two singular value
decompositions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import make_rng
from .config import DEFAULT, Tolerances
from .errors import DimensionError, InfeasibleError, QmajError
from .linalg import hermitian_eigensystem
from .majorization import is_majorized_by, majorization_check, pad_to, weighted_spectrum_sum
from .measurement import GeneralizedMeasurement, converse_measurement
from .mixing import _distribution

__all__ = [
    "BipartitePureState",
    "SchmidtForm",
    "LOCCProtocol",
    "schmidt",
    "nielsen_feasible",
    "ensemble_feasible",
    "build_protocol",
    "outcome_distribution",
    "apply_outcome",
    "execute_protocol",
    "fidelity",
]


@dataclass(frozen=True)
class BipartitePureState:
    """Unit vector in ``C^dim_a (x) C^dim_b`` (system-A-major ordering)."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __init__(self, dim_a: int, dim_b: int, amplitudes, tol: Tolerances = DEFAULT):
        if dim_a < 1 or dim_b < 1:
            raise DimensionError(f"dimensions must be positive, got {dim_a} x {dim_b}")
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        if v.size != dim_a * dim_b:
            raise DimensionError(f"{v.size} amplitudes for a {dim_a} x {dim_b} system")
        if not np.all(np.isfinite(v)):
            raise QmajError("amplitudes contain NaN or Inf")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > tol.trace:
            raise QmajError(f"state norm {norm!r} differs from 1")
        v.setflags(write=False)
        object.__setattr__(self, "dim_a", int(dim_a))
        object.__setattr__(self, "dim_b", int(dim_b))
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def from_matrix(cls, m, tol: Tolerances = DEFAULT) -> "BipartitePureState":
        m = np.asarray(m, dtype=complex)
        return cls(m.shape[0], m.shape[1], m.reshape(-1), tol)

    @property
    def matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.dim_a, self.dim_b

    def reduced_a(self) -> np.ndarray:
        m = self.matrix
        return m @ m.conj().T


@dataclass(frozen=True)
class SchmidtForm:
    """``|psi> = sum_k sqrt(c_k) |a_k>|b_k>`` with ``a_k``, ``b_k`` the columns
    of ``basis_a`` and ``basis_b``."""

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def state(self) -> BipartitePureState:
        r = self.coefficients.size
        m = (self.basis_a[:, :r] * np.sqrt(self.coefficients)) @ self.basis_b[:, :r].T
        return BipartitePureState.from_matrix(m)


def schmidt(psi: BipartitePureState) -> SchmidtForm:
    """Schmidt decomposition from the SVD of the amplitude matrix.

    ``coefficients`` are the squared singular values, non-increasing, of
    length ``min(dim_a, dim_b)``.
    """
    u, s, vh = np.linalg.svd(psi.matrix)
    return SchmidtForm(s**2, u, vh.T)


def nielsen_feasible(psi: BipartitePureState, phi: BipartitePureState, tol: Tolerances = DEFAULT) -> bool:
    """Whether ``psi -> phi`` is possible by LOCC, i.e. ``lambda_psi ≺ lambda_phi``."""
    return is_majorized_by(schmidt(psi).coefficients, schmidt(phi).coefficients, tol=tol)


def _targets(targets, tol: Tolerances) -> tuple[np.ndarray, list[BipartitePureState]]:
    probs, states = targets
    p = _distribution(probs, tol)
    states = list(states)
    if len(states) != p.size:
        raise DimensionError(f"{p.size} probabilities for {len(states)} target states")
    return p, states


def _average_target_spectrum(p, states, tol):
    return weighted_spectrum_sum(p, [schmidt(s).coefficients for s in states], tol)


def ensemble_feasible(psi: BipartitePureState, targets, tol: Tolerances = DEFAULT) -> bool:
    """Whether ``psi`` can be converted to ``phi_i`` with probability ``p_i``.

    ``targets`` is a pair ``(probabilities, states)``. The test is
    ``lambda_psi ≺ sum_i p_i lambda_phi_i``.
    """
    p, states = _targets(targets, tol)
    return is_majorized_by(schmidt(psi).coefficients, _average_target_spectrum(p, states, tol), tol=tol)


@dataclass(frozen=True)
class LOCCProtocol:
    """One-way protocol: Alice measures, announces ``(i, j)``, Bob rotates.

    Attributes
    ----------
    alice : GeneralizedMeasurement
        Outcome labels are ``(i, j)``; ``(0, 0)`` marks the operator on the
        complement of the support of Alice's reduced state, which never fires.
    bob_unitaries : dict
        Label to Bob's unitary, acting as ``M -> M @ U.T``.
    outcome_probs : dict
        ``{(i, j): p_ij}`` excluding the null outcome.
    grouping : dict
        ``i -> [j, ...]``.
    probabilities, targets
        The requested ensemble.
    """

    dim_a: int
    dim_b: int
    alice: GeneralizedMeasurement
    bob_unitaries: dict
    outcome_probs: dict
    grouping: dict
    probabilities: np.ndarray
    targets: tuple

    def target_of(self, label) -> BipartitePureState | None:
        i = label[0]
        return None if i == 0 else self.targets[i - 1]


def build_protocol(psi: BipartitePureState, targets, tol: Tolerances = DEFAULT) -> LOCCProtocol:
    """Construct an LOCC protocol taking ``psi`` to the ensemble ``targets``.

    Alice's reduced state ``rho`` is measured with posteriors ``sigma_i``
    that share ``rho``'s eigenbasis and carry the Schmidt spectra of the
    targets. For an outcome ``(i, j)`` the normalized post-measurement
    amplitude matrix ``A`` and the target's ``T`` then have the same singular
    values; with ``A = U S V^H`` and ``T = U' S V'^H`` Alice appends
    ``U' U^H`` to her operator and Bob applies ``(V V'^H)^T``.

    Raises
    ------
    InfeasibleError
        If ``lambda_psi`` is not majorized by the average target spectrum.
    DimensionError
        If a target lives on a different ``dim_a x dim_b`` system.
    """
    p, states = _targets(targets, tol)
    for s in states:
        if s.shape != psi.shape:
            raise DimensionError(f"target of shape {s.shape} cannot be hosted by a {psi.shape} system")
    lam_psi = schmidt(psi).coefficients
    avg = _average_target_spectrum(p, states, tol)
    check = majorization_check(lam_psi, avg, tol=tol)
    if not check.holds:
        k = check.violated_index
        raise InfeasibleError(
            f"Schmidt spectrum of the source is not majorized by the average target spectrum (k={k})",
            k,
            None if k is None else float(check.slacks[k - 1]),
        )

    d = psi.dim_a
    rho = psi.reduced_a()
    _, w_rho = hermitian_eigensystem(rho, tol)
    sigmas = []
    for s in states:
        lam = pad_to(schmidt(s).coefficients, d)
        sigmas.append((w_rho * lam) @ w_rho.conj().T)
    meas, table = converse_measurement(rho, p, sigmas, tol=tol)

    m_psi = psi.matrix
    alice, bob, labels = [], {}, []
    for e, label in zip(meas.matrices, meas.labels):
        labels.append(label)
        if label == (0, 0):
            alice.append(e)
            bob[label] = np.eye(psi.dim_b, dtype=complex)
            continue
        a = e @ m_psi / np.sqrt(table[label])
        u, _, vh = np.linalg.svd(a)
        u_t, _, vh_t = np.linalg.svd(states[label[0] - 1].matrix)
        alice.append(u_t @ u.conj().T @ e)
        bob[label] = (vh.conj().T @ vh_t).T
    grouping: dict[int, list[int]] = {}
    for i, j in table:
        grouping.setdefault(i, []).append(j)
    return LOCCProtocol(
        psi.dim_a,
        psi.dim_b,
        GeneralizedMeasurement(alice, labels, tol=tol),
        bob,
        dict(table),
        grouping,
        p,
        tuple(states),
    )


def _check_plan(psi: BipartitePureState, plan: LOCCProtocol) -> None:
    if psi.shape != (plan.dim_a, plan.dim_b):
        raise DimensionError(f"plan is for a {plan.dim_a} x {plan.dim_b} system, state is {psi.shape}")


def outcome_distribution(psi: BipartitePureState, plan: LOCCProtocol) -> dict:
    """Exact ``{label: ||(E (x) I)|psi>||^2}`` over all of Alice's outcomes."""
    _check_plan(psi, plan)
    m = psi.matrix
    return {lab: float(np.linalg.norm(e @ m) ** 2) for e, lab in zip(plan.alice.matrices, plan.alice.labels)}


def apply_outcome(psi: BipartitePureState, plan: LOCCProtocol, label) -> BipartitePureState:
    """Normalized joint state after outcome ``label`` and Bob's correction."""
    _check_plan(psi, plan)
    label = tuple(label)
    idx = plan.alice.labels.index(label)
    m = plan.alice.matrices[idx] @ psi.matrix @ plan.bob_unitaries[label].T
    norm = np.linalg.norm(m)
    if norm <= 0:
        raise QmajError(f"outcome {label} has probability zero")
    return BipartitePureState.from_matrix(m / norm)


def execute_protocol(psi: BipartitePureState, plan: LOCCProtocol, seed: int) -> tuple[tuple, BipartitePureState]:
    """Sample Alice's outcome with a seeded generator and return ``(label, state)``."""
    dist = outcome_distribution(psi, plan)
    labels = list(dist)
    w = np.array([dist[k] for k in labels])
    k = make_rng(seed).choice(len(labels), p=w / w.sum())
    return labels[k], apply_outcome(psi, plan, labels[k])


def fidelity(a: BipartitePureState, b: BipartitePureState) -> float:
    """``|<a|b>|^2``; insensitive to global phase."""
    if a.shape != b.shape:
        raise DimensionError(f"shapes {a.shape} and {b.shape} differ")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
