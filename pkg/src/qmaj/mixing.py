"""Mixtures of density matrices: eigenvalue constraints and converse constructions.

For an ensemble ``rho = sum_i p_i rho_i`` two relations always hold::

    lambda(rho) ≺ sum_i p_i lambda(rho_i)
    ⊕_i p_i lambda(rho_i) ≺ lambda(rho)

:func:`verify_static_constraints` evaluates both. :func:`converse_mixture`
goes the other way: given ``rho`` and target spectra whose weighted sum
majorizes ``lambda(rho)`` it builds states with those spectra that mix back
to ``rho``, at the price of splitting each ``i`` into several branches ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .config import DEFAULT, Tolerances
from .errors import DimensionError, DistributionError, InfeasibleError
from .linalg import density_matrix, eigenvalues, hermitian_eigensystem
from .majorization import (
    direct_sum_spectra,
    majorization_check,
    pad_to,
    permutation_mixture,
    spectrum,
    weighted_spectrum_sum,
)
from .reports import CertifiedFixture, ConstraintReport

__all__ = [
    "Ensemble",
    "SpectralTargetEnsemble",
    "MixtureRealization",
    "mix",
    "verify_static_constraints",
    "converse_mixture",
    "exact_converse_search",
    "bloch_grid",
    "kempe_mixing_counterexample",
]


def _distribution(p, tol: Tolerances) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < -tol.distribution) or abs(p.sum() - 1.0) > tol.distribution:
        raise DistributionError(f"{p} is not a probability distribution")
    out = np.clip(p, 0.0, None)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Ensemble:
    probabilities: np.ndarray
    states: tuple[np.ndarray, ...]

    def __init__(self, probabilities, states: Sequence, tol: Tolerances = DEFAULT):
        p = _distribution(probabilities, tol)
        if len(states) != p.size:
            raise DimensionError(f"{p.size} probabilities for {len(states)} states")
        rhos = tuple(density_matrix(s, tol=tol) for s in states)
        if len({r.shape for r in rhos}) > 1:
            raise DimensionError("ensemble states have different dimensions")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "states", rhos)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class SpectralTargetEnsemble:
    """Probabilities paired with target spectra (each summing to one)."""

    probabilities: np.ndarray
    spectra: tuple[np.ndarray, ...]

    def __init__(self, probabilities, spectra: Sequence, tol: Tolerances = DEFAULT):
        p = _distribution(probabilities, tol)
        if len(spectra) != p.size:
            raise DimensionError(f"{p.size} probabilities for {len(spectra)} spectra")
        canon = []
        for s in spectra:
            c = spectrum(s, tol)
            if abs(c.sum() - 1.0) > tol.distribution:
                raise DistributionError(f"target spectrum {c} does not sum to one")
            c.setflags(write=False)
            canon.append(c)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "spectra", tuple(canon))


@dataclass(frozen=True)
class MixtureRealization:
    """States ``rho_ij`` with weights ``p_ij`` realizing a target ensemble.

    ``labels[m] = (i, j)`` names branch m with 1-based indices; ``grouping``
    maps each target index i to the positions of its branches.
    """

    labels: tuple[tuple[int, int], ...]
    weights: np.ndarray
    states: tuple[np.ndarray, ...]
    grouping: dict[int, tuple[int, ...]]

    def as_ensemble(self) -> Ensemble:
        return Ensemble(self.weights / self.weights.sum(), self.states)

    def group_weights(self) -> dict[int, float]:
        return {i: float(self.weights[list(idx)].sum()) for i, idx in self.grouping.items()}


def mix(e: Ensemble) -> np.ndarray:
    """Convex combination ``sum_i p_i rho_i``."""
    rho = sum(p * r for p, r in zip(e.probabilities, e.states))
    return density_matrix(rho)


def verify_static_constraints(e: Ensemble, eps: float | None = None, tol: Tolerances = DEFAULT) -> ConstraintReport:
    """Evaluate both mixing relations for an ensemble.

    Relations are reported as ``"mixed_vs_average"`` for
    ``lambda(rho) ≺ sum p_i lambda(rho_i)`` and ``"direct_sum_vs_mixed"`` for
    ``⊕ p_i lambda(rho_i) ≺ lambda(rho)``.
    """
    lam_rho = eigenvalues(mix(e), tol)
    spectra = [eigenvalues(r, tol) for r in e.states]
    avg = weighted_spectrum_sum(e.probabilities, [spectrum(s, tol) for s in spectra], tol)
    dsum = direct_sum_spectra(e.probabilities, [spectrum(s, tol) for s in spectra], tol)
    return ConstraintReport(
        vectors={"spectrum": lam_rho, "weighted_sum": avg, "direct_sum": dsum},
        relations={
            "mixed_vs_average": majorization_check(lam_rho, avg, eps, tol),
            "direct_sum_vs_mixed": majorization_check(dsum, lam_rho, eps, tol),
        },
    )


def converse_mixture(rho, targets: SpectralTargetEnsemble, eps: float | None = None,
                     tol: Tolerances = DEFAULT) -> MixtureRealization:
    """States with prescribed spectra whose mixture is ``rho``.

    Requires ``lambda(rho) ≺ sum_i p_i lambda_i``. Writing
    ``lambda(rho) = sum_j q_j P_j (sum_i p_i lambda_i)`` and distributing
    each permutation over the sum gives ``rho_ij = W diag(P_j lambda_i) W^H``
    with weight ``p_i q_j``, where ``W`` diagonalizes ``rho``.

    Raises
    ------
    InfeasibleError
        If the majorization precondition fails; ``index`` names the first
        violated partial sum.
    """
    rho = density_matrix(rho, tol=tol)
    lam, w = hermitian_eigensystem(rho, tol)
    d = lam.size
    p = targets.probabilities
    avg = weighted_spectrum_sum(p, targets.spectra, tol)
    check = majorization_check(lam, avg, eps, tol)
    if not check.holds:
        k = check.violated_index
        raise InfeasibleError(
            f"lambda(rho) is not majorized by the weighted target spectrum (k={k})",
            k,
            None if k is None else float(check.slacks[k - 1]),
        )
    mixture = permutation_mixture(lam, avg, eps, tol)
    dim = mixture.base.size

    labels, weights, states = [], [], []
    grouping: dict[int, tuple[int, ...]] = {}
    for i, (pi, lam_i) in enumerate(zip(p, targets.spectra), start=1):
        members = []
        if pi > 0:
            padded = pad_to(lam_i, dim)
            for j, (qj, perm) in enumerate(zip(mixture.weights, mixture.permutations), start=1):
                permuted = padded[list(perm)]
                if np.any(permuted[d:] > tol.support):
                    raise InfeasibleError(f"target spectrum {i} does not fit on dimension {d}")
                members.append(len(states))
                labels.append((i, j))
                weights.append(pi * qj)
                states.append((w * permuted[:d]) @ w.conj().T)
        grouping[i] = tuple(members)
    return MixtureRealization(tuple(labels), np.array(weights), tuple(states), grouping)


def bloch_grid(n_azimuth: int = 64, n_polar: int = 33) -> np.ndarray:
    """Unit vectors on a polar x azimuthal grid, poles included."""
    theta = np.linspace(0.0, np.pi, n_polar)
    phi = np.linspace(0.0, 2 * np.pi, n_azimuth, endpoint=False)
    t, f = np.meshgrid(theta, phi, indexing="ij")
    n = np.stack([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)], axis=-1)
    return n.reshape(-1, 3)


def _qubit_states(a: float, directions: np.ndarray) -> np.ndarray:
    """Qubit states with spectrum ``(a, 1 - a)`` and Bloch direction ``n``."""
    r = (2 * a - 1) * directions
    out = np.empty((len(directions), 2, 2), dtype=complex)
    out[:, 0, 0] = (1 + r[:, 2]) / 2
    out[:, 1, 1] = (1 - r[:, 2]) / 2
    out[:, 0, 1] = (r[:, 0] - 1j * r[:, 1]) / 2
    out[:, 1, 0] = (r[:, 0] + 1j * r[:, 1]) / 2
    return out


def _direction(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _grid_block(rho, p, cands, start, stop):
    """Best residual over rows ``start:stop`` of the first candidate set."""
    c1 = p[0] * cands[0][start:stop]
    if len(cands) == 1:
        res = np.abs(c1 - rho).reshape(len(c1), -1).max(axis=1)
        m = int(np.argmin(res))
        return float(res[m]), (start + m,)
    c2 = p[1] * cands[1]
    diff = c1[:, None] + c2[None, :] - rho
    res = np.abs(diff).reshape(diff.shape[0], diff.shape[1], -1).max(axis=2)
    m1, m2 = np.unravel_index(int(np.argmin(res)), res.shape)
    return float(res[m1, m2]), (start + int(m1), int(m2))


def exact_converse_search(rho, targets: SpectralTargetEnsemble, grid: tuple[int, int] = (64, 33),
                          accept: float = 1e-6, full_output: bool = False, tol: Tolerances = DEFAULT):
    """Search for qubit states with the target spectra mixing exactly to ``rho``.

    Brute force over a Bloch-sphere grid (``grid = (n_azimuth, n_polar)``)
    for every target, followed by least-squares refinement of the best grid
    points. Returns an :class:`Ensemble` witness when
    ``||sum p_i rho_i - rho||_max <= accept``, otherwise ``None``. With
    ``full_output=True`` returns ``(witness, best_residual)``.

    The grid is scanned in independent row blocks whose partial minima are
    reduced at the end, so the scan can be split across workers.
    """
    rho = density_matrix(rho, tol=tol)
    if rho.shape != (2, 2):
        raise DimensionError("exact converse search supports qubits only")
    if len(targets.spectra) > 2:
        raise DimensionError("exact converse search supports at most two targets")
    spectra = []
    for s in targets.spectra:
        if s.size > 2 and np.any(s[2:] > tol.support):
            raise DimensionError(f"target spectrum {s} has rank above 2")
        spectra.append(pad_to(s[:2], 2))
    p = targets.probabilities
    dirs = bloch_grid(*grid)
    # a maximally mixed target has a single candidate state
    cand_dirs = [dirs[:1] if abs(s[0] - 0.5) < 1e-15 else dirs for s in spectra]
    cands = [_qubit_states(s[0], nd) for s, nd in zip(spectra, cand_dirs)]
    rho_arr = np.asarray(rho)

    n1 = len(cands[0])
    block = 128
    partial = [_grid_block(rho_arr, p, cands, a, min(a + block, n1)) for a in range(0, n1, block)]
    best_res, best_idx = min(partial, key=lambda r: r[0])

    # refine from the best grid points in every block
    starts = sorted(partial, key=lambda r: r[0])[:8]

    def angles_of(k, idx):
        n = cand_dirs[k][idx]
        return [np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])]

    def build(params):
        states = []
        for k, s in enumerate(spectra):
            n = _direction(params[2 * k], params[2 * k + 1])
            states.append(_qubit_states(s[0], n[None, :])[0])
        return states

    def residual_vec(params):
        diff = sum(pk * st for pk, st in zip(p, build(params))) - rho_arr
        return np.concatenate([diff.real.ravel(), diff.imag.ravel()])

    best_params = sum((angles_of(k, best_idx[k]) for k in range(len(spectra))), [])
    for res0, idx in starts:
        x0 = sum((angles_of(k, idx[k]) for k in range(len(spectra))), [])
        sol = least_squares(residual_vec, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        r = float(np.max(np.abs(residual_vec(sol.x))))
        if r < best_res:
            best_res, best_params = r, list(sol.x)

    witness = None
    if best_res <= accept:
        witness = Ensemble(p, [density_matrix(s, tol=tol) for s in build(best_params)], tol)
    return (witness, best_res) if full_output else witness


def kempe_mixing_counterexample(grid: tuple[int, int] = (64, 33), tol: Tolerances = DEFAULT) -> CertifiedFixture:
    """Qubit instance satisfying both mixing relations yet not realizable.

    ``rho = diag(5/12, 7/12)``, ``p = (1/2, 1/2)``, target spectra ``(1, 0)``
    and ``(1/2, 1/2)``. Any realization mixes a pure state with ``I/2``, whose
    spectrum is always ``(3/4, 1/4)``; the fixture records that forced
    spectrum over the whole search grid alongside the failed search.
    """
    rho = np.diag([5 / 12, 7 / 12]).astype(complex)
    p = np.array([0.5, 0.5])
    spectra = [np.array([1.0, 0.0]), np.array([0.5, 0.5])]
    targets = SpectralTargetEnsemble(p, spectra, tol)
    lam = eigenvalues(rho, tol)
    checks = {
        "mixed_vs_average": majorization_check(lam, weighted_spectrum_sum(p, spectra, tol), tol=tol),
        "direct_sum_vs_mixed": majorization_check(direct_sum_spectra(p, spectra, tol), lam, tol=tol),
    }
    witness, residual = exact_converse_search(rho, targets, grid, full_output=True, tol=tol)

    pure = _qubit_states(1.0, bloch_grid(*grid))
    forced = [eigenvalues(0.5 * s + 0.25 * np.eye(2), tol) for s in pure[:: max(1, len(pure) // 64)]]
    forced_dev = float(np.max(np.abs(np.array(forced) - [0.75, 0.25])))
    return CertifiedFixture(
        name="kempe-mixing",
        rho=rho,
        probabilities=p,
        targets=tuple(np.diag(s).astype(complex) for s in spectra),
        checks=checks,
        witness=witness,
        min_residual=residual,
        tolerance=1e-6,
        notes={"forced_spectrum": [0.75, 0.25], "forced_spectrum_deviation": forced_dev},
    )
