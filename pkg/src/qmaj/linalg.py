"""Dense complex linear algebra primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The validating
constructors (:func:`hermitian`, :func:`density_matrix`, :func:`unitary`)
return read-only copies, so a value that passed validation cannot be mutated
behind the caller's back.

Eigen-decompositions go through a cyclic complex Jacobi solver rather than
LAPACK: at the dimensions this package targets (d <= 64) it is accurate to
machine precision and, more usefully, its output ordering is fully
deterministic, including inside degenerate eigenspaces.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    ConvergenceError,
    DimensionError,
    NotHermitianError,
    NotPSDError,
    NotUnitaryError,
    QmajError,
    TraceError,
)

__all__ = [
    "as_matrix",
    "hermitian",
    "density_matrix",
    "unitary",
    "hermitian_eigensystem",
    "eigenvalues",
    "sqrt_psd",
    "support_inverse_sqrt",
    "SupportDecomposition",
    "tensor_product",
    "partial_trace",
    "ket_to_dm",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array (copy, writeable)."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise QmajError("matrix has NaN or Inf entries")
    return a


def hermitian(m, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate ``m`` as Hermitian and return the symmetrized ``(m + m^H)/2``."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"Hermitian matrix must be square, got {a.shape}")
    err = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if err > tol.hermitian:
        raise NotHermitianError(f"||M - M^H||_max = {err:.3e} exceeds {tol.hermitian:.1e}")
    return _frozen((a + a.conj().T) / 2)


def _is_psd(a: np.ndarray, slack: float) -> bool:
    # Cholesky of a + slack*I succeeds iff the smallest eigenvalue exceeds -slack.
    if a.shape[0] == 0:
        return True
    try:
        np.linalg.cholesky(a + slack * np.eye(a.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def density_matrix(m, relaxed_trace: bool = False, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD and (unless relaxed) unit trace.

    ``relaxed_trace=True`` admits any positive semidefinite matrix; it exists
    for block-decomposition checks that hold for unnormalized positive
    matrices.
    """
    a = hermitian(m, tol)
    if not _is_psd(np.asarray(a), tol.psd):
        lam = eigenvalues(a, tol)
        raise NotPSDError(f"smallest eigenvalue {lam[-1]:.3e} below -{tol.psd:.1e}")
    if not relaxed_trace:
        tr = np.trace(a).real
        if abs(tr - 1.0) > tol.trace:
            raise TraceError(f"trace {tr!r} differs from 1 by more than {tol.trace:.1e}")
    return a


def unitary(m, tol: Tolerances = DEFAULT) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"unitary must be square, got {a.shape}")
    err = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) if a.size else 0.0
    if err > tol.unitary:
        raise NotUnitaryError(f"||U^H U - I||_max = {err:.3e} exceeds {tol.unitary:.1e}")
    return _frozen(a)


def _jacobi(a: np.ndarray, tol: Tolerances) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi sweeps; returns (diagonal, accumulated rotations)."""
    d = a.shape[0]
    w = np.eye(d, dtype=complex)
    if d < 2:
        return a.diagonal().real.copy(), w
    scale = max(1.0, float(np.max(np.abs(a))))
    thresh = tol.jacobi_offdiag * scale
    skip = 1e-2 * thresh
    iu = np.triu_indices(d, 1)
    for _ in range(tol.jacobi_max_sweeps):
        if np.max(np.abs(a[iu])) < thresh:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                b = a.item(p, q)
                absb = abs(b)
                if absb < skip:
                    continue
                # phase rotation makes the pivot real, then a real Jacobi rotation kills it
                phase = b / absb
                theta = (a.item(q, q).real - a.item(p, p).real) / (2.0 * absb)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # J = [[c, s], [-s*conj(phase), c*conj(phase)]] acting on columns (p, q)
                sp = s * phase.conjugate()
                cp = c * phase.conjugate()
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - sp * aq
                a[:, q] = s * ap + cp * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - sp.conjugate() * aq
                a[q, :] = s * ap + cp.conjugate() * aq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a.item(p, p).real
                a[q, q] = a.item(q, q).real
                wp = w[:, p].copy()
                wq = w[:, q]
                w[:, p] = c * wp - sp * wq
                w[:, q] = s * wp + cp * wq
    else:
        residual = float(np.max(np.abs(a[iu])))
        if residual >= thresh:
            raise ConvergenceError(
                f"Jacobi did not converge in {tol.jacobi_max_sweeps} sweeps", residual
            )
    return a.diagonal().real.copy(), w


def _phase_normalize(w: np.ndarray) -> np.ndarray:
    out = w.copy()
    for col in range(out.shape[1]):
        v = out[:, col]
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size:
            z = v[nz[0]]
            out[:, col] = v * (abs(z) / z)
    return out


def hermitian_eigensystem(h, tol: Tolerances = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (non-increasing) and eigenvector matrix of a Hermitian matrix.

    Returns ``(lam, W)`` with ``H = W @ diag(lam) @ W^H``. Each column of
    ``W`` is phase-normalized so its first non-negligible component is real
    and positive. Inside a degenerate cluster (eigenvalues within
    ``tol.degeneracy``) columns are ordered by descending lexicographic
    comparison of their real parts.

    Raises
    ------
    ConvergenceError
        If the off-diagonal residual is still above threshold after
        ``tol.jacobi_max_sweeps`` sweeps.
    """
    a = np.array(hermitian(h, tol))
    lam, w = _jacobi(a, tol)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    w = _phase_normalize(w[:, order])

    start = 0
    d = lam.size
    while start < d:
        stop = start + 1
        while stop < d and lam[start] - lam[stop] <= tol.degeneracy:
            stop += 1
        if stop - start > 1:
            block = w[:, start:stop]
            keys = [tuple(np.round(block[:, c].real, 12)) for c in range(block.shape[1])]
            perm = sorted(range(len(keys)), key=lambda c: keys[c], reverse=True)
            w[:, start:stop] = block[:, perm]
        start = stop
    return lam, w


def eigenvalues(h, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Eigenvalues in non-increasing order."""
    a = np.array(hermitian(h, tol))
    lam, _ = _jacobi(a, tol)
    return np.sort(lam)[::-1]


def sqrt_psd(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Positive square root of a PSD matrix.

    Eigenvalues in ``[-tol.psd, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSDError`.
    """
    lam, w = hermitian_eigensystem(a, tol)
    if lam.size and lam[-1] < -tol.psd:
        raise NotPSDError(f"eigenvalue {lam[-1]:.3e} below -{tol.psd:.1e}")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return _frozen((w * root) @ w.conj().T)


class SupportDecomposition(NamedTuple):
    inv_sqrt: np.ndarray
    support: np.ndarray
    complement: np.ndarray


def support_inverse_sqrt(rho, tau: float | None = None, tol: Tolerances = DEFAULT) -> SupportDecomposition:
    """Inverse square root restricted to the support of ``rho``.

    Eigenvalues at or below ``tau`` (default ``tol.support``) are treated as
    zero: the inverse square root vanishes on that subspace, which is what
    ``complement`` projects onto.
    """
    tau = tol.support if tau is None else tau
    if tau <= 0:
        raise QmajError("support threshold must be positive")
    lam, w = hermitian_eigensystem(density_matrix(rho, tol=tol), tol)
    keep = lam > tau
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / np.sqrt(lam[keep])
    p = (w * keep) @ w.conj().T
    return SupportDecomposition(
        _frozen((w * inv) @ w.conj().T),
        _frozen(p),
        _frozen(np.eye(lam.size) - p),
    )


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(rho_ab, dim_a: int, dim_b: int, keep: str = "A", tol: Tolerances = DEFAULT) -> np.ndarray:
    """Reduced state of a bipartite density matrix.

    ``keep="A"`` traces out B, ``keep="B"`` traces out A. Accepts any PSD
    matrix (trace not enforced) so unnormalized blocks can be reduced too.
    """
    a = density_matrix(rho_ab, relaxed_trace=True, tol=tol)
    if dim_a * dim_b != a.shape[0]:
        raise DimensionError(f"{dim_a} x {dim_b} does not match matrix dimension {a.shape[0]}")
    t = np.asarray(a).reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        out = np.einsum("ijkj->ik", t)
    elif keep == "B":
        out = np.einsum("ijil->jl", t)
    else:
        raise QmajError(f"keep must be 'A' or 'B', got {keep!r}")
    return _frozen(out)


def ket_to_dm(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
