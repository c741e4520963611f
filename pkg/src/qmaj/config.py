"""Numerical tolerances shared by every module.

All defaults live in :class:`Tolerances`. Functions that compare floating
point quantities accept an explicit ``tol`` argument; when it is omitted the
module-level :data:`DEFAULT` record is used. The record is frozen, so
overriding means building a new one with :func:`dataclasses.replace`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-10
    unitary: float = 1e-9
    # spectrum entries in [-clamp, 0) are clamped to zero
    clamp: float = 1e-12
    distribution: float = 1e-10
    majorization: float = 1e-9
    completeness: float = 1e-9
    support: float = 1e-10
    null_outcome: float = 1e-12
    chain_snap: float = 1e-11
    prune: float = 1e-12
    entropy: float = 1e-9
    jacobi_offdiag: float = 1e-12
    jacobi_max_sweeps: int = 100
    # eigenvalues closer than this are one degenerate cluster for ordering
    degeneracy: float = 1e-10

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)


DEFAULT = Tolerances()
