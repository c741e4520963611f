"""Majorization of non-negative vectors and its constructive witnesses.

Vectors of unequal length are compared after zero-padding the shorter one,
so ``(1/3, 1/3, 1/3)`` is majorized by ``(1/2, 1/2)``. Every comparison
works on the canonical (non-increasing) ordering.

Besides the relation itself the module builds the three standard witnesses
for ``x ≺ y``: a chain of T-transforms, the permutation mixture obtained by
expanding that chain, and a real orthogonal matrix ``U`` whose squared
entries map ``y`` to ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DistributionError, InfeasibleError, QmajError, SumMismatchError
from .linalg import hermitian, hermitian_eigensystem

__all__ = [
    "spectrum",
    "pad_pair",
    "pad_to",
    "is_majorized_by",
    "majorization_check",
    "MajorizationCheck",
    "TTransformChain",
    "t_transform_chain",
    "PermutationMixture",
    "permutation_mixture",
    "horn_unitary",
    "ky_fan_sum",
    "weighted_spectrum_sum",
    "direct_sum_spectra",
]


def spectrum(x, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Canonical form of a non-negative vector: sorted non-increasing.

    Entries in ``[-tol.clamp, 0)`` are clamped to zero; more negative
    entries are rejected.
    """
    v = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise QmajError("spectrum has NaN or Inf entries")
    if v.size and v.min() < -tol.clamp:
        raise QmajError(f"spectrum entry {v.min():.3e} is negative")
    v = np.where(v < 0, 0.0, v)
    return -np.sort(-v)


def pad_to(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.size > dim:
        raise QmajError(f"cannot pad length {v.size} down to {dim}")
    return np.concatenate([v, np.zeros(dim - v.size)])


def pad_pair(x, y, tol: Tolerances = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """Canonicalize both vectors and zero-extend the shorter one."""
    x, y = spectrum(x, tol), spectrum(y, tol)
    d = max(x.size, y.size)
    return pad_to(x, d), pad_to(y, d)


@dataclass(frozen=True)
class MajorizationCheck:
    """Outcome of testing ``lhs ≺ rhs`` on padded canonical vectors.

    ``slacks[k-1]`` is ``sum(rhs[:k]) - sum(lhs[:k])`` for k = 1..d; the
    relation needs every slack non-negative and the last one zero.
    """

    lhs: np.ndarray
    rhs: np.ndarray
    slacks: np.ndarray
    sum_gap: float
    holds: bool

    @property
    def worst_slack(self) -> float:
        """Smallest partial-sum slack, with the total-sum gap counted as ``-|gap|``."""
        if self.slacks.size == 0:
            return 0.0
        return float(min(self.slacks[:-1].min(initial=np.inf), -abs(self.sum_gap)))

    @property
    def violated_index(self) -> int | None:
        """1-based index of the first failing partial sum, if any."""
        bad = np.flatnonzero(self.slacks[:-1] < 0)
        return int(bad[0]) + 1 if bad.size else None


def majorization_check(x, y, eps: float | None = None, tol: Tolerances = DEFAULT) -> MajorizationCheck:
    eps = tol.majorization if eps is None else eps
    xs, ys = pad_pair(x, y, tol)
    slacks = np.cumsum(ys) - np.cumsum(xs)
    gap = float(slacks[-1]) if slacks.size else 0.0
    holds = bool(np.all(slacks[:-1] >= -eps) and abs(gap) <= eps)
    return MajorizationCheck(xs, ys, slacks, gap, holds)


def is_majorized_by(x, y, eps: float | None = None, strict_sum: bool = False, tol: Tolerances = DEFAULT) -> bool:
    """True iff ``x ≺ y`` under the zero-padding convention.

    With ``strict_sum=True`` a total-sum mismatch beyond ``eps`` raises
    :class:`SumMismatchError` instead of returning False, which separates
    "wrong normalization" from "genuinely not majorized".
    """
    check = majorization_check(x, y, eps, tol)
    eps = tol.majorization if eps is None else eps
    if strict_sum and abs(check.sum_gap) > eps:
        raise SumMismatchError(
            f"totals differ: sum(x) = {check.lhs.sum()!r}, sum(y) = {check.rhs.sum()!r}"
        )
    return check.holds


def _require(x, y, eps, tol) -> MajorizationCheck:
    check = majorization_check(x, y, eps, tol)
    if not check.holds:
        k = check.violated_index
        if k is None:
            raise InfeasibleError(f"totals differ by {check.sum_gap:.3e}", None, check.sum_gap)
        raise InfeasibleError(
            f"x is not majorized by y: partial sum k={k} has slack {check.slacks[k - 1]:.3e}",
            k,
            float(check.slacks[k - 1]),
        )
    return check


@dataclass(frozen=True)
class TTransformChain:
    """Sequence of T-transforms taking ``source`` to ``result``.

    Each step ``(t, j, k)`` (0-based indices) replaces the current vector
    ``z`` by ``(1 - t) z + t Q_jk z`` where ``Q_jk`` swaps coordinates j and k.
    """

    steps: tuple[tuple[float, int, int], ...]
    source: np.ndarray
    result: np.ndarray

    def apply(self, y=None) -> np.ndarray:
        z = np.array(self.source if y is None else y, dtype=float)
        for t, j, k in self.steps:
            zj, zk = z[j], z[k]
            z[j] = (1 - t) * zj + t * zk
            z[k] = t * zj + (1 - t) * zk
        return z

    def matrix(self) -> np.ndarray:
        d = self.source.size
        m = np.eye(d)
        for t, j, k in self.steps:
            step = np.eye(d)
            step[[j, k], [j, k]] = 1 - t
            step[j, k] = step[k, j] = t
            m = step @ m
        return m


def t_transform_chain(x, y, eps: float | None = None, tol: Tolerances = DEFAULT) -> TTransformChain:
    """Build at most ``d - 1`` T-transforms mapping canonical ``y`` onto ``x``.

    Pivot rule: ``j`` is the first index where the current vector exceeds
    ``x``, ``k`` the first later index where it falls short. Moving
    ``min(z_j - x_j, x_k - z_k)`` of mass from j to k fixes at least one
    coordinate and keeps every positional partial sum of ``z`` above that
    of ``x``.
    """
    check = _require(x, y, eps, tol)
    x, z = check.lhs, check.rhs.copy()
    snap = tol.chain_snap
    d = x.size
    steps = []
    while True:
        diff = z - x
        z[np.abs(diff) <= snap] = x[np.abs(diff) <= snap]
        above = np.flatnonzero(z - x > snap)
        if above.size == 0:
            break
        j = int(above[0])
        below = np.flatnonzero(x[j + 1:] - z[j + 1:] > snap)
        if below.size == 0:
            # remaining excess is rounding noise beyond the last deficit
            z[j:] = x[j:]
            break
        k = j + 1 + int(below[0])
        delta = min(z[j] - x[j], x[k] - z[k])
        t = delta / (z[j] - z[k])
        zj, zk = z[j], z[k]
        z[j] = (1 - t) * zj + t * zk
        z[k] = t * zj + (1 - t) * zk
        steps.append((float(t), j, k))
        partial = np.cumsum(z) - np.cumsum(x)
        assert np.all(partial >= -10 * snap), "chain step broke x ≺ z"
        if len(steps) > d - 1:
            raise AssertionError("T-transform chain exceeded d - 1 steps")
    chain = TTransformChain(tuple(steps), check.rhs, x)
    return chain


@dataclass(frozen=True)
class PermutationMixture:
    """``target = sum_m weights[m] * base[permutations[m]]``.

    A permutation is stored as an index array ``s`` acting by
    ``(P y)_i = y[s[i]]``.
    """

    weights: np.ndarray
    permutations: tuple[tuple[int, ...], ...]
    base: np.ndarray
    target: np.ndarray

    def permutation_matrices(self) -> list[np.ndarray]:
        d = self.base.size
        mats = []
        for s in self.permutations:
            p = np.zeros((d, d))
            p[np.arange(d), s] = 1.0
            mats.append(p)
        return mats

    def apply(self, y=None) -> np.ndarray:
        y = self.base if y is None else np.asarray(y, dtype=float)
        return sum(w * y[list(s)] for w, s in zip(self.weights, self.permutations))

    def doubly_stochastic(self) -> np.ndarray:
        return sum(w * p for w, p in zip(self.weights, self.permutation_matrices()))

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.apply() - self.target), initial=0.0))


def permutation_mixture(x, y, eps: float | None = None, tol: Tolerances = DEFAULT) -> PermutationMixture:
    """Expand the T-transform chain for ``x ≺ y`` into weighted permutations.

    Each step splits every branch into "keep" (weight ``1 - t``) and "swap
    j, k" (weight ``t``); identical permutations are merged. Weights below
    ``tol.prune`` are dropped and the rest renormalized, a perturbation of
    at most ``d! * tol.prune`` in the reconstruction.
    """
    chain = t_transform_chain(x, y, eps, tol)
    d = chain.source.size
    branches: dict[tuple[int, ...], float] = {tuple(range(d)): 1.0}
    for t, j, k in chain.steps:
        nxt: dict[tuple[int, ...], float] = {}
        for perm, w in branches.items():
            if 1 - t > 0:
                nxt[perm] = nxt.get(perm, 0.0) + w * (1 - t)
            if t > 0:
                swapped = list(perm)
                swapped[j], swapped[k] = swapped[k], swapped[j]
                key = tuple(swapped)
                nxt[key] = nxt.get(key, 0.0) + w * t
        branches = nxt
    kept = {p: w for p, w in branches.items() if w >= tol.prune}
    total = sum(kept.values())
    perms = tuple(sorted(kept))
    weights = np.array([kept[p] / total for p in perms])
    return PermutationMixture(weights, perms, chain.source, chain.result)


def _rotation(d: int, j: int, k: int, c: float, s: float) -> np.ndarray:
    r = np.eye(d)
    r[j, j] = r[k, k] = c
    r[j, k] = s
    r[k, j] = -s
    return r


def horn_unitary(x, y, eps: float | None = None, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Real orthogonal ``U`` with ``x_i = sum_j U_ij**2 y_j`` (canonical x, y).

    Recursive construction: rotate an adjacent pair ``(j, j + 1)`` of
    ``diag(y)`` with ``y_j >= x_1 >= y_{j+1}`` so slot ``j`` carries ``x_1``,
    move it to the front, and solve the same problem for the remaining
    ``d - 1`` coordinates, whose new diagonal is again majorized.
    """
    check = _require(x, y, eps, tol)
    return _horn(check.lhs, check.rhs)


def _horn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = x.size
    if d <= 1:
        return np.eye(d)
    x1 = x[0]
    # adjacent bracketing pair: last j with y_j >= x_1, then k = j + 1
    ge = np.flatnonzero(y >= x1 - 1e-15)
    if ge.size == 0:
        raise AssertionError("no y_j >= x_1; majorization precondition broken")
    j = int(ge[-1])
    k = j + 1
    if k >= d:
        # every y_j >= x_1 >= mean(y) forces y constant and x = y
        j, k = d - 2, d - 1
        c, s = 1.0, 0.0
        if y[j] < x1 - 1e-12:
            raise AssertionError("bracketing failed; majorization precondition broken")
    elif y[j] - y[k] <= 0:
        c, s = 1.0, 0.0
    else:
        c2 = min(max((x1 - y[k]) / (y[j] - y[k]), 0.0), 1.0)
        # sqrt amplifies rounding noise near the ends of [0, 1]
        if c2 < 1e-14:
            c2 = 0.0
        elif c2 > 1 - 1e-14:
            c2 = 1.0
        c, s = np.sqrt(c2), np.sqrt(1.0 - c2)
    rot = _rotation(d, j, k, c, s)
    rest_idx = [i for i in range(d) if i != j]
    # move slot j to the front
    front = np.zeros((d, d))
    front[0, j] = 1.0
    for row, i in enumerate(rest_idx, start=1):
        front[row, i] = 1.0
    new_diag = (rot**2) @ y
    rest = new_diag[rest_idx]
    order = np.argsort(-rest, kind="stable")
    sort_rest = np.zeros((d - 1, d - 1))
    sort_rest[np.arange(d - 1), order] = 1.0
    v = _horn(x[1:], rest[order]) @ sort_rest
    full = np.eye(d)
    full[1:, 1:] = v
    return full @ front @ rot


def ky_fan_sum(h, k: int, tol: Tolerances = DEFAULT) -> float:
    """Sum of the ``k`` largest eigenvalues of a Hermitian matrix."""
    a = hermitian(h, tol)
    if not 1 <= k <= a.shape[0]:
        raise QmajError(f"k = {k} outside 1..{a.shape[0]}")
    lam, _ = hermitian_eigensystem(a, tol)
    return float(lam[:k].sum())


def _check_weights(weights, n: int, tol: Tolerances) -> np.ndarray:
    p = np.asarray(weights, dtype=float).reshape(-1)
    if p.size != n:
        raise QmajError(f"{p.size} weights for {n} spectra")
    if np.any(p < -tol.distribution) or abs(p.sum() - 1.0) > tol.distribution:
        raise DistributionError(f"weights {p} do not form a probability distribution")
    return np.clip(p, 0.0, None)


def weighted_spectrum_sum(weights, spectra: Sequence, tol: Tolerances = DEFAULT) -> np.ndarray:
    """``sum_i p_i lambda_i`` with every spectrum padded to a common length."""
    p = _check_weights(weights, len(spectra), tol)
    canon = [spectrum(s, tol) for s in spectra]
    d = max((c.size for c in canon), default=0)
    total = sum((w * pad_to(c, d) for w, c in zip(p, canon)), np.zeros(d))
    return spectrum(total, tol)


def direct_sum_spectra(weights, spectra: Sequence, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Canonicalized concatenation of ``p_i lambda_i`` over all i."""
    p = _check_weights(weights, len(spectra), tol)
    parts = [w * spectrum(s, tol) for w, s in zip(p, spectra)]
    return spectrum(np.concatenate(parts) if parts else np.zeros(0), tol)
