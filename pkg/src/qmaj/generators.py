"""Seeded random instances for the property suites and the ``gen`` command.

Instance ``k`` of a batch with seed ``s`` is drawn from its own Philox
stream keyed by ``(s, k)``, so a batch can be regenerated in any order or in
parallel and a single instance can be reproduced on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import codec
from ._rng import instance_rng
from .entanglement import BipartitePureState
from .errors import QmajError
from .measurement import GeneralizedMeasurement
from .mixing import Ensemble

__all__ = [
    "KINDS",
    "haar_unitary",
    "random_density",
    "random_measurement",
    "random_ensemble",
    "random_distribution",
    "random_spectrum",
    "mix_through_permutations",
    "planted_pair",
    "feasible_spectral_instance",
    "feasible_state_instance",
    "random_bipartite",
    "entanglement_instance",
    "InstanceGenerator",
    "generate",
]

KINDS = ("ensemble", "measurement", "bipartite-state", "majorization-pair")


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with the phases of R fixed."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """``G G^H / tr`` for a ``d x rank`` Ginibre ``G``; rank drawn uniformly if omitted."""
    rank = int(rng.integers(1, d + 1)) if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_measurement(rng: np.random.Generator, d: int, n: int) -> GeneralizedMeasurement:
    """``n`` consecutive ``d x d`` row blocks of a Haar isometry ``C^d -> C^(n d)``."""
    v = haar_unitary(rng, n * d)[:, :d]
    return GeneralizedMeasurement([v[k * d:(k + 1) * d] for k in range(n)])


def random_distribution(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def random_ensemble(rng: np.random.Generator, d: int, n: int) -> Ensemble:
    return Ensemble(random_distribution(rng, n), [random_density(rng, d) for _ in range(n)])


def random_spectrum(rng: np.random.Generator, d: int, zeros: int = 0) -> np.ndarray:
    """Non-increasing distribution of length ``d`` ending in ``zeros`` exact zeros."""
    head = np.sort(rng.dirichlet(np.full(d - zeros, 0.7)))[::-1]
    return np.concatenate([head, np.zeros(zeros)])


def mix_through_permutations(rng: np.random.Generator, y, terms: int = 3, active: int | None = None) -> np.ndarray:
    """``sum_k w_k P_k y`` for random permutations of the first ``active`` entries.

    The result is majorized by ``y`` by construction and is returned sorted
    non-increasing.
    """
    y = np.asarray(y, dtype=float)
    active = y.size if active is None else active
    w = rng.dirichlet(np.ones(terms))
    x = np.zeros_like(y)
    for wk in w:
        perm = np.concatenate([rng.permutation(active), np.arange(active, y.size)])
        x += wk * y[perm]
    return np.sort(x)[::-1]


def planted_pair(rng: np.random.Generator, d: int) -> tuple[np.ndarray, np.ndarray]:
    """``(x, y)`` with ``x ≺ y``; about a third of the ``y`` carry zero tails."""
    zeros = int(rng.integers(0, d)) if rng.random() < 0.3 else 0
    y = random_spectrum(rng, d, zeros)
    return mix_through_permutations(rng, y), y


def _diag_in(w: np.ndarray, lam) -> np.ndarray:
    return (w * np.asarray(lam)) @ w.conj().T


def feasible_spectral_instance(rng: np.random.Generator, d: int, n: int, singular: bool = False):
    """``(rho, p, spectra)`` with ``lambda(rho) ≺ sum_i p_i spectra[i]``.

    With ``singular=True`` every target shares a zero tail and the
    permutations leave it alone, so ``rho`` is rank deficient.
    """
    zeros = int(rng.integers(1, d)) if singular and d > 1 else 0
    p = random_distribution(rng, n)
    spectra = [random_spectrum(rng, d, zeros) for _ in range(n)]
    y = sum(pi * s for pi, s in zip(p, spectra))
    x = mix_through_permutations(rng, y, active=d - zeros)
    rho = _diag_in(haar_unitary(rng, d), x)
    return rho, p, spectra


def feasible_state_instance(rng: np.random.Generator, d: int, n: int, singular: bool = False):
    """``(rho, p, states)``: as above with each spectrum placed in a Haar basis."""
    rho, p, spectra = feasible_spectral_instance(rng, d, n, singular)
    return rho, p, [_diag_in(haar_unitary(rng, d), s) for s in spectra]


def random_bipartite(rng: np.random.Generator, dim_a: int, dim_b: int, schmidt=None) -> BipartitePureState:
    """Pure state with the given squared Schmidt coefficients in Haar local bases."""
    r = min(dim_a, dim_b)
    if schmidt is None:
        schmidt = random_spectrum(rng, r)
    m = np.zeros((dim_a, dim_b), dtype=complex)
    m[np.arange(r), np.arange(r)] = np.sqrt(np.clip(schmidt, 0.0, None))
    m = haar_unitary(rng, dim_a) @ m @ haar_unitary(rng, dim_b).T
    return BipartitePureState.from_matrix(m / np.linalg.norm(m))


def entanglement_instance(rng: np.random.Generator, dim_a: int, dim_b: int, n: int, feasible: bool = True):
    """``(psi, p, targets)`` for ensemble conversion.

    Feasible instances plant ``lambda_psi`` below the average target
    spectrum ``y``. Infeasible ones use ``(1 - s) y + s e_1`` with
    ``s in [0.05, 0.5]``, which strictly majorizes ``y`` whenever ``y`` is
    not already ``e_1``; this needs ``min(dim_a, dim_b) >= 2``.
    """
    r = min(dim_a, dim_b)
    if not feasible and r < 2:
        raise QmajError("infeasible instances need Schmidt rank at least 2")
    while True:
        p = random_distribution(rng, n)
        spectra = []
        for _ in range(n):
            zeros = int(rng.integers(0, r)) if rng.random() < 0.3 else 0
            spectra.append(random_spectrum(rng, r, zeros))
        y = sum(pi * s for pi, s in zip(p, spectra))
        if feasible or y[0] < 1 - 1e-3:
            break
    if feasible:
        x = mix_through_permutations(rng, y)
    else:
        s = rng.uniform(0.05, 0.5)
        x = (1 - s) * y
        x[0] += s
    targets = [random_bipartite(rng, dim_a, dim_b, sp) for sp in spectra]
    return random_bipartite(rng, dim_a, dim_b, x), p, targets


@dataclass(frozen=True)
class InstanceGenerator:
    """Seeded batch of instances of one kind.

    ``dims`` and ``outcome_counts`` are inclusive ranges.
    """

    kind: str
    seed: int
    dims: tuple[int, int] = (1, 6)
    outcome_counts: tuple[int, int] = (1, 5)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise QmajError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")
        for name, (lo, hi) in (("dims", self.dims), ("outcome_counts", self.outcome_counts)):
            if not 1 <= lo <= hi:
                raise QmajError(f"invalid {name} range {(lo, hi)}")

    def instance(self, index: int):
        rng = instance_rng(self.seed, index)
        d = int(rng.integers(self.dims[0], self.dims[1] + 1))
        n = int(rng.integers(self.outcome_counts[0], self.outcome_counts[1] + 1))
        if self.kind == "ensemble":
            return random_ensemble(rng, d, n)
        if self.kind == "measurement":
            return random_measurement(rng, d, n), random_density(rng, d)
        if self.kind == "majorization-pair":
            return planted_pair(rng, d)
        db = int(rng.integers(self.dims[0], self.dims[1] + 1))
        return random_bipartite(rng, d, db)

    def __iter__(self) -> Iterator:
        k = 0
        while True:
            yield self.instance(k)
            k += 1

    def take(self, count: int) -> list:
        return [self.instance(k) for k in range(count)]

    def payload(self, index: int) -> dict:
        inst = self.instance(index)
        if self.kind == "ensemble":
            return codec.encode_ensemble(inst.probabilities, inst.states)
        if self.kind == "measurement":
            m, rho = inst
            return {"measurement": codec.encode_measurement(m.matrices, m.labels), "rho": codec.encode_matrix(rho)}
        if self.kind == "majorization-pair":
            return {"x": codec.encode_spectrum(inst[0]), "y": codec.encode_spectrum(inst[1])}
        return codec.encode_bipartite(inst)


def generate(kind: str, seed: int, count: int = 1, dims: tuple[int, int] = (1, 6),
             outcome_counts: tuple[int, int] = (1, 5)) -> list[str]:
    """JSON documents for ``count`` instances; identical arguments give identical bytes."""
    if count < 0:
        raise QmajError(f"count must be non-negative, got {count}")
    gen = InstanceGenerator(kind, seed, tuple(dims), tuple(outcome_counts))
    return [codec.dumps(gen.payload(k)) for k in range(count)]
