"""Entropy and power-sum inequalities implied by the majorization relations.

Shannon entropy is Schur-concave and ``sum x_j**k`` (k >= 1) Schur-convex,
so every majorization relation between spectra turns into a scalar
inequality. The report builders here evaluate the standard ones for an
ensemble and for a measurement. Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DistributionError, QmajError
from .linalg import eigenvalues
from .majorization import spectrum
from .measurement import GeneralizedMeasurement, apply
from .mixing import Ensemble, mix

__all__ = [
    "shannon_entropy",
    "von_neumann_entropy",
    "power_sum",
    "EntropyReport",
    "mixing_entropy_report",
    "measurement_entropy_report",
]

POWERS = (2, 3, 4)


def shannon_entropy(x, tol: Tolerances = DEFAULT) -> float:
    """``-sum x_j log2 x_j`` with ``0 log 0 = 0``."""
    v = spectrum(x, tol)
    if abs(v.sum() - 1.0) > 1e-9:
        raise DistributionError(f"entries sum to {v.sum()!r}, not 1")
    nz = v[v > 0]
    return float(-np.sum(nz * np.log2(nz)))


def von_neumann_entropy(rho, tol: Tolerances = DEFAULT) -> float:
    return shannon_entropy(eigenvalues(rho, tol), tol)


def power_sum(x, k: float, tol: Tolerances = DEFAULT) -> float:
    if k < 1:
        raise QmajError(f"power sums are Schur-convex only for k >= 1, got {k}")
    v = spectrum(x, tol)
    return float(np.sum(v**k))


@dataclass(frozen=True)
class EntropyReport:
    """Entropies (bits) and the signed slack of each inequality.

    A slack is ``larger side - smaller side``; the verdict treats slacks in
    ``(-tol.entropy, 0)`` as zero, the raw value is kept.
    """

    shannon_of_weights: float
    von_neumann: float
    avg_component_entropy: float
    slacks: dict[str, float]
    verdicts: dict[str, bool]

    @property
    def all_hold(self) -> bool:
        return all(self.verdicts.values())

    @property
    def von_neumann_nats(self) -> float:
        return self.von_neumann * np.log(2)


def _finish(h_p, s_rho, avg, slacks, tol) -> EntropyReport:
    verdicts = {k: bool(v >= -tol.entropy) for k, v in slacks.items()}
    return EntropyReport(h_p, s_rho, avg, slacks, verdicts)


def _power_chain(p, spectra, lam_rho, slacks: dict) -> None:
    for k in POWERS:
        lower = float(sum(pi**k * power_sum(s, k) for pi, s in zip(p, spectra)))
        upper = float(sum(pi * power_sum(s, k) for pi, s in zip(p, spectra)))
        mid = power_sum(lam_rho, k)
        slacks[f"power{k}_lower"] = mid - lower
        slacks[f"power{k}_upper"] = upper - mid


def mixing_entropy_report(e: Ensemble, tol: Tolerances = DEFAULT) -> EntropyReport:
    """Entropy inequalities for ``rho = sum p_i rho_i``.

    ``average_spectrum``: ``S(rho) >= H(sum p_i lambda(rho_i))``;
    ``concavity``: ``S(rho) >= sum p_i S(rho_i)``;
    ``lanford_robinson``: ``sum p_i S(rho_i) + H(p) >= S(rho)``;
    ``power{k}_lower/upper``: ``sum p_i^k tr rho_i^k <= tr rho^k <= sum p_i tr rho_i^k``.
    """
    p = e.probabilities
    lam_rho = eigenvalues(mix(e), tol)
    spectra = [eigenvalues(r, tol) for r in e.states]
    s_rho = shannon_entropy(lam_rho, tol)
    comp = [shannon_entropy(s, tol) for s in spectra]
    avg = float(np.dot(p, comp))
    h_p = shannon_entropy(p, tol)
    d = max(s.size for s in spectra)
    avg_spec = sum(pi * np.pad(s, (0, d - s.size)) for pi, s in zip(p, spectra))
    slacks = {
        "average_spectrum": s_rho - shannon_entropy(avg_spec / avg_spec.sum(), tol),
        "concavity": s_rho - avg,
        "lanford_robinson": avg + h_p - s_rho,
    }
    _power_chain(p, spectra, lam_rho, slacks)
    return _finish(h_p, s_rho, avg, slacks, tol)


def measurement_entropy_report(m: GeneralizedMeasurement, rho, tol: Tolerances = DEFAULT) -> EntropyReport:
    """Entropy inequalities between a prior and the posteriors of ``m``.

    ``information_gain``: ``S(rho) >= sum p_i S(rho_i')``;
    ``entropy_cost``: ``H(p) + sum p_i S(rho_i') >= S(rho)``;
    ``power{k}_lower/upper``: ``sum p_i^k tr rho_i'^k <= tr rho^k <= sum p_i tr rho_i'^k``.
    Null outcomes contribute only through ``H(p)``.
    """
    outcomes = apply(m, rho, tol)
    probs = np.array([o.probability for o in outcomes])
    h_p = shannon_entropy(probs / probs.sum(), tol)
    live = [o for o in outcomes if not o.is_null]
    p = np.array([o.probability for o in live])
    spectra = [eigenvalues(o.posterior, tol) for o in live]
    lam_rho = eigenvalues(rho, tol)
    s_rho = shannon_entropy(lam_rho, tol)
    avg = float(sum(pi * shannon_entropy(s, tol) for pi, s in zip(p, spectra)))
    slacks = {
        "information_gain": s_rho - avg,
        "entropy_cost": h_p + avg - s_rho,
    }
    _power_chain(p, spectra, lam_rho, slacks)
    return _finish(h_p, s_rho, avg, slacks, tol)
