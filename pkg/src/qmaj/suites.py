"""Seeded property suites.

Each suite draws ``count`` instances from a seed, checks them and folds the
results into a :class:`SuiteResult`. Residual bounds are reported as
verdicts too, with slack ``bound - residual``, so a single worst-slack
number summarizes a run. Aggregation only uses min/max/sum, so instance
order does not matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._rng import instance_rng
from .config import DEFAULT, Tolerances
from .entanglement import (
    build_protocol,
    apply_outcome,
    fidelity,
    outcome_distribution,
    schmidt,
)
from .entropy import measurement_entropy_report, mixing_entropy_report
from .generators import (
    InstanceGenerator,
    entanglement_instance,
    feasible_spectral_instance,
    feasible_state_instance,
)
from .errors import QmajError
from .linalg import eigenvalues
from .majorization import majorization_check, pad_to, weighted_spectrum_sum
from .measurement import converse_measurement, verify_dynamic_constraints
from .mixing import SpectralTargetEnsemble, converse_mixture, verify_static_constraints
from .reports import VerificationReport

__all__ = ["SuiteResult", "SUITES", "run_suite", "static_generator", "dynamic_generator"]

# residual bounds used by the construction suites
RECONSTRUCTION = 1e-9
GROUP_SUM = 1e-10
SPECTRUM_MATCH = 1e-9
COMPLETENESS = 1e-9
POSTERIOR = 1e-9
PROBABILITY = 1e-9
FIDELITY = 1e-9


@dataclass
class SuiteResult:
    name: str
    seed: int
    count: int
    reports: list[VerificationReport] = field(default_factory=list)

    @property
    def failures(self) -> list[int]:
        return [k for k, r in enumerate(self.reports) if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst_slack(self) -> float | None:
        vals = [min(r.slacks.values()) for r in self.reports if r.slacks]
        return min(vals) if vals else None

    def worst_residuals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.reports:
            for k, v in r.residuals.items():
                out[k] = max(out.get(k, 0.0), v)
        return out

    def summary(self) -> str:
        if self.count == 0:
            return f"suite {self.name}: 0 instances (vacuous pass)"
        status = "PASS" if self.passed else f"FAIL ({len(self.failures)} of {self.count})"
        return f"suite {self.name}: {status}, {self.count} instances, worst slack {self.worst_slack:.3e}"


def _bound(report: VerificationReport, name: str, residual: float, bound: float) -> None:
    report.residuals[name] = float(residual)
    report.verdicts[name] = bool(residual <= bound)
    report.slacks[name] = float(bound - residual)


def static_generator(seed: int) -> InstanceGenerator:
    return InstanceGenerator("ensemble", seed, dims=(1, 6), outcome_counts=(1, 5))


def dynamic_generator(seed: int) -> InstanceGenerator:
    return InstanceGenerator("measurement", seed, dims=(1, 5), outcome_counts=(1, 4))


def _static(seed: int, k: int, tol: Tolerances) -> VerificationReport:
    rep = VerificationReport("suite static")
    rep.add_check("", verify_static_constraints(static_generator(seed).instance(k), tol=tol))
    return rep


def _dynamic(seed: int, k: int, tol: Tolerances) -> VerificationReport:
    m, rho = dynamic_generator(seed).instance(k)
    rep = VerificationReport("suite dynamic")
    rep.add_check("", verify_dynamic_constraints(m, rho, tol=tol))
    return rep


def _entropy(seed: int, k: int, tol: Tolerances) -> VerificationReport:
    rep = VerificationReport("suite entropy")
    e = static_generator(seed).instance(k)
    m, rho = dynamic_generator(seed).instance(k)
    for prefix, report in (("mix", mixing_entropy_report(e, tol)), ("meas", measurement_entropy_report(m, rho, tol))):
        for name, ok in report.verdicts.items():
            rep.verdicts[f"{prefix}.{name}"] = ok
            rep.slacks[f"{prefix}.{name}"] = report.slacks[name]
    return rep


def _spectrum_mismatch(state, target, d: int, tol: Tolerances) -> float:
    t = np.sort(np.asarray(target, dtype=float))[::-1]
    t = pad_to(t, d) if t.size < d else t[:d]
    return float(np.max(np.abs(eigenvalues(state, tol) - t)))


def _converse(seed: int, k: int, tol: Tolerances) -> VerificationReport:
    rng = instance_rng(seed, k)
    d = int(rng.integers(1, 7))
    n = int(rng.integers(1, 5))
    singular = bool(rng.random() < 0.3)
    rep = VerificationReport("suite converse-roundtrip")

    rho, p, spectra = feasible_spectral_instance(rng, d, n, singular)
    real = converse_mixture(rho, SpectralTargetEnsemble(p, spectra, tol), tol=tol)
    recon = sum(w * s for w, s in zip(real.weights, real.states))
    _bound(rep, "mixture.reconstruction", np.max(np.abs(recon - rho)), RECONSTRUCTION)
    groups = real.group_weights()
    _bound(rep, "mixture.group_sums", max(abs(groups.get(i, 0.0) - pi) for i, pi in enumerate(p, 1)), GROUP_SUM)
    spec_err = max(_spectrum_mismatch(s, spectra[lab[0] - 1], d, tol) for lab, s in zip(real.labels, real.states))
    _bound(rep, "mixture.spectra", spec_err, SPECTRUM_MATCH)

    rho, p, states = feasible_state_instance(rng, d, n, singular)
    meas, table = converse_measurement(rho, p, states, tol=tol)
    _bound(rep, "measurement.completeness", meas.completeness_residual(), COMPLETENESS)
    post_err = 0.0
    for e, lab in zip(meas.matrices, meas.labels):
        out = e @ rho @ e.conj().T
        target = np.zeros_like(out) if lab == (0, 0) else table[lab] * states[lab[0] - 1]
        post_err = max(post_err, float(np.max(np.abs(out - target))))
    _bound(rep, "measurement.posteriors", post_err, POSTERIOR)
    rep.add_check("measurement.dynamic", verify_dynamic_constraints(meas, rho, tol=tol))
    return rep


def _entanglement(seed: int, k: int, tol: Tolerances) -> VerificationReport:
    rng = instance_rng(seed, k)
    da, db = (int(v) for v in rng.integers(1, 5, size=2))
    n = int(rng.integers(1, 4))
    psi, p, targets = entanglement_instance(rng, da, db, n, feasible=True)
    plan = build_protocol(psi, (p, targets), tol)
    rep = VerificationReport("suite entanglement-loop")
    _bound(rep, "completeness", plan.alice.completeness_residual(), COMPLETENESS)

    dist = outcome_distribution(psi, plan)
    prob_err, fid_err, spec_err = 0.0, 0.0, 0.0
    realized = np.zeros(len(p))
    for lab, pr in dist.items():
        if lab == (0, 0):
            prob_err = max(prob_err, pr)
            continue
        prob_err = max(prob_err, abs(pr - plan.outcome_probs[lab]))
        realized[lab[0] - 1] += pr
        out = apply_outcome(psi, plan, lab)
        target = plan.target_of(lab)
        fid_err = max(fid_err, 1.0 - fidelity(out, target))
        spec_err = max(spec_err, float(np.max(np.abs(schmidt(out).coefficients - schmidt(target).coefficients))))
    _bound(rep, "outcome_probabilities", prob_err, PROBABILITY)
    _bound(rep, "fidelity", fid_err, FIDELITY)
    _bound(rep, "reduced_spectra", spec_err, SPECTRUM_MATCH)
    # closed loop: the realized ensemble must satisfy the feasibility criterion
    avg = weighted_spectrum_sum(realized / realized.sum(), [schmidt(t).coefficients for t in targets], tol)
    rep.add_check("necessity", majorization_check(schmidt(psi).coefficients, avg, tol=tol))
    return rep


SUITES: dict[str, Callable[[int, int, Tolerances], VerificationReport]] = {
    "static": _static,
    "dynamic": _dynamic,
    "entropy": _entropy,
    "converse-roundtrip": _converse,
    "entanglement-loop": _entanglement,
}


def run_suite(name: str, seed: int, count: int, tol: Tolerances = DEFAULT) -> SuiteResult:
    """Run ``count`` seeded instances of the named suite."""
    if name not in SUITES:
        raise QmajError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    if count < 0:
        raise QmajError(f"count must be non-negative, got {count}")
    check = SUITES[name]
    return SuiteResult(name, seed, count, [check(seed, k, tol) for k in range(count)])
