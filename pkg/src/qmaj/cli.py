"""Command-line front end.

Every command reads JSON payloads (see :mod:`qmaj.codec`), prints a
:class:`~qmaj.reports.VerificationReport` and exits with

* 0 when every verdict holds,
* 1 when a relation or bound is violated,
* 2 when a construction's majorization precondition fails,
* 3 on malformed or invalid input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, codec
from .config import DEFAULT, Tolerances
from .entanglement import (
    build_protocol,
    execute_protocol,
    fidelity,
    outcome_distribution,
    schmidt,
)
from .entropy import EntropyReport, measurement_entropy_report, mixing_entropy_report
from .errors import ConvergenceError, InfeasibleError, QmajError
from .generators import KINDS, generate
from .linalg import density_matrix
from .majorization import (
    horn_unitary,
    majorization_check,
    permutation_mixture,
    t_transform_chain,
    weighted_spectrum_sum,
)
from .measurement import (
    GeneralizedMeasurement,
    converse_measurement,
    dilate,
    sample_outcomes,
    verify_dynamic_constraints,
)
from .mixing import Ensemble, SpectralTargetEnsemble, converse_mixture, verify_static_constraints
from .reports import VerificationReport, file_digest
from .suites import SUITES, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_INFEASIBLE, EXIT_INPUT = 0, 1, 2, 3


def _report(args, *paths: str) -> VerificationReport:
    name = " ".join(x for x in (args.group, getattr(args, "action", None)) if x)
    return VerificationReport(name, inputs={str(p): file_digest(p) for p in paths})


def _tol(args) -> Tolerances:
    return DEFAULT if args.tol is None else DEFAULT.with_overrides(majorization=args.tol)


def _bound(rep: VerificationReport, name: str, residual: float, bound: float) -> None:
    rep.residuals[name] = float(residual)
    rep.verdicts[name] = bool(residual <= bound)
    rep.slacks[name] = float(bound - residual)


def _load_measurement(path) -> GeneralizedMeasurement:
    mats, labels = codec.decode_measurement(codec.read(path))
    return GeneralizedMeasurement(mats, labels)


def _load_rho(path, tol) -> np.ndarray:
    return density_matrix(codec.decode_matrix(codec.read(path)), tol=tol)


def _load_ensemble(path, tol) -> Ensemble:
    p, states = codec.decode_ensemble(codec.read(path))
    return Ensemble(p, states, tol)


def _add_entropy(rep: VerificationReport, er: EntropyReport) -> None:
    for name, ok in er.verdicts.items():
        rep.verdicts[name] = ok
        rep.slacks[name] = er.slacks[name]
    rep.details["entropies_bits"] = {
        "shannon_of_weights": er.shannon_of_weights,
        "von_neumann": er.von_neumann,
        "avg_component_entropy": er.avg_component_entropy,
    }
    rep.details["von_neumann_nats"] = er.von_neumann_nats


# -- maj ---------------------------------------------------------------------


def cmd_maj_check(args):
    tol = _tol(args)
    rep = _report(args, args.x, args.y)
    x = codec.decode_spectrum(codec.read(args.x))
    y = codec.decode_spectrum(codec.read(args.y))
    rep.add_check("x_prec_y", majorization_check(x, y, tol=tol))
    return rep


def cmd_maj_decompose(args):
    tol = _tol(args)
    rep = _report(args, args.x, args.y)
    x = codec.decode_spectrum(codec.read(args.x))
    y = codec.decode_spectrum(codec.read(args.y))
    chain = t_transform_chain(x, y, tol=tol)
    mix = permutation_mixture(x, y, tol=tol)
    _bound(rep, "chain", float(np.max(np.abs(chain.apply() - chain.result))) if chain.steps else 0.0, 1e-10)
    _bound(rep, "mixture", mix.residual, 1e-10)
    rep.details["chain"] = [{"t": t, "j": j + 1, "k": k + 1} for t, j, k in chain.steps]
    rep.details["mixture"] = [
        {"weight": float(w), "permutation": [int(s) + 1 for s in perm]}
        for w, perm in zip(mix.weights, mix.permutations)
    ]
    return rep


def cmd_maj_horn(args):
    tol = _tol(args)
    rep = _report(args, args.x, args.y)
    x = codec.decode_spectrum(codec.read(args.x))
    y = codec.decode_spectrum(codec.read(args.y))
    check = majorization_check(x, y, tol=tol)
    u = horn_unitary(x, y, tol=tol)
    _bound(rep, "unitarity", float(np.max(np.abs(u.T @ u - np.eye(u.shape[0])))), 1e-9)
    _bound(rep, "map", float(np.max(np.abs((u**2) @ check.rhs - check.lhs))), 1e-9)
    rep.details["unitary"] = codec.encode_matrix(u)
    return rep


# -- mix ---------------------------------------------------------------------


def cmd_mix_verify(args):
    tol = _tol(args)
    rep = _report(args, args.ensemble)
    rep.add_check("", verify_static_constraints(_load_ensemble(args.ensemble, tol), tol=tol))
    return rep


def cmd_mix_converse(args):
    tol = _tol(args)
    rep = _report(args, args.rho, args.targets)
    rho = _load_rho(args.rho, tol)
    p, spectra = codec.decode_spectral_targets(codec.read(args.targets))
    real = converse_mixture(rho, SpectralTargetEnsemble(p, spectra, tol), tol=tol)
    recon = sum(w * s for w, s in zip(real.weights, real.states))
    _bound(rep, "reconstruction", float(np.max(np.abs(recon - rho))), 1e-9)
    rep.details["realization"] = {
        "labels": [codec.encode_label(lab) for lab in real.labels],
        **codec.encode_ensemble(real.weights, real.states),
    }
    return rep


# -- meas --------------------------------------------------------------------


def cmd_meas_verify(args):
    tol = _tol(args)
    rep = _report(args, args.rho, args.measurement)
    rep.add_check("", verify_dynamic_constraints(_load_measurement(args.measurement), _load_rho(args.rho, tol), tol=tol))
    return rep


def cmd_meas_converse(args):
    tol = _tol(args)
    rep = _report(args, args.rho, args.targets)
    rho = _load_rho(args.rho, tol)
    p, states = codec.decode_state_targets(codec.read(args.targets))
    m, table = converse_measurement(rho, p, states, tol=tol)
    _bound(rep, "completeness", m.completeness_residual(), 1e-9)
    err = 0.0
    for e, lab in zip(m.matrices, m.labels):
        target = 0.0 if lab == (0, 0) else table[lab] * np.asarray(states[lab[0] - 1])
        err = max(err, float(np.max(np.abs(e @ rho @ e.conj().T - target))))
    _bound(rep, "posteriors", err, 1e-9)
    rep.details["measurement"] = codec.encode_measurement(m.matrices, m.labels)
    rep.details["probabilities"] = {codec.encode_label(k): v for k, v in table.items()}
    return rep


def cmd_meas_dilate(args):
    rep = _report(args, args.measurement)
    m = _load_measurement(args.measurement)
    dil = dilate(m)
    u = dil.unitary
    _bound(rep, "unitarity", float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))), 1e-9)
    _bound(rep, "isometry", dil.residual(m), 1e-9)
    rep.details["unitary"] = codec.encode_matrix(u)
    rep.details["ancilla_dim"] = dil.ancilla_dim
    return rep


def cmd_meas_sample(args):
    tol = _tol(args)
    rep = _report(args, args.rho, args.measurement)
    counts = sample_outcomes(_load_measurement(args.measurement), _load_rho(args.rho, tol), args.seed, args.shots, tol)
    rep.details["seed"] = args.seed
    rep.details["shots"] = args.shots
    rep.details["counts"] = {codec.encode_label(k): v for k, v in counts.items()}
    return rep


# -- entropy -----------------------------------------------------------------


def cmd_entropy_mix(args):
    tol = _tol(args)
    rep = _report(args, args.ensemble)
    _add_entropy(rep, mixing_entropy_report(_load_ensemble(args.ensemble, tol), tol))
    return rep


def cmd_entropy_meas(args):
    tol = _tol(args)
    rep = _report(args, args.rho, args.measurement)
    _add_entropy(rep, measurement_entropy_report(_load_measurement(args.measurement), _load_rho(args.rho, tol), tol))
    return rep


# -- ent ---------------------------------------------------------------------


def cmd_ent_check(args):
    tol = _tol(args)
    rep = _report(args, args.psi, args.phi)
    psi = codec.decode_bipartite(codec.read(args.psi))
    phi = codec.decode_bipartite(codec.read(args.phi))
    check = majorization_check(schmidt(psi).coefficients, schmidt(phi).coefficients, tol=tol)
    rep.add_check("nielsen", check)
    return rep


def cmd_ent_ensemble_check(args):
    tol = _tol(args)
    rep = _report(args, args.psi, args.targets)
    psi = codec.decode_bipartite(codec.read(args.psi))
    p, states = codec.decode_bipartite_targets(codec.read(args.targets))
    avg = weighted_spectrum_sum(p, [schmidt(s).coefficients for s in states], tol)
    rep.add_check("ensemble", majorization_check(schmidt(psi).coefficients, avg, tol=tol))
    return rep


def cmd_ent_plan(args):
    tol = _tol(args)
    rep = _report(args, args.psi, args.targets)
    psi = codec.decode_bipartite(codec.read(args.psi))
    p, states = codec.decode_bipartite_targets(codec.read(args.targets))
    plan = build_protocol(psi, (p, states), tol)
    _bound(rep, "completeness", plan.alice.completeness_residual(), 1e-9)
    dist = outcome_distribution(psi, plan)
    err = max(abs(dist[k] - plan.outcome_probs.get(k, 0.0)) for k in dist)
    _bound(rep, "outcome_probabilities", err, 1e-9)
    payload = codec.encode_plan(plan)
    if args.plan_out:
        codec.write(args.plan_out, payload)
        rep.details["plan_file"] = str(args.plan_out)
    else:
        rep.details["plan"] = payload
    return rep


def cmd_ent_run(args):
    rep = _report(args, args.psi, args.plan)
    psi = codec.decode_bipartite(codec.read(args.psi))
    plan = codec.decode_plan(codec.read(args.plan))
    label, out = execute_protocol(psi, plan, args.seed)
    target = plan.target_of(label)
    rep.details["seed"] = args.seed
    rep.details["outcome"] = codec.encode_label(label)
    rep.details["state"] = codec.encode_bipartite(out)
    if target is not None:
        _bound(rep, "fidelity_gap", 1.0 - fidelity(out, target), 1e-9)
    return rep


# -- gen / suite -------------------------------------------------------------


def cmd_gen(args):
    docs = generate(args.kind, args.seed, args.count, tuple(args.dims), tuple(args.outcomes))
    rep = VerificationReport(f"gen {args.kind}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for k, doc in enumerate(docs):
            path = out / f"{args.kind}-{args.seed}-{k:04d}.json"
            path.write_text(doc)
            paths.append(str(path))
        rep.details["files"] = paths
    else:
        rep.details["instances"] = [codec.loads(d) for d in docs]
    return rep


def cmd_suite(args):
    result = run_suite(args.name, args.seed, args.count, _tol(args))
    rep = VerificationReport(f"suite {args.name}")
    rep.details["count"] = result.count
    rep.details["seed"] = result.seed
    rep.details["failures"] = result.failures
    rep.details["summary"] = result.summary()
    if result.count:
        rep.verdicts["all_instances"] = result.passed
        rep.slacks["all_instances"] = float(result.worst_slack)
        rep.residuals.update(result.worst_residuals())
    print(result.summary(), file=sys.stderr)
    return rep


# -- parser ------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=None, help="majorization slack tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qmaj", description="Majorization checks for mixing, measurement and LOCC.")
    parser.add_argument("--version", action="version", version=f"qmaj {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    def leaf(sub, name, func, help_, *positional):
        p = sub.add_parser(name, parents=[common], help=help_)
        for arg, h in positional:
            p.add_argument(arg, help=h)
        p.set_defaults(func=func)
        return p

    maj = groups.add_parser("maj", help="majorization of spectrum files").add_subparsers(dest="action", required=True)
    xy = (("x", "spectrum file"), ("y", "spectrum file"))
    leaf(maj, "check", cmd_maj_check, "test x ≺ y", *xy)
    leaf(maj, "decompose", cmd_maj_decompose, "T-transform chain and permutation mixture", *xy)
    leaf(maj, "horn", cmd_maj_horn, "orthostochastic realization of x ≺ y", *xy)

    mix = groups.add_parser("mix", help="mixing of density matrices").add_subparsers(dest="action", required=True)
    leaf(mix, "verify", cmd_mix_verify, "check both mixing relations", ("ensemble", "ensemble file"))
    leaf(mix, "converse", cmd_mix_converse, "states with given spectra mixing to rho",
         ("rho", "matrix file"), ("targets", "spectral targets file"))

    meas = groups.add_parser("meas", help="generalized measurements").add_subparsers(dest="action", required=True)
    rho_m = (("rho", "matrix file"), ("measurement", "measurement file"))
    leaf(meas, "verify", cmd_meas_verify, "check the measurement relations", *rho_m)
    leaf(meas, "converse", cmd_meas_converse, "measurement with prescribed posteriors",
         ("rho", "matrix file"), ("targets", "state targets file"))
    leaf(meas, "dilate", cmd_meas_dilate, "unitary dilation", ("measurement", "measurement file"))
    s = leaf(meas, "sample", cmd_meas_sample, "seeded outcome counts", *rho_m)
    s.add_argument("--shots", type=int, default=1000)

    ent_ = groups.add_parser("entropy", help="entropy inequalities").add_subparsers(dest="action", required=True)
    leaf(ent_, "mix", cmd_entropy_mix, "entropy inequalities for an ensemble", ("ensemble", "ensemble file"))
    leaf(ent_, "meas", cmd_entropy_meas, "entropy inequalities for a measurement", *rho_m)

    ent = groups.add_parser("ent", help="bipartite pure-state conversion").add_subparsers(dest="action", required=True)
    leaf(ent, "check", cmd_ent_check, "single-target conversion criterion",
         ("psi", "state file"), ("phi", "state file"))
    leaf(ent, "ensemble-check", cmd_ent_ensemble_check, "ensemble conversion criterion",
         ("psi", "state file"), ("targets", "bipartite targets file"))
    p = leaf(ent, "plan", cmd_ent_plan, "build an LOCC protocol",
             ("psi", "state file"), ("targets", "bipartite targets file"))
    p.add_argument("--plan-out", default=None, help="write the plan file here")
    leaf(ent, "run", cmd_ent_run, "execute a plan once", ("psi", "state file"), ("plan", "plan file"))

    g = groups.add_parser("gen", parents=[common], help="seeded random instances")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--dims", type=int, nargs=2, default=(1, 6), metavar=("LO", "HI"))
    g.add_argument("--outcomes", type=int, nargs=2, default=(1, 5), metavar=("LO", "HI"))
    g.add_argument("--out-dir", default=None, help="write one file per instance here")
    g.set_defaults(func=cmd_gen)

    st = groups.add_parser("suite", parents=[common], help="seeded property suite")
    st.add_argument("name", choices=sorted(SUITES))
    st.add_argument("--count", type=int, default=100)
    st.set_defaults(func=cmd_suite)
    return parser


def _emit(rep: VerificationReport, args) -> None:
    text = rep.to_json() + "\n" if args.format == "structured" else rep.to_text() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        rep = args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (QmajError, ConvergenceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(rep, args)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
