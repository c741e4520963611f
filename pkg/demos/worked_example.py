"""Mixing two diagonal qubit states and checking both spectral relations.

Run with ``python demos/worked_example.py``.
"""

from fractions import Fraction

import numpy as np

from qmaj.entropy import mixing_entropy_report
from qmaj.linalg import eigenvalues
from qmaj.mixing import Ensemble, mix, verify_static_constraints


def main():
    ensemble = Ensemble([1 / 3, 2 / 3], [np.diag([0.75, 0.25]), np.diag([0.2, 0.8])])
    rho = mix(ensemble)
    lam = eigenvalues(rho)
    print("spectrum of the mixture:", [str(Fraction(v).limit_denominator(60)) for v in lam])

    report = verify_static_constraints(ensemble)
    for name, rel in report.relations.items():
        print(f"{name:<22s} holds={rel.holds}  partial-sum slacks={np.round(rel.slacks, 4)}")
    print("direct sum of weighted spectra (x60):", np.round(report.vectors["direct_sum"] * 60, 6))

    entropy = mixing_entropy_report(ensemble)
    print(f"S(rho) = {entropy.von_neumann:.4f} bits")
    for name, slack in entropy.slacks.items():
        print(f"  {name:<18s} slack {slack: .4f}")


if __name__ == "__main__":
    main()
