"""Spectral relations are necessary but not sufficient.

Both fixtures satisfy every majorization relation, yet a search over all
two-component realizations finds nothing.
"""

from qmaj.measurement import kempe_measurement_infeasibility
from qmaj.mixing import kempe_mixing_counterexample


def show(title, fixture):
    print(title)
    for name, check in fixture.checks.items():
        print(f"  {name:<30s} holds={check.holds}")
    print(f"  best search residual {fixture.min_residual:.4f} (tolerance {fixture.tolerance:.0e})")
    print(f"  certified infeasible: {fixture.certified}")
    for key, value in fixture.notes.items():
        print(f"  {key}: {value}")


def main():
    show("mixing: two states mixing to diag(5/12, 7/12)", kempe_mixing_counterexample())
    show("\nmeasurement: two outcomes with prescribed posteriors", kempe_measurement_infeasibility())


if __name__ == "__main__":
    main()
