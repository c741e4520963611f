"""Converting a shared pure state into an ensemble of pure states.

Alice measures, tells Bob the outcome, and Bob applies a unitary. The
demo builds the plan, prints its outcome table and runs it a few times.
"""

from collections import Counter

import numpy as np

from qmaj.entanglement import build_protocol, execute_protocol, fidelity, outcome_distribution, schmidt
from qmaj.generators import entanglement_instance


def main(seed=4, dim_a=3, dim_b=3, n=2, runs=2000):
    rng = np.random.default_rng(seed)
    psi, p, targets = entanglement_instance(rng, dim_a, dim_b, n)
    print("source Schmidt coefficients:", np.round(schmidt(psi).coefficients, 4))
    for pi, t in zip(p, targets):
        print(f"  target p={pi:.3f} Schmidt {np.round(schmidt(t).coefficients, 4)}")

    plan = build_protocol(psi, (p, targets))
    print("\noutcome  probability")
    for label, prob in outcome_distribution(psi, plan).items():
        print(f"  {label}   {prob:.4f}")

    counts = Counter()
    worst = 1.0
    for s in range(runs):
        label, state = execute_protocol(psi, plan, s)
        counts[label[0]] += 1
        worst = min(worst, fidelity(state, plan.target_of(label)))
    print(f"\n{runs} runs, worst target fidelity {worst:.12f}")
    for i, pi in enumerate(p, start=1):
        print(f"  target {i}: frequency {counts[i] / runs:.3f} vs p={pi:.3f}")


if __name__ == "__main__":
    main()
