"""Building a measurement with prescribed posterior states.

Pick a prior, a distribution of outcomes and posterior states whose
averaged spectrum dominates the prior's; the construction returns Kraus
operators realizing exactly that, and a unitary dilation of them.
"""

import numpy as np

from qmaj.generators import feasible_state_instance
from qmaj.linalg import eigenvalues
from qmaj.measurement import apply, converse_measurement, dilate, verify_dynamic_constraints


def main(seed=11, d=3, n=2):
    rng = np.random.default_rng(seed)
    rho, p, states = feasible_state_instance(rng, d, n)
    print("prior spectrum:", np.round(eigenvalues(rho), 4))
    for pi, s in zip(p, states):
        print(f"  target p={pi:.3f} spectrum {np.round(eigenvalues(s), 4)}")

    m, table = converse_measurement(rho, p, states)
    print(f"\n{len(m)} Kraus operators, completeness residual {m.completeness_residual():.1e}")
    for out in apply(m, rho):
        i = out.label[0]
        err = 0.0 if out.posterior is None else float(np.max(np.abs(out.posterior - states[i - 1])))
        print(f"  outcome {out.label}: probability {out.probability:.4f}, posterior error {err:.1e}")

    print("\nmeasurement relations hold:", verify_dynamic_constraints(m, rho).all_hold)
    dil = dilate(m)
    print(f"dilation: {dil.unitary.shape[0]}-dimensional unitary, residual {dil.residual(m):.1e}")


if __name__ == "__main__":
    main()
