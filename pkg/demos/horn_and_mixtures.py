"""Three certificates for one majorization pair.

A T-transform chain, a mixture of permutations and an orthostochastic
matrix all map y onto x when x ≺ y.
"""

import numpy as np

from qmaj.generators import planted_pair
from qmaj.majorization import horn_unitary, majorization_check, permutation_mixture, t_transform_chain


def main(seed=3, d=5):
    rng = np.random.default_rng(seed)
    x, y = planted_pair(rng, d)
    check = majorization_check(x, y)
    print("x =", np.round(check.lhs, 4))
    print("y =", np.round(check.rhs, 4))
    print("x ≺ y:", check.holds, " slacks:", np.round(check.slacks, 4))

    chain = t_transform_chain(x, y)
    print(f"\nT-transform chain with {len(chain.steps)} steps (at most {d - 1}):")
    for t, j, k in chain.steps:
        print(f"  mix coordinates {j + 1} and {k + 1} with t = {t:.4f}")

    mixture = permutation_mixture(x, y)
    print(f"\n{len(mixture.weights)} permutations, residual {mixture.residual:.1e}")
    for w, perm in zip(mixture.weights, mixture.permutations):
        print(f"  {w:.4f} x {tuple(p + 1 for p in perm)}")

    u = horn_unitary(x, y)
    print("\northostochastic matrix |u_ij|^2:")
    print(np.round(u**2, 4))
    print("map residual:", float(np.max(np.abs((u**2) @ check.rhs - check.lhs))))


if __name__ == "__main__":
    main()
