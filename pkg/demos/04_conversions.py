"""Moving between method-adjoint, splitting and Strang-composition forms."""

import numpy as np

from embsplit.estgen import verify_order
from embsplit.schemes import (
    METHOD_ADJOINT_ALPHAS,
    RKN6_A,
    RKN6_B,
    SUZUKI_ALPHAS,
    methodadjoint_from_splitting,
    replicate_halved,
    splitting_from_methodadjoint,
    splitting_from_ss,
    splitting_scheme,
    ss_scheme,
)

a, b = splitting_from_methodadjoint(METHOD_ADJOINT_ALPHAS)
print("a from the method-adjoint coefficients:", np.array2string(np.array(a), precision=15))
print("max difference to the RKN table:", max(np.abs(np.subtract(a, RKN6_A)).max(), np.abs(np.subtract(b, RKN6_B)).max()))
print("roundtrip error:", np.abs(np.subtract(methodadjoint_from_splitting(a, b), METHOD_ADJOINT_ALPHAS)).max())

# Expanding each Strang stage and merging neighbouring kicks gives an 11-flow splitting.
a, b = splitting_from_ss(SUZUKI_ALPHAS, "BAB")
sp = splitting_scheme(a, b, 4)
print("\nSuzuki as a splitting:", sp.n_stages, "flows, order", verify_order(sp).main_order)

# Two half steps of the triple jump used as a single 6-stage method.
a1 = 1 / (2 - 2 ** (1 / 3))
tj2 = replicate_halved(ss_scheme((a1, 1 - 2 * a1, a1), 4), 2)
print("doubled triple jump coefficients:", np.round(tj2.coefficients, 6))
