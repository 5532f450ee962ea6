"""Derive embedded estimator weights from the order conditions of the intermediate outputs."""

import numpy as np

from embsplit.estgen import InfeasibleSystemError, assemble_system, count_conditions, derive_weights, verify_order
from embsplit.opalg import Family
from embsplit.schemes import SUZUKI_ALPHAS, MCLACHLAN_ALPHAS, ss_scheme, symmetric_pairs

print("conditions per order (beyond the trivial one):")
for fam in Family:
    print(f"  {fam.value:14s}", [count_conditions(fam, L) for L in range(1, 7)])

# Suzuki's 5-stage composition: with the symmetric template w_j = w_{5-j} the
# third-order system has exactly one solution.
suz = ss_scheme(SUZUKI_ALPHAS, 4)
system = assemble_system(suz, 3)
print("\nrows of the order-3 system:", ["".join(w) or "I" for w in system.words])
ew = derive_weights(suz, 3, symmetric_pairs(5, 5))
print("Suzuki weights:", np.array2string(ew.w, precision=12))
print("verified estimator order:", verify_order(suz, ew).estimator_orders[0])

# Asking for one order more fails: no combination of the outputs reaches it.
try:
    derive_weights(suz, 4, symmetric_pairs(5, 5))
except InfeasibleSystemError as exc:
    print("order 4:", exc)

# McLachlan's 7-stage method leaves a free parameter; the solver returns the
# minimal-norm member and reports the nullspace dimension.
mcl = ss_scheme(MCLACHLAN_ALPHAS, 4)
ew = derive_weights(mcl, 3, symmetric_pairs(7, 7))
print("\nMcLachlan weights:", np.array2string(ew.w, precision=6), "free parameters:", ew.nullspace_dim)

# Pins fix chosen weights; here w_3 is forced to zero instead.
pinned = derive_weights(mcl, 3, symmetric_pairs(7, 7), {3: 0.0})
print("with w_3 = 0:     ", np.array2string(pinned.w, precision=6))
