"""Fixed-step Kepler runs: true error, embedded estimate and energy behaviour."""

import math

import numpy as np

from embsplit.problems import kepler_energy, kepler_exact_states, kepler_flows, kepler_init
from embsplit.schemes import get_method
from embsplit.stepper import integrate_fixed

flows = kepler_flows()
for name in ("SS11-6(5)", "SS17-8(5)(3)", "PRK6-4(3)"):
    m = get_method(name)
    for e in (0.2, 0.6):
        traj, rec = integrate_fixed(m, flows, kepler_init(e).vector, 0.02, 0.0, 20.0)
        err = np.linalg.norm(traj.x - kepler_exact_states(e, traj.t), axis=1).max()
        print(f"{name:14s} e={e}: true error {err:.2e}  estimate {rec.E2:.2e}  kicks {rec.fevals}")

# A symplectic method keeps the energy error bounded over long runs.
h = 2 * math.pi / 500
traj, _ = integrate_fixed(get_method("SS5-4(3)"), flows, kepler_init(0.2).vector, h, 0.0, 10_000 * h)
dH = np.abs(kepler_energy(traj.x) + 0.5)
print(f"\nSuzuki, 10^4 steps: max |H - H0| first half {dH[:5001].max():.2e}, second half {dH[5000:].max():.2e}")
