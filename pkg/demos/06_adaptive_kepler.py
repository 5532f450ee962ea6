"""Step-size control driven by the embedded estimate."""

import numpy as np

from embsplit.bench import run_adaptive_sweep
from embsplit.problems import kepler_flows, kepler_init
from embsplit.schemes import get_method
from embsplit.stepper import ControllerConfig, integrate_adaptive

print("SS11-6(5), e = 0.4")
for r in run_adaptive_sweep("SS11-6(5)", 0.4, [1e-5, 1e-6, 1e-7, 1e-8, 1e-9]):
    print(f"  tol {r.tol:.0e}: error {r.E1_full:.2e}, {r.nsteps} steps, {r.rejected} rejected, {r.fevals} kicks")

# Near pericentre the controller shrinks the step; on a circle it settles to a constant.
m = get_method("SS17-8(5)(3)")
for e in (0.0, 0.8):
    traj, rec = integrate_adaptive(m, kepler_flows(), kepler_init(e).vector, 0.0, 20.0, ControllerConfig(1e-8))
    h = traj.h[:-1]
    print(f"\nSS17-8(5)(3), e={e}: h from {h.min():.3g} to {h.max():.3g}, spread {np.std(h) / np.mean(h):.2e}")
