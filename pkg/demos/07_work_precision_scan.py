"""Scan step sizes on Kepler, write the CSV and fit convergence orders."""

import sys
import tempfile
from pathlib import Path

from embsplit.bench import ScanConfig, fit_orders_by_group, geometric_steps, read_scan_csv, run_scan

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.gettempdir()) / "kepler_scan.csv"
cfg = ScanConfig(
    methods=("SS5-4(3)", "SS11-6(5)", "SS17-8(5)(3)", "PRK6-4(3)"),
    eccentricities=(0.2, 0.6),
    h_values=geometric_steps(20.0, 25, 1600),
    out=str(out),
)
records = run_scan(cfg)
print(f"{len(records)} runs written to {out}")

for (name, e), fit in fit_orders_by_group(read_scan_csv(out)).items():
    slope = "n/a" if fit is None else f"{fit.slope:.2f}"
    print(f"  {name:14s} e={e}: fitted order {slope}")

# Estimate against truth for the smallest steps in the window.
for r in records:
    if r.E1_pos and 1e-9 <= r.E1_pos <= 1e-6 and r.e == 0.2:
        print(f"  {r.method:14s} h={r.h:.4f}: E2/E1 = {r.E2 / r.E1_pos:.2f}")
