"""The method catalog and a grade-by-grade order check of every entry."""

from embsplit.estgen import verify_order
from embsplit.problems import kepler_flows
from embsplit.schemes import catalog

cost = kepler_flows().cost
print(f"{'method':14s} {'stages':>6} {'kicks':>5}  main  estimators")
for m in catalog():
    rep = verify_order(m.scheme, list(m.estimators))
    est = ",".join(str(o) for o in rep.estimator_orders)
    print(f"{m.name:14s} {m.n_stages:6d} {m.fevals_per_step(cost):5d}  {rep.main_order:4d}  {est}")

m = catalog()[4]
rep = verify_order(m.scheme, list(m.estimators), max_grade=9)
print(f"\n{m.name} residual by grade:")
for g, r in enumerate(rep.main_residuals):
    print(f"  grade {g}: main {r:.1e}  " + "  ".join(f"est{o} {res[g]:.1e}" for o, res in
                                                    zip(m.estimator_orders, rep.estimator_residuals)))
