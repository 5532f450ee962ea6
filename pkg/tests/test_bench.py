import csv

import numpy as np
import pytest

from embsplit.bench import (
    CSV_COLUMNS,
    ScanConfig,
    estimator_local_slopes,
    fit_order,
    fit_orders_by_group,
    geometric_steps,
    kepler_run,
    read_scan_csv,
    run_adaptive_sweep,
    run_scan,
)
from embsplit.problems import harmonic_flows, kepler_exact_states, kepler_flows, kepler_init
from embsplit.schemes import get_method
from embsplit.stepper import RunRecord, integrate_fixed


def test_default_eccentricities():
    cfg = ScanConfig(("SS5-4(3)",), h_values=(0.1,))
    assert cfg.eccentricities == (0.2, 0.4, 0.6, 0.8)
    assert cfg.t_end == 20.0


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(("SS5-4(3)",), h_values=(30.0,))
    with pytest.raises(ValueError):
        ScanConfig(("SS5-4(3)",), h_values=(-0.1,))
    with pytest.raises(ValueError):
        ScanConfig(("SS5-4(3)",), h_values=())
    with pytest.raises(ValueError):
        ScanConfig(("SS5-4(3)",), h_values=(0.1,), t_end=0.0)


def test_unknown_method_fails_fast():
    with pytest.raises(KeyError):
        run_scan(ScanConfig(("nope",), (0.2,), (0.1,)))


def test_geometric_steps_land_on_t_end():
    hs = geometric_steps(20.0, 25, 400)
    ns = [round(20.0 / h) for h in hs]
    assert ns[0] == 25 and ns[-1] == 400
    assert all(20.0 / h == pytest.approx(n) for h, n in zip(hs, ns))


def test_scan_matches_direct_run():
    m = get_method("SS11-6(5)")
    rec = run_scan(ScanConfig((m.name,), (0.4,), (0.2,), t_end=4.0))[0]
    traj, direct = integrate_fixed(m, kepler_flows(), kepler_init(0.4).vector, 0.2, 0.0, 4.0)
    assert rec.E2 == direct.E2
    assert rec.fevals == direct.fevals == 20 * 22
    diff = traj.x - kepler_exact_states(0.4, traj.t)
    assert rec.E1_full == np.linalg.norm(diff, axis=1).max()
    assert rec.E1_pos <= rec.E1_full


def test_csv_is_deterministic(tmp_path):
    cfg = dict(methods=("SS5-4(3)", "SS17-8(5)(3)"), eccentricities=(0.2,), h_values=(0.5, 0.25), t_end=2.0)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_scan(ScanConfig(out=str(a), **cfg))
    run_scan(ScanConfig(out=str(b), workers=2, **cfg))
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open(encoding="utf-8")))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[0] for r in rows[1:]] == ["SS5-4(3)"] * 2 + ["SS17-8(5)(3)"] * 2
    # E2_low only for the dual-estimator method
    assert rows[1][8] == "" and rows[3][8] != ""
    recs = read_scan_csv(a)
    assert recs[0].E1_full == float(rows[1][5])


def test_failed_row_does_not_stop_scan(tmp_path, monkeypatch):
    import embsplit.bench as bench
    from embsplit.stepper import FlowError

    real = bench.integrate_fixed

    def flaky(method, flows, x0, *args, **kwargs):
        if x0[0] < 0.05:
            raise FlowError("non-finite state", stage=0, step=0)
        return real(method, flows, x0, *args, **kwargs)

    monkeypatch.setattr(bench, "integrate_fixed", flaky)
    out = tmp_path / "f.csv"
    recs = run_scan(ScanConfig(("SS5-4(3)",), (0.99, 0.2), (1.0,), t_end=2.0, out=str(out)))
    assert [r.status.split(":")[0] for r in recs] == ["failed", "ok"]
    rows = list(csv.reader(out.open(encoding="utf-8")))
    assert len(rows) == 3
    assert rows[1][:3] == ["SS5-4(3)", "0.98999999999999999", "1"] and rows[1][5] == ""
    assert read_scan_csv(out)[0].status == "failed"


def test_kepler_run_records_failure(monkeypatch):
    import embsplit.bench as bench
    from embsplit.stepper import FlowError

    def boom(*args, **kwargs):
        raise FlowError("non-finite state", stage=3, step=7)

    monkeypatch.setattr(bench, "integrate_fixed", boom)
    rec = kepler_run("SS5-4(3)", 0.2, 0.5, t_end=5.0)
    assert rec.status.startswith("failed")
    assert rec.E1_full is None


def test_fit_order_slopes():
    recs = run_scan(ScanConfig(("SS5-4(3)",), (0.2,), geometric_steps(20.0, 50, 800)))
    fit = fit_order(recs)
    assert fit.slope == pytest.approx(4.0, abs=0.3)
    assert fit.n_points >= 3


def test_fit_order_rejects_roundoff_only():
    # errors all at roundoff level sit below the window
    recs = [RunRecord("exact", e=0.2, h=h, E1_full=1e-16) for h in (0.1, 0.05, 0.025)]
    with pytest.raises(ValueError):
        fit_order(recs)
    assert fit_orders_by_group(recs) == {("exact", 0.2): None}


def test_fit_order_exact_power_law():
    hs = [0.1, 0.05, 0.025, 0.0125]
    recs = [RunRecord("m", h=h, E1_full=3.0 * h**6) for h in hs]
    fit = fit_order(recs)
    assert fit.slope == pytest.approx(6.0, abs=1e-12)
    assert fit.residual < 1e-12


def test_estimator_local_slopes_kepler():
    m = get_method("SS11-6(5)")
    hs = 2.0 ** -np.arange(4, 10)
    (order, slope, diffs), = estimator_local_slopes(m, kepler_flows(), kepler_init(0.2).vector, hs)
    assert order == 5
    assert slope == pytest.approx(6.0, abs=0.3)
    assert diffs[0] > 1e4 * diffs[-1]


def test_local_slopes_drop_roundoff_points():
    m = get_method("SS5-4(3)")
    hs = 2.0 ** -np.arange(20, 24)
    (_, slope, _), = estimator_local_slopes(m, harmonic_flows(), [1.0, 0.0], hs)
    assert slope is None


def test_adaptive_sweep(tmp_path):
    out = tmp_path / "ad.csv"
    recs = run_adaptive_sweep("SS11-6(5)", 0.4, [1e-5, 1e-7], t_end=5.0, out=str(out))
    assert [r.status for r in recs] == ["ok", "ok"]
    assert recs[1].E1_full <= recs[0].E1_full
    assert recs[1].nsteps > recs[0].nsteps
    assert len(out.read_text(encoding="utf-8").splitlines()) == 3


def test_adaptive_sweep_loose_tolerance_on_circle():
    rec, = run_adaptive_sweep("SS11-6(5)", 0.0, [1e-2])
    assert rec.rejected == 0
    assert rec.nsteps < 25


def test_adaptive_sweep_circular_orbit_has_constant_step():
    from embsplit.stepper import ControllerConfig, integrate_adaptive

    m = get_method("SS11-6(5)")
    traj, _ = integrate_adaptive(m, kepler_flows(), kepler_init(0.0).vector, 0.0, 20.0, ControllerConfig(1e-8))
    h = traj.h[5:-1]
    assert h.std() / h.mean() < 1e-3


def test_adaptive_sweep_needs_estimator():
    from embsplit.schemes import build_method, ss_scheme

    with pytest.raises(ValueError):
        run_adaptive_sweep(build_method("plain", ss_scheme([1.0], 2), 2, []), 0.2, [1e-6])


def test_adaptive_abort_is_recorded():
    recs = run_adaptive_sweep("SS5-4(3)", 0.2, [1e-300], t_end=1.0, max_rejects=2)
    assert recs[0].status.startswith("aborted")
