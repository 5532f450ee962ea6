"""Kepler work-precision scans, convergence fits and adaptive tolerance sweeps."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .problems import kepler_energy, kepler_exact_states, kepler_flows, kepler_init
from .schemes import EmbeddedMethod, get_method
from .stepper import (
    ControllerAbort,
    ControllerConfig,
    FlowError,
    FlowSet,
    RunRecord,
    apply_estimator,
    integrate_adaptive,
    integrate_fixed,
    step_with_stages,
)

CSV_COLUMNS = ("method", "e", "h", "nsteps", "fevals", "E1_full", "E1_pos", "E2", "E2_low", "energy_drift")
ADAPTIVE_COLUMNS = ("method", "e", "tol", "nsteps", "rejected", "fevals", "E1_full", "E1_pos", "E2", "status")
DEFAULT_ECCENTRICITIES = (0.2, 0.4, 0.6, 0.8)
ORDER_WINDOW = (1e-10, 1e-3)


@dataclass(frozen=True)
class ScanConfig:
    methods: tuple[str, ...]
    eccentricities: tuple[float, ...] = DEFAULT_ECCENTRICITIES
    h_values: tuple[float, ...] = ()
    t_end: float = 20.0
    strang: str = "BAB"
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.h_values:
            raise ValueError("no step sizes given")
        for h in self.h_values:
            if not h > 0:
                raise ValueError(f"step sizes must be positive, got {h}")
            if h > self.t_end * (1 + 1e-12):
                raise ValueError(f"h={h} exceeds t_end={self.t_end}: no steps")


def geometric_steps(t_end: float, n_min: int, n_max: int, per_octave: int = 2) -> tuple[float, ...]:
    """Step sizes ``t_end / n`` with ``n`` spaced geometrically, so runs end exactly on ``t_end``."""
    ks = np.arange(0, int(math.floor(per_octave * math.log2(n_max / n_min))) + 1)
    ns = sorted({int(round(n_min * 2 ** (k / per_octave))) for k in ks})
    return tuple(t_end / n for n in ns)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def kepler_run(method: EmbeddedMethod | str, e: float, h: float, t_end: float = 20.0, strang: str = "BAB") -> RunRecord:
    """One fixed-step Kepler run with true-error, estimate and energy metrics."""
    if isinstance(method, str):
        method = get_method(method)
    flows = kepler_flows(1.0, strang)
    x0 = kepler_init(e).vector
    try:
        traj, rec = integrate_fixed(method, flows, x0, h, 0.0, t_end)
    except (FlowError, ZeroDivisionError, FloatingPointError) as exc:
        return RunRecord(method.name, e=e, h=h, status=f"failed: {exc}")
    exact = kepler_exact_states(e, traj.t)
    diff = traj.x - exact
    rec.E1_full = float(np.linalg.norm(diff, axis=1).max())
    rec.E1_pos = float(np.linalg.norm(diff[:, :2], axis=1).max())
    rec.energy_drift = float(np.max(np.abs(kepler_energy(traj.x) + 0.5)))
    rec.e = e
    return rec


def _scan_job(args):
    return kepler_run(*args)


def run_scan(cfg: ScanConfig) -> list[RunRecord]:
    jobs = [(m, e, h, cfg.t_end, cfg.strang) for m in cfg.methods for e in cfg.eccentricities for h in cfg.h_values]
    for m in cfg.methods:
        get_method(m)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            records = list(ex.map(_scan_job, jobs))
    else:
        records = [_scan_job(j) for j in jobs]
    if cfg.out:
        write_scan_csv(cfg.out, records)
    return records


def write_scan_csv(path, records: Iterable[RunRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = asdict(r)
            if r.status != "ok":
                row.update(nsteps=None, fevals=None)
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def read_scan_csv(path) -> list[RunRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for c in CSV_COLUMNS[1:]:
                v = row.get(c, "")
                if v == "":
                    kw[c] = None
                elif c in ("nsteps", "fevals"):
                    kw[c] = int(v)
                else:
                    kw[c] = float(v)
            status = "ok" if kw.get("E1_full") is not None else "failed"
            out.append(RunRecord(row["method"], status=status, **kw))
    return out


@dataclass(frozen=True)
class OrderFit:
    slope: float
    residual: float
    n_points: int


def fit_order(
    records: Sequence[RunRecord],
    window: tuple[float, float] = ORDER_WINDOW,
    metric: str = "E1_full",
) -> OrderFit:
    """Least-squares slope of log(error) against log(h) over records inside ``window``."""
    pts = [
        (r.h, getattr(r, metric))
        for r in records
        if r.h and getattr(r, metric) is not None and window[0] <= getattr(r, metric) <= window[1]
    ]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points with {metric} in {window}, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(res[0] / len(pts))) if len(res) else 0.0
    return OrderFit(float(coef[0]), rms, len(pts))


def fit_orders_by_group(records: Sequence[RunRecord], metric: str = "E1_full", window=ORDER_WINDOW):
    groups: dict[tuple[str, float | None], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.e), []).append(r)
    out = {}
    for key, recs in groups.items():
        try:
            out[key] = fit_order(recs, window, metric)
        except ValueError:
            out[key] = None
    return out


def estimator_local_slopes(
    method: EmbeddedMethod,
    flows: FlowSet,
    x0,
    hs: Sequence[float],
    floor_factor: float = 10.0,
) -> list[tuple[int, float | None, np.ndarray]]:
    """One-step slope of ``|x_est - x_next|`` against ``h`` for each estimator.

    Points at or below ``floor_factor * eps * sum|w| * |x0|`` are treated as
    roundoff and dropped; at least two points are needed for a slope.
    """
    x0 = np.asarray(x0, dtype=float)
    hs = np.asarray(hs, dtype=float)
    results = [step_with_stages(method, flows, x0, h) for h in hs]
    out = []
    for est in method.estimators:
        d = np.array([np.linalg.norm(apply_estimator(est, r) - r.x_next) for r in results])
        floor = floor_factor * np.finfo(float).eps * np.abs(est.w).sum() * np.linalg.norm(x0)
        keep = d > floor
        # stop at the first point that falls under the floor
        if not keep.all():
            keep[np.argmin(keep):] = False
        slope = None
        if keep.sum() >= 2:
            slope = float(np.polyfit(np.log(hs[keep]), np.log(d[keep]), 1)[0])
        out.append((est.order, slope, d))
    return out


def run_adaptive_sweep(
    method: EmbeddedMethod | str,
    e: float,
    tols: Sequence[float],
    t_end: float = 20.0,
    strang: str = "BAB",
    out: str | None = None,
    **controller,
) -> list[RunRecord]:
    if isinstance(method, str):
        method = get_method(method)
    if not method.estimators:
        raise ValueError(f"method {method.name} has no estimator")
    flows = kepler_flows(1.0, strang)
    x0 = kepler_init(e).vector
    records = []
    for tol in tols:
        cfg = ControllerConfig(tol=tol, **controller)
        try:
            traj, rec = integrate_adaptive(method, flows, x0, 0.0, t_end, cfg)
        except ControllerAbort as exc:
            records.append(RunRecord(method.name, e=e, tol=tol, status=f"aborted: {exc}"))
            continue
        except FlowError as exc:
            records.append(RunRecord(method.name, e=e, tol=tol, status=f"failed: {exc}"))
            continue
        diff = traj.x - kepler_exact_states(e, traj.t)
        rec.E1_full = float(np.linalg.norm(diff, axis=1).max())
        rec.E1_pos = float(np.linalg.norm(diff[:, :2], axis=1).max())
        rec.energy_drift = float(np.max(np.abs(kepler_energy(traj.x) + 0.5)))
        rec.e = e
        records.append(rec)
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(ADAPTIVE_COLUMNS)
            for r in records:
                row = asdict(r)
                w.writerow([_fmt(row[c]) for c in ADAPTIVE_COLUMNS])
    return records
