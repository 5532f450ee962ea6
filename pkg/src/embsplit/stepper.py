"""Run embedded schemes against exact sub-flows, with fixed and adaptive step drivers."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, TextIO

import numpy as np

from .estgen import EstimatorWeights, SchemeSpec
from .opalg import Role
from .schemes import EmbeddedMethod

Flow = Callable[[float, np.ndarray], np.ndarray]


class FlowError(RuntimeError):
    """A flow produced a non-finite state."""

    def __init__(self, message: str, stage: int | None = None, step: int | None = None):
        super().__init__(message)
        self.stage = stage
        self.step = step


class ControllerAbort(RuntimeError):
    pass


class ErrorNorm(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    MAX = "max"
    POSITIONS = "positions_only_euclidean"


@dataclass(frozen=True)
class FlowSet:
    """Exact (or basic) flows keyed by stage role, with a force-evaluation cost per application."""

    dim: int
    flows: Mapping[Role, Flow]
    cost: Mapping[Role, int] = field(default_factory=dict)
    positions: slice | None = None

    def __getitem__(self, role: Role) -> Flow:
        try:
            return self.flows[Role(role)]
        except KeyError:
            raise KeyError(f"flow set provides no evaluator for role {Role(role).value}") from None

    def supports(self, scheme: SchemeSpec) -> bool:
        return all(r in self.flows for r, _ in scheme.stages)

    def step_cost(self, scheme: SchemeSpec) -> int:
        return int(sum(self.cost.get(r, 0) for r, _ in scheme.stages))


@dataclass(frozen=True)
class StepResult:
    x_next: np.ndarray
    stages: np.ndarray
    fevals: int


@dataclass(frozen=True)
class ControllerConfig:
    tol: float
    fac: float = 0.9
    facmin: float = 0.2
    facmax: float = 5.0
    h_init: float | None = None
    max_rejects: int = 20
    error_norm: ErrorNorm = ErrorNorm.EUCLIDEAN
    exponent: float | None = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        object.__setattr__(self, "error_norm", ErrorNorm(self.error_norm))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.facmin < 1 < self.facmax:
            raise ValueError("need 0 < facmin < 1 < facmax")
        if not 0 < self.fac <= 1:
            raise ValueError("fac must lie in (0, 1]")
        if self.h_init is not None and not self.h_init > 0:
            raise ValueError("h_init must be positive")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    h: np.ndarray
    err: np.ndarray
    est_diffs: np.ndarray


@dataclass
class RunRecord:
    method: str
    nsteps: int = 0
    fevals: int = 0
    rejected: int = 0
    E2: float | None = None
    E2_low: float | None = None
    E1_full: float | None = None
    E1_pos: float | None = None
    energy_drift: float | None = None
    e: float | None = None
    h: float | None = None
    tol: float | None = None
    final_step_adjusted: bool = False
    status: str = "ok"


def _as_scheme(method: EmbeddedMethod | SchemeSpec) -> SchemeSpec:
    return method.scheme if isinstance(method, EmbeddedMethod) else method


def step_with_stages(method: EmbeddedMethod | SchemeSpec, flows: FlowSet, x, h: float) -> StepResult:
    """Apply every stage flow in order, keeping the state before each stage."""
    scheme = _as_scheme(method)
    state = np.array(x, dtype=float)
    stages = np.empty((scheme.n_outputs, state.size))
    fevals = 0
    for k, (role, c) in enumerate(scheme.stages):
        stages[k] = state
        state = np.asarray(flows[role](c * h, state), dtype=float)
        fevals += flows.cost.get(role, 0)
        if not np.all(np.isfinite(state)):
            raise FlowError(f"non-finite state after stage {k} ({role.value})", stage=k)
    return StepResult(state, stages, fevals)


def apply_estimator(weights: EstimatorWeights | Sequence[float], result: StepResult) -> np.ndarray:
    w = weights.w if isinstance(weights, EstimatorWeights) else np.asarray(weights, dtype=float)
    if len(w) != len(result.stages):
        raise ValueError(f"{len(w)} weights for {len(result.stages)} stage outputs")
    return w @ result.stages


def combined_error(err5: float, err3: float) -> float:
    """Blend a higher- and a lower-order estimate into one of the main method's order."""
    if err5 < 0 or err3 < 0:
        raise ValueError("error estimates must be nonnegative")
    if err5 == 0:
        return 0.0
    # err5^2 / sqrt(err5^2 + 0.01 err3^2), arranged to avoid underflow
    r = err3 / err5
    return err5 / math.sqrt(1.0 + 0.01 * r * r)


def error_norm(v: np.ndarray, kind: ErrorNorm | str = ErrorNorm.EUCLIDEAN, positions: slice | None = None) -> float:
    kind = ErrorNorm(kind)
    if kind is ErrorNorm.MAX:
        return float(np.max(np.abs(v)))
    if kind is ErrorNorm.POSITIONS:
        if positions is None:
            raise ValueError("positions-only norm needs the flow set's position slice")
        v = v[..., positions]
    return float(np.linalg.norm(v))


def _ordered_estimators(method: EmbeddedMethod) -> list[EstimatorWeights]:
    return sorted(method.estimators, key=lambda e: -e.order)


def step_error(method: EmbeddedMethod, result: StepResult, kind=ErrorNorm.EUCLIDEAN, positions=None):
    """Controller error and per-estimator differences, highest estimator order first."""
    ests = _ordered_estimators(method)
    diffs = [error_norm(apply_estimator(e, result) - result.x_next, kind, positions) for e in ests]
    if not diffs:
        raise ValueError(f"method {method.name} has no estimator")
    err = combined_error(diffs[0], diffs[-1]) if len(diffs) >= 2 else diffs[0]
    return err, diffs


def controller_exponent(method: EmbeddedMethod, cfg: ControllerConfig | None = None) -> float:
    if cfg is not None and cfg.exponent is not None:
        return cfg.exponent
    if len(method.estimators) >= 2:
        return 1.0 / method.main_order
    return 1.0 / (min(method.estimator_orders) + 1)


def _step_count(span: float, h: float) -> tuple[int, float | None]:
    ratio = span / h
    n = round(ratio)
    if n >= 1 and abs(ratio - n) <= 64 * np.spacing(max(ratio, 1.0)):
        return n, None
    n = math.floor(ratio)
    last = span - n * h
    return n + 1, last


class _CsvSink:
    def __init__(self, handle: TextIO | None, dim: int):
        self.writer = None
        if handle is not None:
            self.writer = csv.writer(handle)
            self.writer.writerow(["t", *[f"x{i}" for i in range(dim)], "err", "h"])

    def write(self, t, x, err, h):
        if self.writer is not None:
            self.writer.writerow([repr(float(t)), *(repr(float(v)) for v in x), repr(float(err)), repr(float(h))])


def integrate_fixed(
    method: EmbeddedMethod,
    flows: FlowSet,
    x0,
    h: float,
    t0: float,
    t_end: float,
    error_norm_kind: ErrorNorm | str = ErrorNorm.EUCLIDEAN,
    sink: TextIO | None = None,
) -> tuple[Trajectory, RunRecord]:
    """Constant-step run; a final partial step is taken if ``(t_end - t0)/h`` is not an integer."""
    if not h > 0:
        raise ValueError("h must be positive")
    span = t_end - t0
    nsteps, last = _step_count(span, h)
    if nsteps < 1 or span <= 0:
        raise ValueError("configuration yields no steps")
    x = np.array(x0, dtype=float)
    n_est = len(method.estimators)
    ts = np.empty(nsteps + 1)
    xs = np.empty((nsteps + 1, x.size))
    hs = np.empty(nsteps)
    errs = np.empty(nsteps)
    diffs = np.empty((nsteps, n_est))
    ts[0], xs[0] = t0, x
    out = _CsvSink(sink, x.size)
    out.write(t0, x, 0.0, 0.0)
    fevals = 0
    for n in range(nsteps):
        hn = last if (last is not None and n == nsteps - 1) else h
        try:
            res = step_with_stages(method, flows, x, hn)
        except FlowError as exc:
            exc.step = n
            raise
        fevals += res.fevals
        if n_est:
            err, d = step_error(method, res, error_norm_kind, flows.positions)
            diffs[n] = d
        else:
            err = 0.0
        x = res.x_next
        ts[n + 1] = t0 + span if n == nsteps - 1 else t0 + (n + 1) * h
        xs[n + 1] = x
        hs[n] = hn
        errs[n] = err
        out.write(ts[n + 1], x, err, hn)
    rec = RunRecord(
        method.name,
        nsteps=nsteps,
        fevals=fevals,
        h=h,
        final_step_adjusted=last is not None,
    )
    if n_est:
        rec.E2 = float(errs.max())
        if n_est >= 2:
            rec.E2_low = float(diffs[:, -1].max())
    return Trajectory(ts, xs, hs, errs, diffs), rec


def integrate_adaptive(
    method: EmbeddedMethod,
    flows: FlowSet,
    x0,
    t0: float,
    t_end: float,
    cfg: ControllerConfig,
    sink: TextIO | None = None,
) -> tuple[Trajectory, RunRecord]:
    """Variable-step run driven by the embedded estimate.

    Raises:
        ControllerAbort: more than ``cfg.max_rejects`` consecutive rejections.
        FlowError: a non-finite state.
    """
    if not method.estimators:
        raise ValueError(f"method {method.name} has no estimator")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    p = controller_exponent(method, cfg)
    h = cfg.h_init if cfg.h_init is not None else (t_end - t0) / 100
    t = t0
    x = np.array(x0, dtype=float)
    ts, xs, hs, errs, dl = [t0], [x.copy()], [], [], []
    out = _CsvSink(sink, x.size)
    out.write(t0, x, 0.0, 0.0)
    fevals = rejected = streak = 0
    span = t_end - t0
    while t < t_end:
        if len(hs) >= cfg.max_steps:
            raise ControllerAbort(f"exceeded {cfg.max_steps} steps")
        last = t + h >= t_end - 1e-14 * span
        hn = t_end - t if last else h
        try:
            res = step_with_stages(method, flows, x, hn)
        except FlowError as exc:
            exc.step = len(hs)
            raise
        fevals += res.fevals
        err, d = step_error(method, res, cfg.error_norm, flows.positions)
        if err == 0.0:
            factor = cfg.facmax
        else:
            factor = min(cfg.facmax, max(cfg.facmin, cfg.fac * (cfg.tol / err) ** p))
        if err <= cfg.tol:
            t = t_end if last else t + hn
            x = res.x_next
            ts.append(t)
            xs.append(x.copy())
            hs.append(hn)
            errs.append(err)
            dl.append(d)
            out.write(t, x, err, hn)
            streak = 0
            if not last:
                h = hn * factor
        else:
            rejected += 1
            streak += 1
            if streak > cfg.max_rejects:
                raise ControllerAbort(f"more than {cfg.max_rejects} consecutive rejections at t={t!r}")
            h = hn * factor
    traj = Trajectory(np.array(ts), np.array(xs), np.array(hs), np.array(errs), np.array(dl))
    rec = RunRecord(method.name, nsteps=len(hs), fevals=fevals, rejected=rejected, tol=cfg.tol)
    rec.E2 = float(traj.err.max()) if len(hs) else 0.0
    if len(method.estimators) >= 2 and len(hs):
        rec.E2_low = float(traj.est_diffs[:, -1].max())
    return traj, rec
