"""Linear systems for estimator weights built from intermediate stage outputs.

For a scheme with stage operators ``E_1, ..., E_m`` the usable outputs are the
prefix products ``P_0 = I, P_k = E_1 ... E_k`` for ``k < m`` (the final output
is never a column). Weights ``w_k`` give an estimator of order ``l`` when
``sum_k w_k P_k`` agrees with the exact flow through grade ``l``. Each word of
grade <= ``l`` contributes one linear equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .opalg import (
    MAX_ORDER,
    FAMILY_ROLES,
    Family,
    GeneratorSet,
    Role,
    TruncatedSeries,
    Word,
    series_exp,
    series_mul,
    stage_series,
    target_exponent,
)

RANK_RTOL = 1e-9
FEASIBILITY_RTOL = 1e-10
ORDER_TOL = 1e-10
CONSISTENCY_TOL = 1e-10


class InfeasibleSystemError(ValueError):
    """Raised when no weight vector satisfies the requested order conditions."""

    def __init__(self, message: str, weights: EstimatorWeights):
        super().__init__(message)
        self.weights = weights


@dataclass(frozen=True)
class SchemeSpec:
    family: Family
    stages: tuple[tuple[Role, float], ...]
    declared_order: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        stages = tuple((Role(r), float(c)) for r, c in self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise ValueError("scheme has no stages")
        roles = [r for r, _ in stages]
        allowed = FAMILY_ROLES[self.family]
        bad = [r.value for r in roles if r not in allowed]
        if bad:
            raise ValueError(f"roles {bad} not valid for family {self.family.value}")
        coeffs = [c for _, c in stages]
        if self.family is Family.SS:
            if abs(sum(coeffs) - 1.0) > CONSISTENCY_TOL:
                raise ValueError(f"SS coefficients must sum to 1, got {sum(coeffs)!r}")
        elif self.family is Family.METHOD_ADJOINT:
            expect = [Role.ADJOINT_CHI, Role.BASIC_CHI] * (len(roles) // 2)
            if len(roles) % 2 or roles != expect:
                raise ValueError("method-adjoint stages must alternate AdjointChi, BasicChi, ...")
            if abs(sum(coeffs) - 1.0) > CONSISTENCY_TOL:
                raise ValueError(f"method-adjoint coefficients must sum to 1, got {sum(coeffs)!r}")
        else:
            if any(a == b for a, b in zip(roles, roles[1:])):
                raise ValueError("splitting stages must alternate between FlowA and FlowB")
            sa = sum(c for r, c in stages if r is Role.FLOW_A)
            sb = sum(c for r, c in stages if r is Role.FLOW_B)
            if abs(sa - 1.0) > CONSISTENCY_TOL or abs(sb - 1.0) > CONSISTENCY_TOL:
                raise ValueError(f"splitting needs sum(a) = sum(b) = 1, got {sa!r}, {sb!r}")

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def n_outputs(self) -> int:
        """Number of usable outputs K (input state plus intermediates)."""
        return len(self.stages)

    @property
    def coefficients(self) -> list[float]:
        return [c for _, c in self.stages]

    def is_palindromic(self, tol: float = 1e-14) -> bool:
        st = self.stages
        return all(r1 == r2 and abs(c1 - c2) <= tol for (r1, c1), (r2, c2) in zip(st, reversed(st)))

    def is_time_symmetric(self, tol: float = 1e-14) -> bool:
        """Palindromic, with basic and adjoint roles swapped for method-adjoint schemes."""
        if self.family is not Family.METHOD_ADJOINT:
            return self.is_palindromic(tol)
        c = self.coefficients
        return all(abs(x - y) <= tol for x, y in zip(c, reversed(c)))


@dataclass(frozen=True)
class WeightSystem:
    family: Family
    order: int
    words: tuple[Word, ...]
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def n_conditions(self) -> int:
        return len(self.words) - 1

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    def scaled(self, factor: float) -> WeightSystem:
        return WeightSystem(self.family, self.order, self.words, self.matrix * factor, self.rhs * factor)


@dataclass(frozen=True)
class EstimatorWeights:
    w: np.ndarray
    order: int
    residual: float = 0.0
    nullspace_dim: int = 0
    feasible: bool = True
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))

    def __len__(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class OrderReport:
    max_grade: int
    main_residuals: tuple[float, ...]
    main_order: int
    estimator_residuals: tuple[tuple[float, ...], ...] = field(default=())
    estimator_orders: tuple[int, ...] = field(default=())


def _stage_exponentials(scheme: SchemeSpec, order: int) -> list[TruncatedSeries]:
    return [series_exp(stage_series(scheme.family, r, c, order)) for r, c in scheme.stages]


def prefix_products(scheme: SchemeSpec, order: int) -> list[TruncatedSeries]:
    """Series of the usable outputs ``P_0 = I, ..., P_{K-1}``; the final output is excluded."""
    exps = _stage_exponentials(scheme, order)
    out = [TruncatedSeries.identity(order)]
    for e in exps[:-1]:
        out.append(series_mul(out[-1], e))
    return out


def scheme_series(scheme: SchemeSpec, order: int) -> TruncatedSeries:
    """Series of the full one-step map."""
    result = TruncatedSeries.identity(order)
    for e in _stage_exponentials(scheme, order):
        result = series_mul(result, e)
    return result


def count_conditions(family: Family | str, order: int) -> int:
    """Number of nonempty words of grade <= ``order`` (conditions besides the trivial one)."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    gens = GeneratorSet.for_family(family, order)
    # counts by grade via the composition recurrence; avoids materializing words
    counts = [1] + [0] * order
    for g in range(1, order + 1):
        counts[g] = sum(counts[g - sg] for _, sg in gens.entries if sg <= g)
    return sum(counts[1:])


def assemble_system(scheme: SchemeSpec, order: int) -> WeightSystem:
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
    words = GeneratorSet.for_family(scheme.family, order).words(order)
    prefixes = prefix_products(scheme, order)
    target = series_exp(target_exponent(scheme.family, order))
    matrix = np.array([[p.coeff(w) for p in prefixes] for w in words], dtype=float)
    rhs = np.array([target.coeff(w) for w in words], dtype=float)
    return WeightSystem(scheme.family, order, tuple(words), matrix, rhs)


def _parameterization(n: int, symmetry, pins):
    """Affine map ``w = T z + c`` encoding equality constraints.

    ``symmetry`` holds ``(i, j)`` or ``(i, j, sign)`` meaning ``w_j = sign * w_i``.
    """
    parent = list(range(n))
    sign = [1.0] * n

    def find(i):
        s = 1.0
        while parent[i] != i:
            s *= sign[i]
            i = parent[i]
        return i, s

    forced_zero = set()
    for item in symmetry or ():
        i, j = int(item[0]), int(item[1])
        sg = float(item[2]) if len(item) > 2 else 1.0
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"symmetry pair {(i, j)} out of range for {n} weights")
        ri, si = find(i)
        rj, sj = find(j)
        # w_j = sg w_i, w_i = si w_ri, w_j = sj w_rj
        if ri == rj:
            if abs(sj - sg * si) > 0:
                forced_zero.add(ri)
            continue
        parent[rj] = ri
        sign[rj] = sg * si / sj

    pin_vals: dict[int, float] = {}
    for k, v in dict(pins or {}).items():
        k = int(k)
        if not 0 <= k < n:
            raise ValueError(f"pin index {k} out of range for {n} weights")
        r, s = find(k)
        val = float(v) / s
        if r in pin_vals and abs(pin_vals[r] - val) > 1e-14 * (1 + abs(val)):
            raise ValueError(f"inconsistent pins on weight {k}")
        pin_vals[r] = val
    for r in forced_zero:
        if r in pin_vals and pin_vals[r] != 0.0:
            raise ValueError(f"pin conflicts with antisymmetric self-constraint on weight {r}")
        pin_vals[r] = 0.0

    roots = sorted({find(i)[0] for i in range(n)} - set(pin_vals))
    col = {r: k for k, r in enumerate(roots)}
    T = np.zeros((n, len(roots)))
    c = np.zeros(n)
    for i in range(n):
        r, s = find(i)
        if r in pin_vals:
            c[i] = s * pin_vals[r]
        else:
            T[i, col[r]] = s
    return T, c


def solve_weights(
    system: WeightSystem,
    symmetry: Sequence[Sequence[float]] | None = None,
    pins: Mapping[int, float] | None = None,
    strict: bool = True,
) -> EstimatorWeights:
    """Minimal-norm least-squares weights subject to symmetry and pin constraints.

    Raises:
        InfeasibleSystemError: if ``strict`` and the residual exceeds the tolerance.
        ValueError: if pins or symmetry constraints contradict each other.
    """
    A, b = system.matrix, system.rhs
    n = A.shape[1]
    T, c = _parameterization(n, symmetry, pins)
    rhs = b - A @ c
    M = A @ T
    if M.shape[1] == 0:
        z = np.zeros(0)
        null_dim = 0
    else:
        U, sv, Vt = np.linalg.svd(M, full_matrices=True)
        smax = sv[0] if sv.size else 0.0
        rank = int(np.sum(sv > RANK_RTOL * smax)) if smax > 0 else 0
        z = Vt[:rank].T @ ((U[:, :rank].T @ rhs) / sv[:rank])
        N = Vt[rank:].T
        null_dim = N.shape[1]
        if null_dim:
            # pick the member of the solution set with smallest full-weight norm
            y, *_ = np.linalg.lstsq(T @ N, -(T @ z + c), rcond=None)
            z = z + N @ y
    w = T @ z + c
    residual = float(np.linalg.norm(A @ w - b))
    feasible = residual <= FEASIBILITY_RTOL * (1.0 + float(np.linalg.norm(b)))
    result = EstimatorWeights(w, system.order, residual, null_dim, feasible)
    if strict and not feasible:
        raise InfeasibleSystemError(
            f"no estimator of order {system.order} exists under the given constraints "
            f"(residual {residual:.3e})",
            result,
        )
    return result


def derive_weights(
    scheme: SchemeSpec,
    order: int,
    symmetry=None,
    pins=None,
    strict: bool = True,
) -> EstimatorWeights:
    return solve_weights(assemble_system(scheme, order), symmetry, pins, strict)


def _grade_residuals(diff: TruncatedSeries) -> tuple[float, ...]:
    return tuple(diff.max_abs_by_grade())


def _order_from(residuals: Sequence[float], tol: float) -> int:
    order = -1
    for g, r in enumerate(residuals):
        if r > tol:
            break
        order = g
    return order


def verify_order(
    scheme: SchemeSpec,
    weights: EstimatorWeights | Sequence[EstimatorWeights] | None = None,
    max_grade: int | None = None,
    tol: float = ORDER_TOL,
) -> OrderReport:
    """Grade-wise residuals of the method and its estimators against the exact flow.

    The reported order is the largest grade ``g`` such that every residual
    through ``g`` is at most ``tol``.
    """
    if weights is None:
        weights = []
    elif isinstance(weights, EstimatorWeights):
        weights = [weights]
    if max_grade is None:
        max_grade = min(MAX_ORDER, scheme.declared_order + 1)
    if not 1 <= max_grade <= MAX_ORDER:
        raise ValueError(f"max_grade must lie in [1, {MAX_ORDER}]")
    target = series_exp(target_exponent(scheme.family, max_grade))
    main_res = _grade_residuals(scheme_series(scheme, max_grade) - target)
    est_res = []
    if weights:
        prefixes = prefix_products(scheme, max_grade)
        for ew in weights:
            if len(ew.w) != len(prefixes):
                raise ValueError(f"weights have length {len(ew.w)}, scheme has {len(prefixes)} outputs")
            combo = TruncatedSeries.zero(max_grade)
            for wk, pk in zip(ew.w, prefixes):
                combo = combo + pk.scale(float(wk))
            est_res.append(_grade_residuals(combo - target))
    return OrderReport(
        max_grade,
        main_res,
        _order_from(main_res, tol),
        tuple(est_res),
        tuple(_order_from(r, tol) for r in est_res),
    )


__all__ = [
    "EstimatorWeights",
    "InfeasibleSystemError",
    "OrderReport",
    "SchemeSpec",
    "WeightSystem",
    "assemble_system",
    "count_conditions",
    "derive_weights",
    "prefix_products",
    "scheme_series",
    "solve_weights",
    "verify_order",
]
