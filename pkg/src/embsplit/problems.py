"""Test systems with exactly solvable sub-flows and analytic reference solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .opalg import Role
from .stepper import FlowSet


@dataclass(frozen=True)
class RknSystem:
    """Second-order system y'' = g(y), split into drift (y' , 0) and kick (0, g(y))."""

    dim: int
    accel: Callable[[np.ndarray], np.ndarray]

    def drift(self, tau: float, x: np.ndarray) -> np.ndarray:
        d = self.dim
        out = x.copy()
        out[:d] += tau * x[d:]
        return out

    def kick(self, tau: float, x: np.ndarray) -> np.ndarray:
        d = self.dim
        out = x.copy()
        out[d:] += tau * self.accel(x[:d])
        return out

    def flows(self, strang: str = "BAB") -> FlowSet:
        """FlowSet with exact drift/kick, a Strang stage and the Lie-Trotter pair.

        ``BasicChi`` drifts then kicks; ``AdjointChi`` kicks then drifts.
        """
        drift, kick = self.drift, self.kick
        if strang == "BAB":
            def s2(tau, x):
                return kick(tau / 2, drift(tau, kick(tau / 2, x)))
            s2_cost = 2
        elif strang == "ABA":
            def s2(tau, x):
                return drift(tau / 2, kick(tau, drift(tau / 2, x)))
            s2_cost = 1
        else:
            raise ValueError(f"unknown Strang variant {strang!r}")

        def chi(tau, x):
            return kick(tau, drift(tau, x))

        def chi_adj(tau, x):
            return drift(tau, kick(tau, x))

        flows = {
            Role.FLOW_A: drift,
            Role.FLOW_B: kick,
            Role.S2: s2,
            Role.BASIC_CHI: chi,
            Role.ADJOINT_CHI: chi_adj,
        }
        cost = {Role.FLOW_A: 0, Role.FLOW_B: 1, Role.S2: s2_cost, Role.BASIC_CHI: 1, Role.ADJOINT_CHI: 1}
        return FlowSet(2 * self.dim, flows, cost, slice(0, self.dim))


@dataclass(frozen=True)
class KeplerState:
    q: np.ndarray
    p: np.ndarray
    mu: float = 1.0
    e: float | None = None

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


def _kepler_accel(mu: float):
    def accel(q):
        r2 = q[0] * q[0] + q[1] * q[1]
        if r2 == 0.0:
            raise ZeroDivisionError("Kepler force evaluated at the origin")
        return (-mu / (r2 * math.sqrt(r2))) * q
    return accel


def kepler_system(mu: float = 1.0) -> RknSystem:
    if not mu > 0:
        raise ValueError("mu must be positive")
    return RknSystem(2, _kepler_accel(mu))


def kepler_flows(mu: float = 1.0, strang: str = "BAB") -> FlowSet:
    """Drift ``q += tau p`` (FlowA) and kick ``p -= tau mu q / |q|^3`` (FlowB); one force per kick."""
    return kepler_system(mu).flows(strang)


def kepler_init(e: float) -> KeplerState:
    if not 0 <= e < 1:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")
    return KeplerState(np.array([1 - e, 0.0]), np.array([0.0, math.sqrt((1 + e) / (1 - e))]), 1.0, e)


def kepler_energy(state: KeplerState | np.ndarray, mu: float = 1.0) -> float:
    if isinstance(state, KeplerState):
        q, p, mu = state.q, state.p, state.mu
    else:
        state = np.asarray(state, dtype=float)
        q, p = state[..., :2], state[..., 2:]
    r = np.linalg.norm(q, axis=-1)
    if np.any(r == 0):
        raise ZeroDivisionError("Kepler energy undefined at r = 0")
    return 0.5 * np.sum(p * p, axis=-1) - mu / r


def eccentric_anomaly(mean_anomaly: float, e: float, tol: float = 1e-14, maxiter: int = 50) -> float:
    """Solve ``M = E - e sin E`` by Newton's method."""
    M = math.remainder(mean_anomaly, 2 * math.pi)
    E = M + e * math.sin(M)
    for _ in range(maxiter):
        dE = (E - e * math.sin(E) - M) / (1 - e * math.cos(E))
        E -= dE
        if abs(dE) <= tol:
            return E
    raise RuntimeError(f"Kepler equation did not converge (M={M}, e={e})")


def kepler_exact(e: float, t: float) -> KeplerState:
    """Exact state at time ``t`` for the standard initial data with eccentricity ``e``."""
    if not 0 <= e < 1:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")
    E = eccentric_anomaly(t, e)
    c, s = math.cos(E), math.sin(E)
    b = math.sqrt(1 - e * e)
    q = np.array([c - e, b * s])
    p = np.array([-s, b * c]) / (1 - e * c)
    return KeplerState(q, p, 1.0, e)


def kepler_exact_states(e: float, ts) -> np.ndarray:
    return np.array([kepler_exact(e, float(t)).vector for t in ts])


def harmonic_system() -> RknSystem:
    return RknSystem(1, lambda y: -y)


def harmonic_flows(strang: str = "BAB") -> FlowSet:
    return harmonic_system().flows(strang)


def harmonic_exact(t: float, x0=(1.0, 0.0)) -> np.ndarray:
    y0, v0 = x0
    c, s = math.cos(t), math.sin(t)
    return np.array([y0 * c + v0 * s, -y0 * s + v0 * c])


def harmonic_energy(x) -> float:
    x = np.asarray(x, dtype=float)
    return 0.5 * np.sum(x * x, axis=-1)
