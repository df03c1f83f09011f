"""Time- and frequency-domain checks of the zero-frequency payoff.

Both systems are linear with constant inputs, so one classical RK4 step is an
affine map ``x -> Phi x + gamma``; it is built once by applying the RK4
stages to basis vectors and then iterated. The fixed point of that map is the
exact equilibrium, whatever the step size.

Placements here are node indices, not kernel positions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SimulationError
from .platoon import PlatoonScenario
from .spectral import GroundedSystem, grounded_system, sigma_max, sigma_max_batch
from .topology import LeaderNetwork

DIVERGENCE_LIMIT = 1e12
POINTS_PER_DECADE = 61


@dataclass(frozen=True)
class SimConfig:
    dt: float | None = None  # None: 0.05 / Gershgorin bound of the system matrix
    horizon: float | None = None  # None: 50 / slowest decay rate
    steady_tol: float = 1e-8
    reference_u: float = 0.0
    steady_steps: int = 100
    record_every: int = 1

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.dt is not None and self.horizon is not None and self.dt > self.horizon:
            raise ValueError("dt must not exceed the horizon")
        if self.steady_tol <= 0:
            raise ValueError("steady_tol must be positive")


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # (state_dim, samples)
    outputs: np.ndarray  # (sensors, samples)
    state_labels: list[str]
    output_labels: list[str]
    settled: bool
    final_state: np.ndarray
    final_output: np.ndarray
    extras: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.state_labels, *self.output_labels])
        for k in range(len(self.t)):
            w.writerow(
                [f"{self.t[k]:.12g}"]
                + [f"{x:.12g}" for x in self.states[:, k]]
                + [f"{y:.12g}" for y in self.outputs[:, k]]
            )
        return buf.getvalue()


def rk4_step(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    k1 = fun(x)
    k2 = fun(x + 0.5 * dt * k1)
    k3 = fun(x + 0.5 * dt * k2)
    k4 = fun(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_affine_map(A: np.ndarray, b: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """RK4 step for x' = A x + b written as x_next = Phi x + gamma."""
    fun = lambda x: A @ x + b  # noqa: E731
    gamma = rk4_step(fun, np.zeros(len(b)), dt)
    Phi = np.column_stack([rk4_step(fun, e, dt) - gamma for e in np.eye(len(b))])
    return Phi, gamma


def gershgorin_bound(A: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(A), axis=1)))


def slowest_rate(A: np.ndarray) -> float:
    return float(np.min(-np.linalg.eigvals(A).real))


def _integrate(A, b, x0, cfg: SimConfig, observe: Callable[[np.ndarray], np.ndarray]):
    dt = cfg.dt if cfg.dt is not None else 0.05 / gershgorin_bound(A)
    if cfg.horizon is not None:
        horizon = cfg.horizon
    else:
        rate = slowest_rate(A)
        if rate <= 0:
            raise SimulationError("system matrix is not Hurwitz; no steady state exists")
        horizon = 50.0 / rate
    if dt > horizon:
        raise ValueError("dt must not exceed the horizon")
    Phi, gamma = rk4_affine_map(A, b, dt)
    steps = int(math.ceil(horizon / dt))
    x = np.array(x0, dtype=float)
    ts, xs, ys = [0.0], [x.copy()], [observe(x)]
    calm = 0
    settled = False
    k = 0
    for k in range(1, steps + 1):
        x = Phi @ x + gamma
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            raise SimulationError(f"state diverged at t={k * dt:.6g}")
        if np.max(np.abs(A @ x + b)) < cfg.steady_tol:
            calm += 1
        else:
            calm = 0
        if k % cfg.record_every == 0:
            ts.append(k * dt)
            xs.append(x.copy())
            ys.append(observe(x))
        if calm >= cfg.steady_steps:
            settled = True
            break
    if ts[-1] != k * dt:
        ts.append(k * dt)
        xs.append(x.copy())
        ys.append(observe(x))
    return np.array(ts), np.array(xs).T, np.array(ys).T, settled, x, dt


def _selectors(sys: GroundedSystem, attackers: Sequence[int], detectors: Sequence[int]):
    pos = {v: a for a, v in enumerate(sys.follower_order)}
    k = len(pos)
    try:
        B = np.zeros((k, len(attackers)))
        for col, v in enumerate(attackers):
            B[pos[v], col] = 1.0
        C = np.zeros((len(detectors), k))
        for row, v in enumerate(detectors):
            C[row, pos[v]] = 1.0
    except KeyError as exc:
        raise ValueError(f"node {exc} is not a follower") from None
    return B, C


def simulate_first_order(
    net: LeaderNetwork,
    attackers: Sequence[int],
    detectors: Sequence[int],
    w_const: Sequence[float],
    cfg: SimConfig = SimConfig(),
) -> Trajectory:
    """Integrate x' = -L_g x + L_12 u + B w from x = 0 with constant u and w."""
    sys = grounded_system(net)
    if len(w_const) != len(attackers):
        raise ValueError("w_const must have one entry per attacked node")
    B, C = _selectors(sys, attackers, detectors)
    A = -sys.L_g
    # The Laplacian stores the leader coupling with a negative sign.
    b = -sys.L_12 * cfg.reference_u + B @ np.asarray(w_const, dtype=float)
    t, xs, ys, settled, x, dt = _integrate(A, b, np.zeros(len(b)), cfg, lambda x: C @ x)
    return Trajectory(
        t, xs, ys,
        [f"x{v}" for v in sys.follower_order],
        [f"y{v}" for v in detectors],
        settled, x, C @ x,
        {"dt": dt, "residual": float(np.max(np.abs(sys.L_g @ x + sys.L_12 * cfg.reference_u - B @ np.asarray(w_const, dtype=float))))},
    )


def dc_gain_empirical(
    net: LeaderNetwork,
    attackers: Sequence[int],
    detectors: Sequence[int],
    cfg: SimConfig = SimConfig(),
) -> np.ndarray:
    """Steady detector readings under a unit constant attack, one column per attacked node."""
    cfg = SimConfig(cfg.dt, cfg.horizon, cfg.steady_tol, 0.0, cfg.steady_steps, 10**9)
    cols = []
    for k in range(len(attackers)):
        w = np.zeros(len(attackers))
        w[k] = 1.0
        traj = simulate_first_order(net, attackers, detectors, w, cfg)
        if not traj.settled:
            raise SimulationError("no steady state within the horizon")
        cols.append(traj.final_output)
    return np.column_stack(cols)


def log_grid(omega_min: float = 1e-3, omega_max: float = 1e3, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    decades = math.log10(omega_max / omega_min)
    count = max(2, int(round(decades * per_decade)) + 1)
    return np.logspace(math.log10(omega_min), math.log10(omega_max), count)


def frequency_response(
    net: LeaderNetwork,
    attackers: Sequence[int],
    detectors: Sequence[int],
    omegas: Sequence[float] | None = None,
) -> list[tuple[float, float]]:
    """sigma_max of C (j w I + L_g)^-1 B at each frequency."""
    sys = grounded_system(net)
    B, C = _selectors(sys, attackers, detectors)
    omegas = log_grid() if omegas is None else np.asarray(omegas, dtype=float)
    if np.any(omegas < 0):
        raise ValueError("frequencies must be nonnegative")
    k = sys.L_g.shape[0]
    stack = np.array([C @ np.linalg.solve(1j * w * np.eye(k) + sys.L_g, B) for w in omegas])
    gains = sigma_max_batch(stack)
    return [(float(w), float(g)) for w, g in zip(omegas, gains)]


def response_to_csv(resp: Sequence[tuple[float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "gain"])
    for om, g in resp:
        w.writerow([f"{om:.12g}", f"{g:.12g}"])
    return buf.getvalue()


def _platoon_run(scn: PlatoonScenario, sys: GroundedSystem, B, C, w, cfg: SimConfig):
    k = sys.L_g.shape[0]
    net_idx = list(sys.follower_order)
    delta = np.asarray(scn.spacing, dtype=float)[net_idx]
    A = np.block([[np.zeros((k, k)), np.eye(k)], [-scn.k_p * sys.L_g, -scn.k_u * sys.L_g]])
    b = np.concatenate([np.zeros(k), scn.k_p * delta + B @ w])
    # Followers start at rest at the leader's initial position.
    z0 = np.concatenate([np.zeros(k), -cfg.reference_u * np.ones(k)])
    return _integrate(A, b, z0, cfg, lambda z: cfg.reference_u + C @ z[k:])


def simulate_platoon(
    scn: PlatoonScenario,
    attackers: Sequence[int],
    detectors: Sequence[int],
    w_const: Sequence[float],
    cfg: SimConfig = SimConfig(reference_u=20.0),
) -> Trajectory:
    """Second-order platoon under a constant attack; outputs are sensed velocities.

    The leader drives at ``cfg.reference_u``. States are integrated relative
    to the leader (constant inputs) and reported in absolute coordinates.
    ``extras`` carries the steady velocity deviation from the leader's speed
    and the steady position deviation from the attack-free formation, both
    per sensor.
    """
    net = scn.network()
    sys = grounded_system(net)
    B, C = _selectors(sys, attackers, detectors)
    w = np.asarray(w_const, dtype=float)
    if len(w) != len(attackers):
        raise ValueError("w_const must have one entry per attacked node")
    t, zs, ys, settled, z, dt = _platoon_run(scn, sys, B, C, w, cfg)
    if not settled:
        raise SimulationError("platoon did not settle within the horizon")
    k = sys.L_g.shape[0]
    _, _, _, nominal_settled, z_nom, _ = _platoon_run(scn, sys, B, C, np.zeros_like(w), cfg)
    if not nominal_settled:
        raise SimulationError("attack-free platoon did not settle within the horizon")
    leader_pos = cfg.reference_u * t
    positions = zs[:k] + leader_pos
    velocities = zs[k:] + cfg.reference_u
    labels = [f"p{v}" for v in sys.follower_order] + [f"v{v}" for v in sys.follower_order]
    extras = {
        "dt": dt,
        "velocity_deviation": C @ z[k:],
        "position_deviation": C @ (z[:k] - z_nom[:k]),
        "relative_position": z[:k].copy(),
        "order": sys.follower_order,
    }
    return Trajectory(
        t, np.vstack([positions, velocities]), ys,
        labels, [f"y{v}" for v in detectors],
        settled, z, cfg.reference_u + C @ z[k:], extras,
    )


def dc_check(net: LeaderNetwork, attackers: Sequence[int], detectors: Sequence[int], cfg: SimConfig = SimConfig()) -> tuple[float, float]:
    """(sigma_max of the empirical DC gain, sigma_max of C L_g^-1 B)."""
    emp = dc_gain_empirical(net, attackers, detectors, cfg)
    sys = grounded_system(net)
    B, C = _selectors(sys, attackers, detectors)
    exact = C @ np.linalg.solve(sys.L_g, B)
    return sigma_max(emp), sigma_max(exact)
