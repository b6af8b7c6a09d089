"""Reproduction drivers: presets, simulations, basin sweeps and mixed matches."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import classical, quantum
from .engine import (
    CONV_WINDOW,
    DEFAULT_EPS_CONV,
    DEFAULT_EPS_CYCLE,
    AttractorLabel,
    IntegrationParams,
    Trajectory,
    detect_attractor,
    integrate,
)
from .errors import NumericalError, ValidationError
from .games import (
    VERTEX_COORDS,
    Game,
    JointDistribution,
    MixedStrategy,
    induced_distribution,
    internal_equilibrium,
)

PRESETS = {
    "trading-farming": (1.0, 0.0, 0.5, 0.5),
    "prisoners-dilemma": (0.0, 5.0, 1.0, 3.0),
    "hawk-dove": (-1.0, 2.0, 0.0, 1.0),
    "dominant": (2.0, 1.0, 1.0, 0.0),
}


def preset_game(name: str) -> Game:
    """Named symmetric games used throughout the experiments."""
    try:
        a, b, c, d = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown game preset {name!r}; choose from {sorted(PRESETS)}")
    return Game.from_parameters(a, b, c, d)


def classical_targets(g: Game):
    """Named attractor candidates in the (x_T, y_T) plane: vertices plus IE."""
    targets = [(name, np.array(xy)) for name, xy in VERTEX_COORDS.items()]
    ie = internal_equilibrium(g)
    if ie is not None:
        targets.append(("IE", np.array([ie[0].p, ie[1].p])))
    return targets


def _project_classical(s):
    return np.array([s[0].real, s[2].real])


def _project_quantum(s):
    p = np.abs(np.asarray(s)[:4]) ** 2
    p = p / p.sum()
    return np.array([p[0] + p[1], p[0] + p[2]])


def _amplitude_coords(s):
    amps = np.asarray(s)[:4]
    return np.concatenate([amps.real, amps.imag])


def simulate_classical(g: Game, x: MixedStrategy, y: MixedStrategy, gamma=1.0,
                       params: IntegrationParams | None = None) -> Trajectory:
    """Integrate replicator dynamics for both players from (x, y)."""
    params = params or IntegrationParams()
    params.validate()
    from ._kernels import rk4_classical

    s0 = np.concatenate([x.probs, y.probs])
    n_steps = max(1, int(round(params.t_max / params.dt)))
    times, states = rk4_classical(g.A, g.B, s0, gamma, params.dt, n_steps, params.stride)
    if not np.all(np.isfinite(states)):
        bad = int(np.nonzero(~np.all(np.isfinite(states), axis=1))[0][0])
        raise NumericalError(f"non-finite state at t={times[bad]}: {states[bad]!r}")
    f = classical.batch_replicator_field(g.A, g.B, gamma)
    residuals = np.linalg.norm(f(0.0, states), axis=1)
    traj = Trajectory(times=times, states=states, residuals=residuals,
                      meta={"dt": params.dt, "t_max": params.t_max,
                            "stride": params.stride})
    traj.payoffs = np.column_stack([
        np.einsum("ni,ij,nj->n", states[:, :2], g.A, states[:, 2:]),
        np.einsum("ni,ij,nj->n", states[:, :2], g.B, states[:, 2:]),
    ])
    traj.meta.update({"kind": "classical", "gamma": gamma})
    return traj


def label_trajectory(g: Game, traj: Trajectory, eps_conv=DEFAULT_EPS_CONV,
                     eps_cycle=DEFAULT_EPS_CYCLE) -> AttractorLabel:
    """Attractor label of a classical or quantum trajectory, with named
    targets taken from the game's vertices and internal equilibrium."""
    if traj.meta.get("kind") == "classical":
        project, cycle_project = _project_classical, None
    else:
        project, cycle_project = _project_quantum, _amplitude_coords
    return detect_attractor(traj, eps_conv=eps_conv, eps_cycle=eps_cycle,
                            targets=classical_targets(g), project=project,
                            cycle_project=cycle_project)


@dataclass
class SweepResult:
    grid_n: int
    points: list               # (x0, y0, AttractorLabel) in row-major grid order
    summary: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if not self.summary:
            self.summary = Counter(lbl.describe() for _, _, lbl in self.points)


def basin_sweep(g: Game, mode="classical", grid_n=21, gamma=1.0,
                params: IntegrationParams | None = None,
                eps_conv=DEFAULT_EPS_CONV, eps_cycle=DEFAULT_EPS_CYCLE) -> SweepResult:
    """Label the attractor reached from every interior lattice point
    ((i+0.5)/grid_n, (j+0.5)/grid_n), row-major in (x0, y0).

    Classical sweeps run all grid points as one vectorized batch with early
    exit once every point has converged; stragglers fall back to the full
    per-point trajectory treatment (cycle/timeout detection included).
    """
    if grid_n < 2:
        raise ValidationError("grid_n must be >= 2")
    if mode not in ("classical", "quantum"):
        raise ValidationError(f"unknown sweep mode {mode!r}")
    params = params or IntegrationParams()
    params.validate()
    coords = [( (i + 0.5) / grid_n, (j + 0.5) / grid_n)
              for i in range(grid_n) for j in range(grid_n)]
    if mode == "quantum":
        points = []
        for x0, y0 in coords:
            q0 = quantum.JointQuantumState.from_locals(
                quantum.LocalQuantumState.from_angles(np.arccos(np.sqrt(x0))),
                quantum.LocalQuantumState.from_angles(np.arccos(np.sqrt(y0))))
            traj = quantum.evolve_quantum(q0, g, quantum.QuantumParams(
                gamma=gamma, dt=params.dt, t_max=params.t_max, stride=params.stride))
            points.append((x0, y0, label_trajectory(g, traj, eps_conv, eps_cycle)))
        return SweepResult(grid_n, points)

    labels = _batch_classical_sweep(g, coords, gamma, params, eps_conv, eps_cycle)
    return SweepResult(grid_n, [(x0, y0, lbl) for (x0, y0), lbl in zip(coords, labels)])


def _batch_classical_sweep(g, coords, gamma, params, eps_conv, eps_cycle):
    from ._kernels import sweep_classical

    n = len(coords)
    s0 = np.array([[x0, 1 - x0, y0, 1 - y0] for x0, y0 in coords])
    n_steps = max(1, int(round(params.t_max / params.dt)))
    finals, res, converged = sweep_classical(
        g.A, g.B, s0, gamma, params.dt, n_steps, params.stride,
        eps_conv, CONV_WINDOW)
    if not np.all(np.isfinite(finals)):
        bad = int(np.nonzero(~np.all(np.isfinite(finals), axis=1))[0][0])
        raise NumericalError(f"non-finite state at grid point {coords[bad]}")
    targets = classical_targets(g)
    labels = [None] * n
    for i in range(n):
        if converged[i]:
            term = np.array([finals[i, 0], finals[i, 2]])
            dists = [(np.linalg.norm(term - p), name) for name, p in targets]
            d, name = min(dists, key=lambda z: z[0])
            labels[i] = AttractorLabel("converged", name if d < 1e-3 else None,
                                       term, float(res[i]))
        else:
            # straggler: full trajectory treatment with cycle detection
            x0, y0 = coords[i]
            traj = simulate_classical(g, MixedStrategy.from_prob(x0),
                                      MixedStrategy.from_prob(y0), gamma, params)
            labels[i] = label_trajectory(g, traj, eps_conv, eps_cycle)
    return labels


def accumulated_payoff(traj: Trajectory):
    """Trapezoidal time integral of both payoff channels."""
    if traj.payoffs is None or len(traj) < 2:
        raise ValidationError("accumulated payoff needs at least 2 payoff samples")
    trapz = getattr(np, "trapezoid", None) or np.trapz
    acc_a = float(trapz(traj.payoffs[:, 0], traj.times))
    acc_b = float(trapz(traj.payoffs[:, 1], traj.times))
    return acc_a, acc_b


def _mixed_rhs_batch(A, B, states, gamma, mode):
    """Vectorized mixed-match derivative at sampled states (for residuals)."""
    psi = states[:, :2]
    y = states[:, 2:].real
    y = y / y.sum(axis=1, keepdims=True)
    pp = np.abs(psi) ** 2
    pp = pp / pp.sum(axis=1, keepdims=True)
    da = (A[0, 0] - A[1, 0]) * y[:, 0] + (A[0, 1] - A[1, 1]) * y[:, 1]
    if mode == "tangent":
        dpsi = gamma * da[:, None] * np.column_stack([-psi[:, 1], psi[:, 0]])
    else:
        ha01 = gamma * psi[:, 0] * da
        ha10 = gamma * psi[:, 1] * (-da)
        if mode == "hermitized":
            ha01 = 0.5 * (ha01 + ha10.conj())
            ha10 = ha01.conj()
        dpsi = -1j * np.column_stack([ha01 * psi[:, 1], ha10 * psi[:, 0]])
    xb = pp @ B
    ub = np.sum(xb * y, axis=1, keepdims=True)
    dy = gamma * y * (xb - ub)
    return np.column_stack([dpsi, dy])


@dataclass
class MatchResult:
    traj: Trajectory
    acc_a: float
    acc_b: float
    quantum_player: int
    label: AttractorLabel
    baseline: dict | None = None


def mixed_match(g: Game, quantum_player: int, q_init: quantum.LocalQuantumState,
                c_init: MixedStrategy, params: quantum.QuantumParams | None = None,
                with_baseline=True) -> MatchResult:
    """Unfair game: one player evolves a quantum state under its Hamiltonian
    generator, the other evolves a classical mixed strategy under replicator
    dynamics; both advance inside the same RK4 stage structure.

    The baseline re-runs the match fully classically from the induced start.
    """
    params = params or quantum.QuantumParams()
    params.validate()
    if quantum_player not in (0, 1):
        raise ValidationError("quantum_player must be 0 or 1")

    game = g if quantum_player == 0 else g.transposed()
    # row player is quantum below; transpose back at reporting time
    A, B = game.A, game.B
    gamma, mode = params.gamma, params.mode

    from ._kernels import MODE_IDS, rk4_mixed

    s0 = np.concatenate([q_init.amps, c_init.probs.astype(complex)])
    n_steps = max(1, int(round(params.t_max / params.dt)))
    times, states = rk4_mixed(A, B, s0, gamma, params.dt, n_steps, params.stride,
                              MODE_IDS[mode], params.renormalize)
    if not np.all(np.isfinite(states)):
        bad = int(np.nonzero(~np.all(np.isfinite(states), axis=1))[0][0])
        raise NumericalError(f"non-finite state at t={times[bad]}: {states[bad]!r}")
    residuals = np.linalg.norm(_mixed_rhs_batch(A, B, states, gamma, mode), axis=1)
    traj = Trajectory(times=times, states=states, residuals=residuals,
                      meta={"dt": params.dt, "t_max": params.t_max,
                            "stride": params.stride})
    pq = np.abs(traj.states[:, :2]) ** 2
    pq = pq / pq.sum(axis=1, keepdims=True)
    yc = traj.states[:, 2:].real
    joint = np.einsum("ni,nj->nij", pq, yc).reshape(len(traj), 4)
    u_row = joint @ A.ravel()
    u_col = joint @ B.ravel()
    if quantum_player == 0:
        payoffs = np.column_stack([u_row, u_col])
    else:
        payoffs = np.column_stack([u_col, u_row])
    traj.payoffs = payoffs
    traj.norms = np.linalg.norm(traj.states[:, :2], axis=1)
    traj.meta.update({"kind": "mixed", "gamma": gamma, "mode": mode,
                      "quantum_player": quantum_player})

    def project(s):
        p = np.abs(np.asarray(s)[:2]) ** 2
        p0 = p[0] / p.sum()
        return np.array([p0, float(np.real(s[2]))])

    def cycle_project(s):
        q = np.asarray(s)[:2]
        return np.array([q[0].real, q[0].imag, q[1].real, q[1].imag,
                         float(np.real(s[2]))])

    label = detect_attractor(traj, targets=None, project=project,
                             cycle_project=cycle_project)
    acc_a, acc_b = accumulated_payoff(traj)

    baseline = None
    if with_baseline:
        x0 = float(np.abs(q_init.amps[0]) ** 2 / np.sum(np.abs(q_init.amps) ** 2))
        xq = MixedStrategy.from_prob(x0)
        xs = (xq, c_init) if quantum_player == 0 else (c_init, xq)
        btraj = simulate_classical(g, xs[0], xs[1], gamma,
                                   IntegrationParams(params.dt, params.t_max, params.stride))
        bacc_a, bacc_b = accumulated_payoff(btraj)
        baseline = {"acc_a": bacc_a, "acc_b": bacc_b}
    return MatchResult(traj, acc_a, acc_b, quantum_player, label, baseline)


@dataclass
class FixedPointReport:
    passed: bool
    velocity_norm: float
    distribution: JointDistribution
    tol: float


def nash_fixed_point_check(q, g: Game, tol=1e-9) -> FixedPointReport:
    """Quantum-equilibrium oracle: the induced distribution of a quantum
    equilibrium must sit at a classical replicator fixed point.  Only this
    direction is checked; passing says nothing about quantum optimality."""
    dist = induced_distribution(q)
    x, y = dist.marginals()
    dx, dy = classical.replicator_velocity(g, x, y, gamma=1.0)
    vnorm = float(np.linalg.norm(np.concatenate([dx, dy])))
    return FixedPointReport(vnorm < tol, vnorm, dist, tol)
