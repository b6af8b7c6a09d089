"""Replicator velocity fields, velocity operators and sign diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryPointError, NoInternalEquilibriumError, ValidationError
from .games import Game, MixedStrategy, internal_equilibrium


@dataclass
class VelocityOperator:
    """Partial velocities and the diagonal operators built from them."""

    vx: np.ndarray
    vy: np.ndarray

    @property
    def Vx(self):
        return np.diag(self.vx)

    @property
    def Vy(self):
        return np.diag(self.vy)

    @property
    def Vjoint(self):
        """Kronecker sum I (x) Vy + Vx (x) I acting on the joint distribution."""
        eye = np.eye(2)
        return np.kron(eye, self.Vy) + np.kron(self.Vx, eye)


@dataclass
class SymmetricField:
    """Payoff gaps of a symmetric game; delta(z) = ac*z + bd*(1-z)."""

    ac: float
    bd: float
    gamma: float = 1.0

    @classmethod
    def from_game(cls, g: Game, gamma=1.0):
        a, b = g.A[0]
        c, d = g.A[1]
        return cls(ac=a - c, bd=b - d, gamma=gamma)


def symmetric_delta(f: SymmetricField, z: float) -> float:
    """Payoff gap between the two pure strategies against an opponent playing
    strategy 0 with probability z."""
    if not 0.0 <= z <= 1.0:
        raise ValidationError(f"z must lie in [0, 1], got {z}")
    return f.ac * z + f.bd * (1.0 - z)


def replicator_velocity(g: Game, x: MixedStrategy, y: MixedStrategy, gamma=1.0):
    """dx_i = gamma*x_i*((Ay)_i - x^T A y), dy_j = gamma*y_j*((x^T B)_j - x^T B y)."""
    if gamma < 0:
        raise ValidationError("gamma must be non-negative")
    xv, yv = x.probs, y.probs
    ay = g.A @ yv
    xb = xv @ g.B
    ua = xv @ ay
    ub = xb @ yv
    dx = gamma * xv * (ay - ua)
    dy = gamma * yv * (xb - ub)
    return dx, dy


def velocity_operator(g: Game, x: MixedStrategy, y: MixedStrategy, gamma=1.0) -> VelocityOperator:
    """Partial velocities v_i = gamma*(payoff of pure i minus current payoff)."""
    xv, yv = x.probs, y.probs
    ay = g.A @ yv
    xb = xv @ g.B
    vx = gamma * (ay - xv @ ay)
    vy = gamma * (xb - xb @ yv)
    return VelocityOperator(vx=vx, vy=vy)


def _delta_row(g: Game, y0: float) -> float:
    """(Ay)_0 - (Ay)_1 as a function of the opponent's first-strategy share."""
    a, b = g.A[0]
    c, d = g.A[1]
    return (a - c) * y0 + (b - d) * (1.0 - y0)


def _delta_col(g: Game, x0: float) -> float:
    """(x^T B)_0 - (x^T B)_1 as a function of the row player's first-strategy share."""
    ap, bp = g.B[0]
    cp, dp = g.B[1]
    return (ap - bp) * x0 + (cp - dp) * (1.0 - x0)


def quadrant_signature(g: Game, x: MixedStrategy, y: MixedStrategy):
    """Signs of (dx_0, dy_0) at an interior point, from the exact factorization
    dx_0 = gamma*x_0*x_1*delta_row(y_0); constant on each open quadrant around
    the internal equilibrium."""
    if internal_equilibrium(g) is None:
        raise NoInternalEquilibriumError("game has no internal equilibrium")
    if not (0.0 < x.p < 1.0 and 0.0 < y.p < 1.0):
        raise BoundaryPointError(f"point ({x.p}, {y.p}) is not strictly interior")
    sx = int(np.sign(_delta_row(g, y.p)))
    sy = int(np.sign(_delta_col(g, x.p)))
    return sx, sy


@dataclass
class AdjustmentReport:
    frozen_opponent: bool
    min_du_a: float
    min_du_b: float


def adjustment_diagnostic(g: Game, traj, frozen_opponent: bool) -> AdjustmentReport:
    """Minimum observed payoff growth rate along a classical trajectory.

    With the opponent frozen the rate is the analytic variance form
    gamma * sum_i x_i * ((Ay)_i - u)^2 >= 0, evaluated at each sample.
    Along a joint trajectory it is the finite-difference slope of the
    recorded payoffs; its sign is not guaranteed and only reported.
    """
    states = np.asarray(traj.states, dtype=float)
    if states.size == 0:
        raise ValidationError("empty trajectory")
    gamma = traj.meta.get("gamma", 1.0)
    if frozen_opponent:
        mins_a, mins_b = [], []
        for s in states:
            xv, yv = s[:2], s[2:]
            ay = g.A @ yv
            xb = xv @ g.B
            ua, ub = xv @ ay, xb @ yv
            mins_a.append(gamma * float(xv @ (ay - ua) ** 2))
            mins_b.append(gamma * float(yv @ (xb - ub) ** 2))
        return AdjustmentReport(True, min(mins_a), min(mins_b))
    payoffs = np.asarray(traj.payoffs, dtype=float)
    if len(payoffs) < 2:
        raise ValidationError("joint diagnostic needs at least 2 samples")
    dt = np.diff(traj.times)
    slopes = np.diff(payoffs, axis=0) / dt[:, None]
    return AdjustmentReport(False, float(slopes[:, 0].min()), float(slopes[:, 1].min()))


def replicator_field(g: Game, gamma=1.0):
    """Derivative function over the packed state s = (x_0, x_1, y_0, y_1)."""
    A, B = g.A, g.B

    def field(t, s):
        xv, yv = s[:2], s[2:]
        ay = A @ yv
        xb = xv @ B
        dx = gamma * xv * (ay - xv @ ay)
        dy = gamma * yv * (xb - xb @ yv)
        return np.concatenate([dx, dy])

    return field


def batch_replicator_field(As, Bs, gamma=1.0):
    """Vectorized replicator field over a batch of packed states (N, 4).

    As/Bs are either a single (2, 2) matrix shared by all rows or per-row
    stacks of shape (N, 2, 2).
    """
    As = np.asarray(As, dtype=float)
    Bs = np.asarray(Bs, dtype=float)

    def field(t, s):
        x, y = s[:, :2], s[:, 2:]
        if As.ndim == 2:
            ay = y @ As.T
            xb = x @ Bs
        else:
            ay = np.einsum("nij,nj->ni", As, y)
            xb = np.einsum("ni,nij->nj", x, Bs)
        ua = np.sum(x * ay, axis=1, keepdims=True)
        ub = np.sum(xb * y, axis=1, keepdims=True)
        dx = gamma * x * (ay - ua)
        dy = gamma * y * (xb - ub)
        return np.concatenate([dx, dy], axis=1)

    return field


def simplex_postprocess(s):
    """Clip each player's 2-vector to [0, 1] and renormalize; works on (4,)
    states or (N, 4) batches."""
    s = np.clip(s, 0.0, 1.0)
    if s.ndim == 1:
        s[:2] /= s[:2].sum()
        s[2:] /= s[2:].sum()
    else:
        s[:, :2] /= s[:, :2].sum(axis=1, keepdims=True)
        s[:, 2:] /= s[:, 2:].sum(axis=1, keepdims=True)
    return s
