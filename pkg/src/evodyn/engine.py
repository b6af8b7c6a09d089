"""Fixed-step RK4 integration with convergence, cycle and timeout detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

DEFAULT_DT = 1e-3
DEFAULT_T_MAX = 200.0
DEFAULT_STRIDE = 10
DEFAULT_EPS_CONV = 1e-6
DEFAULT_EPS_CYCLE = 1e-3
CONV_WINDOW = 100          # consecutive samples below eps_conv
TARGET_SNAP = 1e-3         # label a terminal point by a named target within this distance
CYCLE_EXCURSION = 10.0     # excursion must exceed CYCLE_EXCURSION * eps_cycle


@dataclass
class IntegrationParams:
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX
    stride: int = DEFAULT_STRIDE

    def validate(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValidationError("dt and t_max must be positive")
        if self.stride < 1:
            raise ValidationError("stride must be >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    residuals: np.ndarray
    payoffs: np.ndarray | None = None
    norms: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)


@dataclass
class AttractorLabel:
    kind: str                 # "converged" | "cycle" | "timeout"
    target: str | None        # vertex name, "IE", or None for an unnamed point
    terminal: np.ndarray
    residual: float

    def describe(self):
        if self.kind == "converged":
            return self.target if self.target is not None else "point"
        return self.kind


def _check_finite(ds, t, s):
    if not np.all(np.isfinite(ds)):
        raise NumericalError(f"non-finite derivative at t={t}: state={s!r}")


def integrate(field, s0, params: IntegrationParams | None = None, postprocess=None) -> Trajectory:
    """Classical 4-stage Runge-Kutta with fixed step.

    ``field(t, s)`` returns ds/dt; ``postprocess``, when given, is applied to
    the state after every step (clipping, renormalization).  Samples are
    recorded at t=0, every ``stride`` steps, and at the final step.
    """
    params = params or IntegrationParams()
    params.validate()
    dt, stride = params.dt, params.stride
    n_steps = max(1, int(round(params.t_max / dt)))
    s = np.array(s0)
    times, states, residuals = [], [], []

    def sample(t, s):
        ds = field(t, s)
        _check_finite(ds, t, s)
        times.append(t)
        states.append(s.copy())
        residuals.append(float(np.linalg.norm(ds)))

    sample(0.0, s)
    half = dt / 2.0
    for k in range(n_steps):
        t = k * dt
        k1 = field(t, s)
        _check_finite(k1, t, s)
        k2 = field(t + half, s + half * k1)
        _check_finite(k2, t, s)
        k3 = field(t + half, s + half * k2)
        _check_finite(k3, t, s)
        k4 = field(t + dt, s + dt * k3)
        _check_finite(k4, t, s)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if postprocess is not None:
            s = postprocess(s)
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            sample((k + 1) * dt, s)

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        residuals=np.array(residuals),
        meta={"dt": dt, "t_max": params.t_max, "stride": stride},
    )


def velocity_norm(field, state) -> float:
    ds = field(0.0, np.asarray(state))
    _check_finite(ds, 0.0, state)
    return float(np.linalg.norm(ds))


def detect_attractor(
    traj: Trajectory,
    eps_conv: float = DEFAULT_EPS_CONV,
    eps_cycle: float = DEFAULT_EPS_CYCLE,
    targets=None,
    project=None,
    cycle_project=None,
) -> AttractorLabel:
    """Classify a trajectory as converged, cyclic, or timed out.

    Converged: the trailing ``CONV_WINDOW`` samples all have residual below
    ``eps_conv``; the label snaps to the nearest named target within
    ``TARGET_SNAP`` of the (projected) terminal state.  Cycle: some later
    sample returns within ``eps_cycle`` of an earlier one after an excursion
    larger than ``CYCLE_EXCURSION * eps_cycle``.  Otherwise: timeout.

    ``targets`` is a list of (name, point) pairs in the projected space;
    ``project`` maps a raw state snapshot to that space (identity default).
    ``cycle_project``, when given, maps states to the space used for
    recurrence detection (quantum callers pass the raw amplitudes there,
    since a state can loop in phase while its measurement statistics sit
    still).
    """
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    if len(traj) < 2:
        raise ValidationError("attractor detection needs at least 2 samples")

    if project is None:
        points = np.asarray(traj.states)
        if np.iscomplexobj(points):
            points = np.abs(points)
    else:
        points = np.array([project(s) for s in traj.states])
    terminal = points[-1]
    residual = float(traj.residuals[-1])

    below = traj.residuals < eps_conv
    trailing = 0
    for b in below[::-1]:
        if not b:
            break
        trailing += 1
    if trailing >= CONV_WINDOW:
        target = None
        if targets:
            dists = [(np.linalg.norm(terminal - np.asarray(p)), name) for name, p in targets]
            d, name = min(dists, key=lambda z: z[0])
            if d < TARGET_SNAP:
                target = name
        return AttractorLabel("converged", target, terminal, residual)

    if cycle_project is not None:
        cycle_points = np.array([cycle_project(s) for s in traj.states])
    else:
        cycle_points = points
    if _has_cycle(cycle_points, eps_cycle):
        return AttractorLabel("cycle", None, terminal, residual)
    return AttractorLabel("timeout", None, terminal, residual)


def _has_cycle(points, eps_cycle):
    n = len(points)
    excursion = CYCLE_EXCURSION * eps_cycle
    anchors = sorted(set([0, n // 10, n // 5, n // 3, n // 2]))
    for a in anchors:
        d = np.linalg.norm(points - points[a], axis=1)
        far = np.nonzero(d[a:] > excursion)[0]
        if len(far) == 0:
            continue
        m = a + far[0]
        if np.any(d[m:] < eps_cycle):
            return True
    return False
