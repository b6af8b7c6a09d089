"""Quantum strategy states, Born-rule payoffs and replicator-style Hamiltonians.

The canonical state-dependent generator is the worked symmetric form

    H_A[a, b] = gamma * <a|psi> * (u^A(|a>, opp) - u^A(|b>, opp))

which has zero diagonal and is generically non-Hermitian; three evolution
modes are supported:

* ``h-def``      the generator as defined, state renormalized after each step;
* ``hermitized`` (H + H^dagger) / 2, a proper Hermitian Hamiltonian;
* ``tangent``    the literal first-order flow d psi = gamma * delta * (-psi_1, psi_0),
                 a norm-preserving rotation in the amplitude plane.

hbar is fixed to 1 throughout; gamma is the only rate knob.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import IntegrationParams, Trajectory, integrate
from .errors import NonProductStateError, NumericalError, ValidationError
from .games import Game, JointDistribution, MixedStrategy, PayoffPair, induced_distribution

NORM_TOL = 1e-9
PURITY_TOL = 1e-9
MODES = ("h-def", "hermitized", "tangent")


def _as_amps(v, n, name):
    v = np.asarray(v, dtype=complex)
    if v.shape != (n,):
        raise ValidationError(f"{name} must have {n} amplitudes")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite amplitudes")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"{name} norm {norm} deviates from 1 by more than {NORM_TOL}")
    v.setflags(write=False)
    return v


@dataclass
class LocalQuantumState:
    amps: np.ndarray

    def __post_init__(self):
        self.amps = _as_amps(self.amps, 2, "local state")

    @classmethod
    def from_angles(cls, theta, alpha=0.0):
        """psi = (e^{i alpha} cos(theta), e^{-i alpha} sin(theta))."""
        return cls(np.array([np.exp(1j * alpha) * np.cos(theta),
                             np.exp(-1j * alpha) * np.sin(theta)]))

    def probabilities(self):
        p = np.abs(self.amps) ** 2
        return p / p.sum()


@dataclass
class JointQuantumState:
    amps: np.ndarray
    product_tag: tuple | None = None

    def __post_init__(self):
        self.amps = _as_amps(self.amps, 4, "joint state")
        if self.product_tag is not None:
            pa, pb = self.product_tag
            prod = np.kron(pa.amps, pb.amps)
            if np.max(np.abs(self.amps - prod)) > 1e-12:
                raise ValidationError("product_tag does not reproduce the joint amplitudes")

    @classmethod
    def from_locals(cls, pa: LocalQuantumState, pb: LocalQuantumState):
        return cls(np.kron(pa.amps, pb.amps), product_tag=(pa, pb))


@dataclass
class ReducedState:
    """2x2 reduced density matrix of one player; pure iff purity ~ 1."""

    rho: np.ndarray
    purity: float

    @property
    def pure(self):
        return self.purity >= 1.0 - PURITY_TOL


def embed_classical(x: MixedStrategy, y: MixedStrategy) -> JointQuantumState:
    """|psi> = sum_ij sqrt(x_i y_j) |ij>, the real non-negative embedding."""
    pa = LocalQuantumState(np.sqrt(x.probs).astype(complex))
    pb = LocalQuantumState(np.sqrt(y.probs).astype(complex))
    return JointQuantumState.from_locals(pa, pb)


def quantum_payoff(q: JointQuantumState, g: Game) -> PayoffPair:
    """Born-rule payoffs: measure in the computational basis, pay off classically."""
    p = induced_distribution(q).probs
    return PayoffPair(float(p @ g.A.ravel()), float(p @ g.B.ravel()))


def reduced_state(q: JointQuantumState, keep: int, strict: bool = False):
    """Single-player marginal of a joint state.

    Product states yield the kept local factor (up to global phase); other
    states yield a ReducedState density matrix, or raise in strict mode.
    """
    if keep not in (0, 1):
        raise ValidationError("keep must be 0 (row player) or 1 (column player)")
    if q.product_tag is not None:
        return q.product_tag[keep]
    m = q.amps.reshape(2, 2)
    rho = m @ m.conj().T if keep == 0 else m.T @ m.conj()
    purity = float(np.real(np.trace(rho @ rho)))
    if purity >= 1.0 - PURITY_TOL:
        w, v = np.linalg.eigh(rho)
        vec = v[:, np.argmax(w)]
        # fix global phase: make the largest component real non-negative
        k = np.argmax(np.abs(vec))
        vec = vec * np.exp(-1j * np.angle(vec[k]))
        return LocalQuantumState(vec / np.linalg.norm(vec))
    if strict:
        raise NonProductStateError("joint state does not factor into a product")
    return ReducedState(rho=rho, purity=purity)


def _opponent_probs(opp):
    if isinstance(opp, LocalQuantumState):
        return opp.probabilities()
    if isinstance(opp, MixedStrategy):
        return opp.probs
    if isinstance(opp, ReducedState):
        return np.real(np.diag(opp.rho))
    raise ValidationError(f"unsupported opponent representation: {type(opp).__name__}")


def quantum_partial_velocity(g: Game, q: JointQuantumState, player: int) -> np.ndarray:
    """v_i = payoff of pinning the own factor to |i> against the opponent's
    reduced state, minus the current joint payoff."""
    opp = reduced_state(q, 1 - player, strict=True)
    probs = _opponent_probs(opp)
    u = quantum_payoff(q, g)
    if player == 0:
        return g.A @ probs - u.u_a
    return probs @ g.B - u.u_b


def hamiltonian_local(g: Game, own: LocalQuantumState, opp, gamma=1.0,
                      mode="h-def", player=0):
    """State-dependent 2x2 generator for one player.

    ``opp`` may be a LocalQuantumState, a MixedStrategy, or a ReducedState;
    only its induced probabilities enter the payoff gaps.  In ``tangent``
    mode a TangentFlow marker is returned instead of a matrix.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown Hamiltonian mode {mode!r}")
    probs = _opponent_probs(opp)
    if player == 0:
        u = g.A @ probs
    else:
        u = probs @ g.B
    if mode == "tangent":
        return TangentFlow(gamma=gamma, delta=float(u[0] - u[1]))
    h = np.zeros((2, 2), dtype=complex)
    h[0, 1] = gamma * own.amps[0] * (u[0] - u[1])
    h[1, 0] = gamma * own.amps[1] * (u[1] - u[0])
    if mode == "hermitized":
        h = (h + h.conj().T) / 2.0
    return h


@dataclass
class TangentFlow:
    """Marker directing the integrator to the literal first-order flow
    d psi/dt = gamma * delta * (-psi_1, psi_0)."""

    gamma: float
    delta: float

    def apply(self, psi):
        return self.gamma * self.delta * np.array([-psi[1], psi[0]])


def general_form_generator(g: Game, opp: LocalQuantumState, gamma=1.0, player=0):
    """Experimental: the alternative generator display with the extra
    -i * sum_k <k|opp> scalar factor applied multiplicatively.  Inconsistent
    with the worked symmetric form; kept for comparison only."""
    probs = _opponent_probs(opp)
    u = g.A @ probs if player == 0 else probs @ g.B
    gaps = u[:, None] - u[None, :]
    return gamma * (-1j) * np.sum(opp.amps) * gaps


def product_hamiltonian(ha, hb) -> np.ndarray:
    """Kronecker sum H_A (x) I + I (x) H_B on the joint 4-dim space."""
    ha = np.asarray(ha, dtype=complex)
    hb = np.asarray(hb, dtype=complex)
    if not (np.all(np.isfinite(ha)) and np.all(np.isfinite(hb))):
        raise ValidationError("Hamiltonian factors must be finite")
    eye = np.eye(2)
    return np.kron(ha, eye) + np.kron(eye, hb)


def schrodinger_step(state, h, dt, renormalize=True):
    """One RK4 step of d psi/dt = -i H psi with H held fixed over the step."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValidationError("Hamiltonian has non-finite entries")
    s = np.asarray(state, dtype=complex)

    def f(v):
        return -1j * (h @ v)

    k1 = f(s)
    k2 = f(s + dt / 2 * k1)
    k3 = f(s + dt / 2 * k2)
    k4 = f(s + dt * k3)
    out = s + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    if renormalize:
        out = out / np.linalg.norm(out)
    return out


@dataclass
class QuantumParams:
    gamma: float = 1.0
    dt: float = 1e-3
    t_max: float = 200.0
    stride: int = 10
    mode: str = "h-def"
    renormalize: bool = True

    def validate(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown Hamiltonian mode {self.mode!r}")
        if self.gamma < 0:
            raise ValidationError("gamma must be non-negative")
        IntegrationParams(self.dt, self.t_max, self.stride).validate()


def _pair_field(g: Game, gamma, mode):
    """Derivative over the packed complex state (joint 4, psi 2, zeta 2).

    The joint vector evolves under the Kronecker-sum Hamiltonian rebuilt from
    the tracked local factors at every stage; the locals evolve under their
    own generators, so the product structure is preserved up to integrator
    error (checked by the product-preservation diagnostic).
    """
    A, B = g.A, g.B

    def field(t, s):
        psi, zeta = s[4:6], s[6:8]
        p_psi = np.abs(psi) ** 2
        p_zeta = np.abs(zeta) ** 2
        p_psi = p_psi / p_psi.sum()
        p_zeta = p_zeta / p_zeta.sum()
        ua = A @ p_zeta
        ub = p_psi @ B
        da, db = ua[0] - ua[1], ub[0] - ub[1]
        if mode == "tangent":
            dpsi = gamma * da * np.array([-psi[1], psi[0]])
            dzeta = gamma * db * np.array([-zeta[1], zeta[0]])
            djoint = np.kron(dpsi, zeta) + np.kron(psi, dzeta)
            return np.concatenate([djoint, dpsi, dzeta])
        ha = np.array([[0.0, gamma * psi[0] * da], [gamma * psi[1] * (-da), 0.0]], dtype=complex)
        hb = np.array([[0.0, gamma * zeta[0] * db], [gamma * zeta[1] * (-db), 0.0]], dtype=complex)
        if mode == "hermitized":
            ha = (ha + ha.conj().T) / 2.0
            hb = (hb + hb.conj().T) / 2.0
        dpsi = -1j * (ha @ psi)
        dzeta = -1j * (hb @ zeta)
        djoint = -1j * (product_hamiltonian(ha, hb) @ s[:4])
        return np.concatenate([djoint, dpsi, dzeta])

    return field


def _renorm_pair(s):
    s[:4] /= np.linalg.norm(s[:4])
    s[4:6] /= np.linalg.norm(s[4:6])
    s[6:8] /= np.linalg.norm(s[6:8])
    return s


def _pair_rhs_batch(g: Game, states, gamma, mode):
    """Vectorized evaluation of the pair derivative at many sampled states;
    used to attach residual norms after a kernel integration."""
    A, B = g.A, g.B
    psi, zeta = states[:, 4:6], states[:, 6:8]
    pp = np.abs(psi) ** 2
    pp = pp / pp.sum(axis=1, keepdims=True)
    pz = np.abs(zeta) ** 2
    pz = pz / pz.sum(axis=1, keepdims=True)
    da = (A[0, 0] - A[1, 0]) * pz[:, 0] + (A[0, 1] - A[1, 1]) * pz[:, 1]
    db = (B[0, 0] - B[0, 1]) * pp[:, 0] + (B[1, 0] - B[1, 1]) * pp[:, 1]
    out = np.empty_like(states)
    if mode == "tangent":
        dpsi = gamma * da[:, None] * np.column_stack([-psi[:, 1], psi[:, 0]])
        dzeta = gamma * db[:, None] * np.column_stack([-zeta[:, 1], zeta[:, 0]])
    else:
        ha01 = gamma * psi[:, 0] * da
        ha10 = gamma * psi[:, 1] * (-da)
        hb01 = gamma * zeta[:, 0] * db
        hb10 = gamma * zeta[:, 1] * (-db)
        if mode == "hermitized":
            ha01 = 0.5 * (ha01 + ha10.conj())
            ha10 = ha01.conj()
            hb01 = 0.5 * (hb01 + hb10.conj())
            hb10 = hb01.conj()
        dpsi = -1j * np.column_stack([ha01 * psi[:, 1], ha10 * psi[:, 0]])
        dzeta = -1j * np.column_stack([hb01 * zeta[:, 1], hb10 * zeta[:, 0]])
    if mode == "tangent":
        j = states[:, :4].reshape(-1, 2, 2)
        djoint = (np.einsum("ni,nj->nij", dpsi, zeta)
                  + np.einsum("ni,nj->nij", psi, dzeta)).reshape(-1, 4)
        del j
    else:
        j = states[:, :4]
        djoint = -1j * np.column_stack([
            ha01 * j[:, 2] + hb01 * j[:, 1],
            ha01 * j[:, 3] + hb10 * j[:, 0],
            ha10 * j[:, 0] + hb01 * j[:, 3],
            ha10 * j[:, 1] + hb10 * j[:, 2],
        ])
    out[:, :4] = djoint
    out[:, 4:6] = dpsi
    out[:, 6:8] = dzeta
    return out


def evolve_quantum(q0: JointQuantumState, g: Game, params: QuantumParams | None = None) -> Trajectory:
    """Integrate both players' quantum strategies from a product start.

    Returns a trajectory whose state rows pack (joint amps, psi, zeta); the
    payoffs, induced norms and pre-renormalization drift are attached as
    sample channels.
    """
    params = params or QuantumParams()
    params.validate()
    if q0.product_tag is None:
        factor = reduced_state(q0, 0, strict=True)
        other = reduced_state(q0, 1, strict=True)
        q0 = JointQuantumState.from_locals(factor, other)
    psi, zeta = q0.product_tag
    s0 = np.concatenate([q0.amps, psi.amps, zeta.amps]).astype(complex)

    from ._kernels import MODE_IDS, rk4_quantum_pair

    n_steps = max(1, int(round(params.t_max / params.dt)))
    times, states, norms = rk4_quantum_pair(
        g.A, g.B, s0, params.gamma, params.dt, n_steps, params.stride,
        MODE_IDS[params.mode], params.renormalize)
    if not np.all(np.isfinite(states)):
        bad = int(np.nonzero(~np.all(np.isfinite(states), axis=1))[0][0])
        raise NumericalError(f"non-finite state at t={times[bad]}: {states[bad]!r}")
    residuals = np.linalg.norm(
        _pair_rhs_batch(g, states, params.gamma, params.mode), axis=1)
    traj = Trajectory(times=times, states=states, residuals=residuals,
                      norms=np.linalg.norm(states[:, :4], axis=1),
                      meta={"dt": params.dt, "t_max": params.t_max,
                            "stride": params.stride,
                            "prenorm_norms": norms})

    probs = np.abs(traj.states[:, :4]) ** 2
    probs = probs / probs.sum(axis=1, keepdims=True)
    traj.payoffs = np.column_stack([probs @ g.A.ravel(), probs @ g.B.ravel()])
    traj.meta.update({"kind": "quantum", "gamma": params.gamma, "mode": params.mode,
                      "renormalize": params.renormalize})
    return traj


def joint_probabilities(traj: Trajectory) -> np.ndarray:
    """Induced distribution per sample of a quantum trajectory."""
    p = np.abs(traj.states[:, :4]) ** 2
    return p / p.sum(axis=1, keepdims=True)
