import numpy as np
import pytest

from evodyn.errors import NonProductStateError, ValidationError
from evodyn.experiments import preset_game
from evodyn.games import MixedStrategy
from evodyn.quantum import (
    MODES,
    JointQuantumState,
    LocalQuantumState,
    QuantumParams,
    ReducedState,
    TangentFlow,
    embed_classical,
    evolve_quantum,
    hamiltonian_local,
    joint_probabilities,
    product_hamiltonian,
    quantum_partial_velocity,
    quantum_payoff,
    reduced_state,
    schrodinger_step,
)

TF = preset_game("trading-farming")
PD = preset_game("prisoners-dilemma")


def local(theta, alpha=0.0):
    return LocalQuantumState.from_angles(theta, alpha)


class TestStates:
    def test_angle_parameterization(self):
        s = local(0.0)
        assert np.allclose(s.amps, [1, 0])
        s = local(np.pi / 4, 0.3)
        assert np.allclose(np.abs(s.amps), [np.sqrt(0.5), np.sqrt(0.5)])
        assert np.angle(s.amps[0]) == pytest.approx(0.3)
        assert np.angle(s.amps[1]) == pytest.approx(-0.3)

    def test_probabilities_sum_to_one(self):
        p = local(1.234, -0.7).probabilities()
        assert p.sum() == pytest.approx(1.0, abs=1e-15)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValidationError):
            LocalQuantumState(np.array([1.0, 0.5]))
        with pytest.raises(ValidationError):
            JointQuantumState(np.array([1.0, 0.5, 0, 0]))

    def test_product_tag_consistency_enforced(self):
        a, b = local(0.3), local(1.0)
        with pytest.raises(ValidationError):
            JointQuantumState(np.kron(a.amps, b.amps), product_tag=(a, local(1.1)))

    def test_from_locals_is_kron(self):
        a, b = local(0.3, 0.2), local(1.0, -0.4)
        q = JointQuantumState.from_locals(a, b)
        assert np.allclose(q.amps, np.kron(a.amps, b.amps))


class TestEmbeddingAndPayoff:
    def test_embedding_amplitudes_are_sqrt_probs(self):
        q = embed_classical(MixedStrategy.from_prob(0.36), MixedStrategy.from_prob(0.25))
        assert np.allclose(q.amps, np.sqrt([0.09, 0.27, 0.16, 0.48]))

    def test_payoff_matches_classical_at_embedding(self):
        x, y = MixedStrategy.from_prob(0.6), MixedStrategy.from_prob(0.7)
        u = quantum_payoff(embed_classical(x, y), TF)
        assert u.u_a == pytest.approx(x.probs @ TF.A @ y.probs, abs=1e-14)
        assert u.u_b == pytest.approx(x.probs @ TF.B @ y.probs, abs=1e-14)

    def test_phases_do_not_change_payoff(self):
        a = JointQuantumState.from_locals(local(0.5), local(1.1))
        b = JointQuantumState.from_locals(local(0.5, 0.9), local(1.1, -0.4))
        ua, ub = quantum_payoff(a, TF), quantum_payoff(b, TF)
        assert ua.u_a == pytest.approx(ub.u_a, abs=1e-14)


class TestReducedState:
    def test_product_state_returns_factor(self):
        a, b = local(0.4, 0.1), local(1.2)
        q = JointQuantumState.from_locals(a, b)
        assert reduced_state(q, 0) is a
        assert reduced_state(q, 1) is b

    def test_untagged_product_recovered(self):
        a, b = local(0.4), local(1.2)
        q = JointQuantumState(np.kron(a.amps, b.amps))
        got = reduced_state(q, 0)
        assert isinstance(got, LocalQuantumState)
        assert np.allclose(np.abs(got.amps), np.abs(a.amps), atol=1e-12)

    def test_entangled_gives_density_matrix(self):
        bell = JointQuantumState(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        r = reduced_state(bell, 0)
        assert isinstance(r, ReducedState)
        assert not r.pure
        assert r.purity == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(r.rho, np.eye(2) / 2)

    def test_strict_mode_raises_on_entanglement(self):
        bell = JointQuantumState(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        with pytest.raises(NonProductStateError):
            reduced_state(bell, 0, strict=True)


class TestPartialVelocity:
    def test_zero_at_internal_equilibrium(self):
        q = embed_classical(MixedStrategy.from_prob(0.5), MixedStrategy.from_prob(0.5))
        assert np.allclose(quantum_partial_velocity(TF, q, 0), 0, atol=1e-14)
        assert np.allclose(quantum_partial_velocity(TF, q, 1), 0, atol=1e-14)

    def test_matches_classical_gap_at_embedding(self):
        x, y = MixedStrategy.from_prob(0.6), MixedStrategy.from_prob(0.7)
        v = quantum_partial_velocity(TF, embed_classical(x, y), 0)
        ay = TF.A @ y.probs
        assert np.allclose(v, ay - x.probs @ ay, atol=1e-12)


class TestHamiltonians:
    def test_worked_form_entries(self):
        own = local(np.pi / 4)        # equal amplitudes 1/sqrt(2)
        opp = MixedStrategy.from_prob(0.0)   # column player pure F
        h = hamiltonian_local(TF, own, opp)
        # payoff gap u_T - u_F against pure F is 0 - 0.5 = -0.5
        assert h[0, 0] == 0 and h[1, 1] == 0
        assert h[0, 1] == pytest.approx(np.sqrt(0.5) * -0.5)
        assert h[1, 0] == pytest.approx(np.sqrt(0.5) * 0.5)

    def test_hermitized_is_hermitian(self):
        h = hamiltonian_local(PD, local(0.8, 0.3), local(0.4), mode="hermitized")
        assert np.allclose(h, h.conj().T)

    def test_tangent_returns_flow(self):
        flow = hamiltonian_local(TF, local(0.2), local(0.9), mode="tangent")
        assert isinstance(flow, TangentFlow)
        d = flow.apply(np.array([1.0, 0.0]))
        assert np.allclose(d, flow.gamma * flow.delta * np.array([0.0, 1.0]))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            hamiltonian_local(TF, local(0.2), local(0.9), mode="unitary")

    def test_kronecker_sum(self):
        ha = np.array([[0, 1j], [-1j, 0]])
        hb = np.array([[1, 0], [0, -1]], dtype=complex)
        hj = product_hamiltonian(ha, hb)
        assert hj.shape == (4, 4)
        assert np.allclose(hj, np.kron(ha, np.eye(2)) + np.kron(np.eye(2), hb))


class TestSchrodingerStep:
    def test_hermitian_step_preserves_norm(self):
        h = np.array([[0.0, 0.7], [0.7, 0.2]], dtype=complex)
        out = schrodinger_step(np.array([1, 0], dtype=complex), h, 1e-3,
                               renormalize=False)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)

    def test_matches_exact_propagator(self):
        # sigma_x rotation: psi(t) = cos(t)|0> - i sin(t)|1>
        h = np.array([[0, 1], [1, 0]], dtype=complex)
        s = np.array([1, 0], dtype=complex)
        for _ in range(1000):
            s = schrodinger_step(s, h, 1e-3, renormalize=False)
        assert s[0] == pytest.approx(np.cos(1.0), abs=1e-10)
        assert s[1] == pytest.approx(-1j * np.sin(1.0), abs=1e-10)


class TestEvolution:
    def test_renormalized_norms_stay_unit(self):
        q0 = JointQuantumState.from_locals(local(0.4, 0.3), local(1.1, -0.2))
        traj = evolve_quantum(q0, TF, QuantumParams(t_max=5.0))
        assert np.max(np.abs(traj.norms - 1.0)) < 1e-12

    def test_probabilities_normalized_per_sample(self):
        q0 = JointQuantumState.from_locals(local(0.4), local(1.1))
        traj = evolve_quantum(q0, TF, QuantumParams(t_max=2.0))
        p = joint_probabilities(traj)
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("mode", MODES)
    def test_product_structure_preserved(self, mode):
        q0 = JointQuantumState.from_locals(local(0.7, 0.1), local(0.3))
        traj = evolve_quantum(q0, TF, QuantumParams(mode=mode, t_max=5.0))
        prod = np.einsum("ni,nj->nij", traj.states[:, 4:6],
                         traj.states[:, 6:8]).reshape(len(traj), 4)
        assert np.max(np.abs(traj.states[:, :4] - prod)) < 1e-8

    def test_tangent_mode_preserves_norm_without_renormalization(self):
        q0 = JointQuantumState.from_locals(local(0.4), local(1.1))
        traj = evolve_quantum(q0, TF, QuantumParams(
            mode="tangent", renormalize=False, t_max=10.0))
        assert np.max(np.abs(traj.norms - 1.0)) < 1e-9

    def test_embedded_equilibrium_is_stationary(self):
        q0 = embed_classical(MixedStrategy.from_prob(0.5), MixedStrategy.from_prob(0.5))
        traj = evolve_quantum(q0, TF, QuantumParams(t_max=2.0))
        assert np.max(np.abs(traj.states - traj.states[0])) < 1e-12

    def test_invalid_params_rejected(self):
        q0 = embed_classical(MixedStrategy.from_prob(0.3), MixedStrategy.from_prob(0.4))
        with pytest.raises(ValidationError):
            evolve_quantum(q0, TF, QuantumParams(mode="nope"))
        with pytest.raises(ValidationError):
            evolve_quantum(q0, TF, QuantumParams(dt=-1.0))
