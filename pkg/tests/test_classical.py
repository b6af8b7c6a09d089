import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evodyn.classical import (
    SymmetricField,
    adjustment_diagnostic,
    batch_replicator_field,
    quadrant_signature,
    replicator_field,
    replicator_velocity,
    simplex_postprocess,
    symmetric_delta,
    velocity_operator,
)
from evodyn.errors import BoundaryPointError, NoInternalEquilibriumError, ValidationError
from evodyn.experiments import preset_game, simulate_classical
from evodyn.games import Game, MixedStrategy

TF = preset_game("trading-farming")


def ms(p):
    return MixedStrategy.from_prob(p)


class TestReplicatorVelocity:
    def test_trading_farming_interior_point(self):
        dx, dy = replicator_velocity(TF, ms(0.6), ms(0.7))
        assert dx == pytest.approx([0.048, -0.048], abs=1e-15)
        assert dy == pytest.approx([0.021, -0.021], abs=1e-15)

    def test_gamma_scales_linearly(self):
        dx1, dy1 = replicator_velocity(TF, ms(0.3), ms(0.8), gamma=1.0)
        dx2, dy2 = replicator_velocity(TF, ms(0.3), ms(0.8), gamma=2.5)
        assert np.allclose(dx2, 2.5 * dx1) and np.allclose(dy2, 2.5 * dy1)

    def test_vertices_are_fixed_points(self):
        for p in (0.0, 1.0):
            for q in (0.0, 1.0):
                dx, dy = replicator_velocity(TF, ms(p), ms(q))
                assert np.all(dx == 0) and np.all(dy == 0)

    def test_internal_equilibrium_is_fixed(self):
        dx, dy = replicator_velocity(TF, ms(0.5), ms(0.5))
        assert np.max(np.abs(dx)) < 1e-15 and np.max(np.abs(dy)) < 1e-15

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValidationError):
            replicator_velocity(TF, ms(0.5), ms(0.5), gamma=-1.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_components_sum_to_zero(self, p, q):
        dx, dy = replicator_velocity(TF, ms(p), ms(q))
        assert abs(dx.sum()) < 1e-15 and abs(dy.sum()) < 1e-15


class TestVelocityOperator:
    def test_trading_farming_values(self):
        vo = velocity_operator(TF, ms(0.6), ms(0.7))
        assert vo.vx == pytest.approx([0.08, -0.12], abs=1e-15)

    def test_diagonal_operator_shapes(self):
        vo = velocity_operator(TF, ms(0.6), ms(0.7))
        assert vo.Vx.shape == (2, 2) and vo.Vjoint.shape == (4, 4)
        assert np.allclose(np.diag(vo.Vx), vo.vx)

    def test_joint_is_kronecker_sum(self):
        vo = velocity_operator(TF, ms(0.3), ms(0.9))
        expect = np.kron(np.diag(vo.vx), np.eye(2)) + np.kron(np.eye(2), np.diag(vo.vy))
        assert np.allclose(vo.Vjoint, expect)

    def test_velocity_recovered_from_operator(self):
        x, y = ms(0.25), ms(0.6)
        vo = velocity_operator(TF, x, y)
        dx, dy = replicator_velocity(TF, x, y)
        assert np.allclose(x.probs * vo.vx, dx)
        assert np.allclose(y.probs * vo.vy, dy)


class TestSymmetricDelta:
    def test_trading_farming_gap(self):
        f = SymmetricField.from_game(TF)
        assert (f.ac, f.bd) == (0.5, -0.5)
        assert symmetric_delta(f, 0.5) == 0.0
        assert symmetric_delta(f, 1.0) == 0.5
        assert symmetric_delta(f, 0.0) == -0.5

    def test_out_of_range_rejected(self):
        f = SymmetricField.from_game(TF)
        with pytest.raises(ValidationError):
            symmetric_delta(f, 1.2)

    def test_factorization_matches_velocity(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            g = Game(rng.uniform(-2, 2, (2, 2)))
            p, q = rng.uniform(0, 1, 2)
            f = SymmetricField.from_game(g)
            dx, _ = replicator_velocity(g, ms(p), ms(q))
            assert dx[0] == pytest.approx(p * (1 - p) * symmetric_delta(f, q), abs=1e-12)


class TestQuadrantSignature:
    def test_trading_farming_example(self):
        assert quadrant_signature(TF, ms(0.6), ms(0.3)) == (-1, 1)

    def test_all_four_quadrants_distinct(self):
        sigs = {quadrant_signature(TF, ms(x), ms(y))
                for x in (0.2, 0.8) for y in (0.2, 0.8)}
        assert len(sigs) == 4

    def test_no_internal_equilibrium_raises(self):
        with pytest.raises(NoInternalEquilibriumError):
            quadrant_signature(preset_game("dominant"), ms(0.5), ms(0.5))

    def test_boundary_point_raises(self):
        with pytest.raises(BoundaryPointError):
            quadrant_signature(TF, ms(1.0), ms(0.5))


class TestAdjustmentDiagnostic:
    def test_frozen_opponent_variance_nonnegative(self):
        traj = simulate_classical(TF, ms(0.6), ms(0.7))
        rep = adjustment_diagnostic(TF, traj, frozen_opponent=True)
        assert rep.frozen_opponent
        assert rep.min_du_a >= 0.0 and rep.min_du_b >= 0.0

    def test_joint_reports_observed_slope(self):
        traj = simulate_classical(TF, ms(0.6), ms(0.7))
        rep = adjustment_diagnostic(TF, traj, frozen_opponent=False)
        assert not rep.frozen_opponent
        assert np.isfinite(rep.min_du_a) and np.isfinite(rep.min_du_b)


class TestFieldsAndPostprocess:
    def test_scalar_field_matches_velocity(self):
        f = replicator_field(TF, gamma=1.3)
        s = np.array([0.6, 0.4, 0.7, 0.3])
        dx, dy = replicator_velocity(TF, ms(0.6), ms(0.7), gamma=1.3)
        assert np.allclose(f(0.0, s), np.concatenate([dx, dy]))

    def test_batch_field_matches_scalar(self):
        rng = np.random.default_rng(9)
        p = rng.uniform(0, 1, (50, 2))
        s = np.column_stack([p[:, 0], 1 - p[:, 0], p[:, 1], 1 - p[:, 1]])
        bf = batch_replicator_field(TF.A, TF.B)
        sf = replicator_field(TF)
        out = bf(0.0, s)
        for k in range(len(s)):
            assert np.allclose(out[k], sf(0.0, s[k]), atol=1e-14)

    def test_batch_field_per_row_games(self):
        rng = np.random.default_rng(10)
        As = rng.uniform(-1, 1, (8, 2, 2))
        Bs = rng.uniform(-1, 1, (8, 2, 2))
        p = rng.uniform(0, 1, (8, 2))
        s = np.column_stack([p[:, 0], 1 - p[:, 0], p[:, 1], 1 - p[:, 1]])
        out = batch_replicator_field(As, Bs)(0.0, s)
        for k in range(8):
            ref = batch_replicator_field(As[k], Bs[k])(0.0, s[k:k + 1])[0]
            assert np.allclose(out[k], ref, atol=1e-14)

    def test_simplex_postprocess_clips_and_renormalizes(self):
        s = simplex_postprocess(np.array([1.2, -0.1, 0.5, 0.6]))
        assert np.all(s >= 0) and np.all(s <= 1)
        assert s[:2].sum() == pytest.approx(1.0) and s[2:].sum() == pytest.approx(1.0)

    def test_simplex_postprocess_batch(self):
        s = simplex_postprocess(np.array([[1.2, -0.1, 0.5, 0.6],
                                          [0.3, 0.7, 0.2, 0.8]]))
        assert np.allclose(s[:, :2].sum(1), 1.0) and np.allclose(s[:, 2:].sum(1), 1.0)
