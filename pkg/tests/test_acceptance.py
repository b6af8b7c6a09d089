"""End-to-end acceptance checks.

Each test covers one headline capability, enforces its numerical tolerance
and a wall-clock cap, and prints a single pass/fail line (run pytest with
``-s`` or read captured output to see them).
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from evodyn import cli, output
from evodyn.classical import quadrant_signature
from evodyn.engine import IntegrationParams, integrate
from evodyn.experiments import (
    basin_sweep,
    mixed_match,
    nash_fixed_point_check,
    preset_game,
    simulate_classical,
    label_trajectory,
)
from evodyn.games import (
    Game,
    GameClass,
    MixedStrategy,
    classify_symmetric,
    internal_equilibrium,
    pure_equilibria,
)
from evodyn.output import (
    CLASSICAL_HEADER,
    QUANTUM_HEADER,
    SWEEP_HEADER,
    read_csv,
)
from evodyn.quantum import (
    JointQuantumState,
    LocalQuantumState,
    QuantumParams,
    embed_classical,
    evolve_quantum,
    quantum_payoff,
)
from evodyn.verify import euler_replicator_oracle

TF = preset_game("trading-farming")
SEED = 42


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    """Compile/load the jitted integrators once so the timed runs below
    measure the numerics, not compilation."""
    simulate_classical(TF, MixedStrategy.from_prob(0.6), MixedStrategy.from_prob(0.7),
                       params=IntegrationParams(t_max=0.1))
    q0 = embed_classical(MixedStrategy.from_prob(0.3), MixedStrategy.from_prob(0.4))
    evolve_quantum(q0, TF, QuantumParams(t_max=0.1))
    mixed_match(TF, 0, LocalQuantumState.from_angles(0.3), MixedStrategy.from_prob(0.5),
                QuantumParams(t_max=0.1), with_baseline=False)
    basin_sweep(TF, grid_n=2, params=IntegrationParams(t_max=0.1))


@contextmanager
def criterion(num, name, cap_seconds):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[criterion {num:02d}] {name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed <= cap_seconds
    print(f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'} "
          f"({elapsed:.2f}s, cap {cap_seconds:g}s)")
    assert ok, f"runtime {elapsed:.2f}s exceeded the {cap_seconds}s cap"


def ms(p):
    return MixedStrategy.from_prob(p)


def test_01_equilibrium_analysis(capsys):
    with criterion(1, "interior equilibrium reported to machine precision", 1.0):
        assert cli.main(["analyze", "--game", "trading-farming"]) == 0
        out = capsys.readouterr().out
        with capsys.disabled():
            line = next(l for l in out.splitlines() if l.startswith("internal"))
            pair = line.split("(")[1].rstrip(")").split(",")
            assert float(pair[0]) == 0.5 and float(pair[1]) == 0.5


def test_02_indifference_at_interior_equilibria():
    with criterion(2, "indifference at 1000 random interior equilibria", 5.0):
        rng = np.random.default_rng(SEED)
        n = 0
        while n < 1000:
            g = Game(rng.uniform(-2, 2, (2, 2)))
            if classify_symmetric(g) not in (GameClass.TYPE_I, GameClass.TYPE_II):
                continue
            ie = internal_equilibrium(g)
            if ie is None:
                continue
            n += 1
            xs, ys = ie
            ay = g.A @ ys.probs
            xb = xs.probs @ g.B
            assert abs(ay[0] - ay[1]) < 1e-12 and abs(xb[0] - xb[1]) < 1e-12


def test_03_quadrant_signature_constancy():
    with criterion(3, "velocity signs constant per quadrant, 100 games", 10.0):
        rng = np.random.default_rng(SEED)
        games = 0
        while games < 100:
            g = Game(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, (2, 2)))
            ie = internal_equilibrium(g)
            if ie is None:
                continue
            games += 1
            xs, ys = ie[0].p, ie[1].p
            seen = {}
            for _ in range(100):
                x, y = rng.uniform(0.001, 0.999, 2)
                if x == xs or y == ys:
                    continue
                quad = (x > xs, y > ys)
                sig = quadrant_signature(g, ms(x), ms(y))
                assert seen.setdefault(quad, sig) == sig


def test_04_diagonal_invariance():
    with criterion(4, "symmetric diagonal invariant over t=50, 20 games", 30.0):
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for _ in range(20):
            g = Game(rng.uniform(-2, 2, (2, 2)))
            p = ms(rng.uniform(0.05, 0.95))
            traj = simulate_classical(g, p, p, params=IntegrationParams(t_max=50.0))
            worst = max(worst, float(np.max(np.abs(traj.states[:, 0] - traj.states[:, 2]))))
        assert worst < 1e-9, f"diagonal drift {worst:.3g}"


def test_05_anticoordination_convergence():
    with criterion(5, "hawk-dove runs reach the opposite pure vertices", 10.0):
        g = preset_game("hawk-dove")
        for (x0, y0), vertex in (((0.8, 0.2), (1.0, 0.0)), ((0.2, 0.8), (0.0, 1.0))):
            traj = simulate_classical(g, ms(x0), ms(y0))
            term = np.array([traj.states[-1, 0], traj.states[-1, 2]])
            assert np.max(np.abs(term - vertex)) < 1e-3
            lbl = label_trajectory(g, traj)
            assert lbl.kind == "converged"


def test_06_dominant_single_basin():
    with criterion(6, "dominant-strategy game: every grid start converges", 60.0):
        sweep = basin_sweep(preset_game("dominant"), grid_n=51)
        assert dict(sweep.summary) == {"TT": 51 * 51}


def test_07_frozen_opponent_payoff_ascent():
    with criterion(7, "payoff never decreases against a frozen opponent", 30.0):
        rng = np.random.default_rng(SEED)
        for _ in range(1000):
            g = Game(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, (2, 2)))
            x, y = ms(rng.uniform()), ms(rng.uniform())
            ay = g.A @ y.probs
            u = x.probs @ ay
            assert float(x.probs @ (ay - u) ** 2) >= 0.0
        for _ in range(20):
            g = Game(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, (2, 2)))
            ay = g.A @ ms(rng.uniform(0.05, 0.95)).probs

            def frozen(t, s, ay=ay):
                return s * (ay - s @ ay)

            traj = integrate(frozen, ms(rng.uniform(0.05, 0.95)).probs,
                             IntegrationParams(t_max=10.0))
            du = np.diff(traj.states @ ay) / np.diff(traj.times)
            assert float(du.min()) >= -1e-9


def test_08_integrator_accuracy():
    with criterion(8, "4th-order convergence and cross-method agreement", 60.0):
        ref = integrate(lambda t, s: -s, np.array([1.0]),
                        IntegrationParams(dt=1e-5, t_max=1.0, stride=10 ** 9))
        ref_v = float(ref.states[-1, 0])
        errs = []
        for dt in (0.1, 0.05, 1e-3):
            traj = integrate(lambda t, s: -s, np.array([1.0]),
                             IntegrationParams(dt=dt, t_max=1.0, stride=10 ** 9))
            errs.append(abs(float(traj.states[-1, 0]) - ref_v))
        assert errs[0] / errs[1] >= 12.0, f"halving ratio {errs[0] / errs[1]:.1f}"
        assert errs[2] < 1e-6, f"dt=1e-3 error {errs[2]:.3g}"
        traj = simulate_classical(TF, ms(0.6), ms(0.7),
                                  params=IntegrationParams(dt=1e-3, t_max=10.0))
        xe, ye = euler_replicator_oracle(TF, 0.6, 0.7, dt=1e-6, t_max=10.0)
        gap = max(abs(float(traj.states[-1, 0]) - xe),
                  abs(float(traj.states[-1, 2]) - ye))
        assert gap < 1e-4, f"independent-integrator gap {gap:.3g}"


def test_09_quantum_payoffs_and_norms():
    with criterion(9, "measurement payoffs exact, evolution norm-safe", 60.0):
        rng = np.random.default_rng(SEED)
        for _ in range(1000):
            amps = rng.normal(size=4) + 1j * rng.normal(size=4)
            q = JointQuantumState(amps / np.linalg.norm(amps))
            g = Game(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, (2, 2)))
            u = quantum_payoff(q, g)
            p = np.abs(q.amps) ** 2
            p = p / p.sum()
            assert abs(u.u_a - float(p @ g.A.ravel())) <= 1e-15
            assert abs(u.u_b - float(p @ g.B.ravel())) <= 1e-15
        q0 = JointQuantumState.from_locals(LocalQuantumState.from_angles(0.4, 0.3),
                                           LocalQuantumState.from_angles(1.1, -0.2))
        traj = evolve_quantum(q0, TF, QuantumParams(t_max=10.0))
        assert np.max(np.abs(traj.norms - 1.0)) < 1e-12
        q0 = JointQuantumState.from_locals(LocalQuantumState.from_angles(0.4),
                                           LocalQuantumState.from_angles(1.1))
        traj = evolve_quantum(q0, TF, QuantumParams(
            mode="hermitized", renormalize=False, t_max=100.0))
        assert np.max(np.abs(traj.norms - 1.0)) < 1e-6


def test_10_embedded_pure_equilibria_are_fixed_points():
    with criterion(10, "embedded pure equilibria sit at dynamical rest", 10.0):
        rng = np.random.default_rng(SEED)
        games = 0
        while games < 100:
            g = Game(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, (2, 2)))
            pures = pure_equilibria(g)
            if not pures:
                continue
            games += 1
            for name in pures:
                x = ms(1.0 if name[0] == "T" else 0.0)
                y = ms(1.0 if name[1] == "T" else 0.0)
                rep = nash_fixed_point_check(embed_classical(x, y), g, tol=1e-9)
                assert rep.passed, f"{name} of {g.A.tolist()} moved: {rep.velocity_norm}"


def test_11_quantum_behaviors():
    pd = preset_game("prisoners-dilemma")
    with criterion(11, "quantum play cycles / outperforms where expected", 120.0):
        q0 = JointQuantumState.from_locals(LocalQuantumState.from_angles(0.2),
                                           LocalQuantumState.from_angles(0.2))
        traj = evolve_quantum(q0, pd, QuantumParams(mode="h-def", t_max=200.0))
        lbl = label_trajectory(pd, traj)
        assert lbl.kind == "cycle", f"expected a cycle, got {lbl.kind}"
        print("\n    [11a] persistent cycling mode: h-def")

        q_init = LocalQuantumState.from_angles(np.arccos(np.sqrt(0.25)))
        winning = []
        for mode in ("hermitized", "tangent"):
            r = mixed_match(TF, 0, q_init, ms(0.25),
                            QuantumParams(mode=mode, t_max=200.0))
            if r.acc_a >= r.baseline["acc_a"]:
                winning.append(mode)
        assert winning == ["hermitized", "tangent"], (
            f"quantum advantage only in modes {winning}")
        print(f"    [11b] quantum-advantage modes: {', '.join(winning)}")


def test_12_output_contract(tmp_path):
    with criterion(12, "delimited output schema and lossless numbers", 1.0):
        assert CLASSICAL_HEADER == "t,x_T,y_T,u_A,u_B"
        assert QUANTUM_HEADER == ("t,re_a00,im_a00,re_a01,im_a01,re_a10,im_a10,"
                                  "re_a11,im_a11,p_TT,p_TF,p_FT,p_FF,u_A,u_B,norm")
        assert SWEEP_HEADER == "x0,y0,label,residual"
        traj = simulate_classical(TF, ms(0.8), ms(0.7),
                                  params=IntegrationParams(t_max=1.0))
        path = tmp_path / "c.csv"
        output.write_classical_csv(path, traj)
        header, rows = read_csv(path)
        assert header == CLASSICAL_HEADER
        for k, row in zip((0, len(rows) - 1), (rows[0], rows[-1])):
            vals = [float(v) for v in row]
            assert vals[0] == traj.times[k]
            assert vals[1] == traj.states[k, 0].real
            assert vals[2] == traj.states[k, 2].real
            assert vals[3] == traj.payoffs[k, 0]
            assert vals[4] == traj.payoffs[k, 1]
