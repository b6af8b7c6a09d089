"""Invariant diagnostic suite behind the ``verify`` CLI subcommand.

Each check exercises one documented invariant of the core modules and
returns (ok, detail).  The CLI prints one line per check and exits nonzero
if any fails.
"""

from __future__ import annotations

import numpy as np

from . import classical, quantum
from .engine import IntegrationParams, integrate, velocity_norm
from .games import (
    Game,
    GameClass,
    MixedStrategy,
    classify_symmetric,
    expected_payoffs,
    induced_distribution,
    internal_equilibrium,
)
from .experiments import preset_game, simulate_classical

SEED = 20240817


def _rng():
    return np.random.default_rng(SEED)


def _random_game(rng, symmetric=False, scale=2.0):
    A = rng.uniform(-scale, scale, size=(2, 2))
    if symmetric:
        return Game(A)
    return Game(A, rng.uniform(-scale, scale, size=(2, 2)))


def _random_strategy(rng, interior=False):
    lo, hi = (0.05, 0.95) if interior else (0.0, 1.0)
    return MixedStrategy.from_prob(rng.uniform(lo, hi))


def check_payoff_bounds():
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        g = _random_game(rng)
        u = expected_payoffs(_random_strategy(rng), _random_strategy(rng), g)
        worst = max(worst,
                    g.A.min() - u.u_a, u.u_a - g.A.max(),
                    g.B.min() - u.u_b, u.u_b - g.B.max())
    return worst <= 1e-12, f"max bound violation {worst:.3g}"


def check_bilinearity():
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        g = _random_game(rng)
        x1, x2, y = (_random_strategy(rng) for _ in range(3))
        lam = rng.uniform()
        mix = MixedStrategy(lam * x1.probs + (1 - lam) * x2.probs)
        lhs = expected_payoffs(mix, y, g).u_a
        rhs = lam * expected_payoffs(x1, y, g).u_a + (1 - lam) * expected_payoffs(x2, y, g).u_a
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def _random_interior_symmetric(rng):
    """Random symmetric game classified TypeI or TypeII."""
    while True:
        g = _random_game(rng, symmetric=True)
        if classify_symmetric(g) in (GameClass.TYPE_I, GameClass.TYPE_II):
            return g


def check_internal_equilibrium_indifference(n=1000):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        g = _random_interior_symmetric(rng)
        ie = internal_equilibrium(g)
        if ie is None:
            continue
        xs, ys = ie
        ay = g.A @ ys.probs
        xb = xs.probs @ g.B
        worst = max(worst, abs(ay[0] - ay[1]), abs(xb[0] - xb[1]))
    return worst <= 1e-12, f"max indifference gap {worst:.3g} over {n} games"


def check_classify_total():
    rng = _rng()
    for _ in range(500):
        g = _random_game(rng, symmetric=True)
        if classify_symmetric(g) not in GameClass:
            return False, "classification escaped the enum"
    deg = Game.from_parameters(1.0, 0.0, 1.0, 0.5)
    asym = _random_game(_rng(), symmetric=False)
    ok = (classify_symmetric(deg) is GameClass.DEGENERATE
          and classify_symmetric(asym) is GameClass.ASYMMETRIC)
    return ok, "all games classified, Degenerate/Asymmetric reachable"


def check_embed_roundtrip():
    rng = _rng()
    worst = 0.0
    for _ in range(1000):
        x, y = _random_strategy(rng), _random_strategy(rng)
        p = induced_distribution(quantum.embed_classical(x, y)).probs
        worst = max(worst, np.max(np.abs(p - np.kron(x.probs, y.probs))))
    return worst <= 1e-12, f"max roundtrip error {worst:.3g}"


def check_simplex_preservation():
    rng = _rng()
    worst_range, worst_sum = 0.0, 0.0
    for _ in range(5):
        g = _random_game(rng)
        traj = simulate_classical(g, _random_strategy(rng, True), _random_strategy(rng, True),
                                  params=IntegrationParams(t_max=20.0))
        s = traj.states
        worst_range = max(worst_range, float((-s).max()), float((s - 1).max()))
        worst_sum = max(worst_sum,
                        float(np.abs(s[:, :2].sum(1) - 1).max()),
                        float(np.abs(s[:, 2:].sum(1) - 1).max()))
    ok = worst_range <= 1e-9 and worst_sum <= 1e-9
    return ok, f"range excess {worst_range:.3g}, sum drift {worst_sum:.3g}"


def check_sign_factorization(n=1000):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        g = _random_game(rng)
        x, y = _random_strategy(rng), _random_strategy(rng)
        gamma = rng.uniform(0.1, 3.0)
        dx, _ = classical.replicator_velocity(g, x, y, gamma)
        pred = gamma * x.probs[0] * x.probs[1] * classical._delta_row(g, y.p)
        worst = max(worst, abs(dx[0] - pred))
    return worst <= 1e-12, f"max |dx0 - factorized| {worst:.3g} over {n} samples"


def check_quadrant_constancy(n_games=100, n_points=20):
    rng = _rng()
    games = 0
    while games < n_games:
        g = _random_game(rng)
        ie = internal_equilibrium(g)
        if ie is None:
            continue
        games += 1
        xs, ys = ie[0].p, ie[1].p
        seen = {}
        for _ in range(n_points):
            x = MixedStrategy.from_prob(rng.uniform(0.001, 0.999))
            y = MixedStrategy.from_prob(rng.uniform(0.001, 0.999))
            if x.p == xs or y.p == ys:
                continue
            quad = (x.p > xs, y.p > ys)
            sig = classical.quadrant_signature(g, x, y)
            if quad in seen and seen[quad] != sig:
                return False, f"signature changed inside quadrant {quad} of game {g.A.tolist()}"
            seen[quad] = sig
        sigs = list(seen.values())
        for i in range(len(sigs)):
            for j in range(i + 1, len(sigs)):
                if sigs[i] == sigs[j]:
                    return False, f"two quadrants share signature in game {g.A.tolist()}"
    return True, f"{n_games} games, {n_points} points each"


def check_symmetric_exchange():
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        g = _random_game(rng, symmetric=True)
        x, y = _random_strategy(rng), _random_strategy(rng)
        vo_xy = classical.velocity_operator(g, x, y)
        vo_yx = classical.velocity_operator(g, y, x)
        worst = max(worst, float(np.max(np.abs(vo_xy.vx - vo_yx.vy))))
    return worst <= 1e-12, f"max |vx(x,y) - vy(y,x)| {worst:.3g}"


def check_diagonal_invariance(n_games=5, t_max=20.0):
    rng = _rng()
    worst = 0.0
    for _ in range(n_games):
        g = _random_game(rng, symmetric=True)
        x0 = _random_strategy(rng, True)
        traj = simulate_classical(g, x0, x0, params=IntegrationParams(t_max=t_max))
        worst = max(worst, float(np.max(np.abs(traj.states[:, 0] - traj.states[:, 2]))))
    return worst < 1e-9, f"max diagonal drift {worst:.3g}"


def check_frozen_ascent():
    rng = _rng()
    worst_analytic, worst_numeric = 0.0, 0.0
    for _ in range(200):
        g = _random_game(rng)
        x, y = _random_strategy(rng), _random_strategy(rng)
        ay = g.A @ y.probs
        u = x.probs @ ay
        worst_analytic = min(worst_analytic, float(x.probs @ (ay - u) ** 2))
    for _ in range(5):
        g = _random_game(rng)
        y = _random_strategy(rng, True)

        def frozen(t, s, g=g, y=y):
            ay = g.A @ y.probs
            return s * (ay - s @ ay)

        traj = integrate(frozen, _random_strategy(rng, True).probs,
                         IntegrationParams(t_max=20.0))
        u = traj.states @ (g.A @ y.probs)
        worst_numeric = min(worst_numeric, float(np.min(np.diff(u) / np.diff(traj.times))))
    ok = worst_analytic >= 0.0 and worst_numeric >= -1e-9
    return ok, f"analytic min {worst_analytic:.3g}, numeric min du/dt {worst_numeric:.3g}"


def check_quantum_norms():
    g = preset_game("trading-farming")
    q0 = quantum.JointQuantumState.from_locals(
        quantum.LocalQuantumState.from_angles(0.4, 0.3),
        quantum.LocalQuantumState.from_angles(1.1, -0.2))
    traj = quantum.evolve_quantum(q0, g, quantum.QuantumParams(t_max=10.0))
    drift = float(np.max(np.abs(traj.norms - 1.0)))
    return drift <= 1e-12, f"max renormalized norm drift {drift:.3g}"


def check_hermitized_norm_drift(t_max=100.0):
    g = preset_game("trading-farming")
    q0 = quantum.JointQuantumState.from_locals(
        quantum.LocalQuantumState.from_angles(0.4),
        quantum.LocalQuantumState.from_angles(1.1))
    traj = quantum.evolve_quantum(q0, g, quantum.QuantumParams(
        mode="hermitized", renormalize=False, t_max=t_max))
    drift = float(np.max(np.abs(traj.norms - 1.0)))
    return drift < 1e-6, f"norm drift {drift:.3g} over t={t_max}"


def check_product_preservation():
    g = preset_game("trading-farming")
    worst = 0.0
    for mode in quantum.MODES:
        q0 = quantum.JointQuantumState.from_locals(
            quantum.LocalQuantumState.from_angles(0.7, 0.1),
            quantum.LocalQuantumState.from_angles(0.3, 0.0))
        traj = quantum.evolve_quantum(q0, g, quantum.QuantumParams(mode=mode, t_max=10.0))
        joint = traj.states[:, :4]
        prod = np.einsum("ni,nj->nij", traj.states[:, 4:6],
                         traj.states[:, 6:8]).reshape(len(traj), 4)
        worst = max(worst, float(np.max(np.abs(joint - prod))))
    return worst < 1e-8, f"max joint/product deviation {worst:.3g}"


def check_payoff_consistency(n=1000):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        amps = rng.normal(size=4) + 1j * rng.normal(size=4)
        amps = amps / np.linalg.norm(amps)
        q = quantum.JointQuantumState(amps)
        g = _random_game(rng)
        u = quantum.quantum_payoff(q, g)
        p = induced_distribution(q)
        ref_a = float(p.probs @ g.A.ravel())
        ref_b = float(p.probs @ g.B.ravel())
        worst = max(worst, abs(u.u_a - ref_a), abs(u.u_b - ref_b))
    return worst <= 1e-15, f"max payoff mismatch {worst:.3g} over {n} states"


def check_zero_gap_stationarity():
    g = preset_game("trading-farming")
    ie = internal_equilibrium(g)
    q = quantum.embed_classical(ie[0], ie[1])
    va = quantum.quantum_partial_velocity(g, q, 0)
    vb = quantum.quantum_partial_velocity(g, q, 1)
    ha = quantum.hamiltonian_local(g, q.product_tag[0], q.product_tag[1])
    hb = quantum.hamiltonian_local(g, q.product_tag[1], q.product_tag[0], player=1)
    ok = (np.allclose(va, 0, atol=1e-12) and np.allclose(vb, 0, atol=1e-12)
          and np.all(ha == 0) and np.all(hb == 0))
    return ok, "zero partial velocities imply zero h-def generators"


def check_hdef_zero_diagonal():
    rng = _rng()
    for _ in range(200):
        g = _random_game(rng)
        amps = rng.normal(size=2) + 1j * rng.normal(size=2)
        own = quantum.LocalQuantumState(amps / np.linalg.norm(amps))
        opp = _random_strategy(rng)
        h = quantum.hamiltonian_local(g, own, opp, gamma=rng.uniform(0.1, 2.0))
        if h[0, 0] != 0 or h[1, 1] != 0:
            return False, "nonzero diagonal in h-def generator"
    return True, "diagonal exactly zero for 200 random inputs"


def _scalar_decay_error(dt, t_max=1.0, reference=None):
    traj = integrate(lambda t, s: -s, np.array([1.0]),
                     IntegrationParams(dt=dt, t_max=t_max, stride=10 ** 9))
    ref = np.exp(-t_max) if reference is None else reference
    return abs(float(traj.states[-1, 0]) - ref)


def check_integrator_order():
    ref_traj = integrate(lambda t, s: -s, np.array([1.0]),
                         IntegrationParams(dt=1e-5, t_max=1.0, stride=10 ** 9))
    ref = float(ref_traj.states[-1, 0])
    e1 = _scalar_decay_error(0.1, reference=ref)
    e2 = _scalar_decay_error(0.05, reference=ref)
    ratio = e1 / e2
    e_fine = _scalar_decay_error(1e-3)
    ok = ratio >= 12.0 and e_fine < 1e-6
    return ok, f"halving ratio {ratio:.1f}, dt=1e-3 error {e_fine:.3g}"


def check_determinism():
    g = preset_game("trading-farming")
    x = MixedStrategy.from_prob(0.37)
    y = MixedStrategy.from_prob(0.81)
    p = IntegrationParams(t_max=5.0)
    t1 = simulate_classical(g, x, y, params=p)
    t2 = simulate_classical(g, x, y, params=p)
    ok = np.array_equal(t1.states, t2.states) and np.array_equal(t1.times, t2.times)
    return ok, "repeated runs bit-identical"


def euler_replicator_oracle(g: Game, x0: float, y0: float, gamma=1.0,
                            dt=1e-6, t_max=10.0):
    """Explicit-Euler reference integration with scalar arithmetic.

    Independent of the RK4 path; used only as a cross-check oracle.
    """
    a00, a01 = float(g.A[0, 0]), float(g.A[0, 1])
    a10, a11 = float(g.A[1, 0]), float(g.A[1, 1])
    b00, b01 = float(g.B[0, 0]), float(g.B[0, 1])
    b10, b11 = float(g.B[1, 0]), float(g.B[1, 1])
    x, y = float(x0), float(y0)
    n = int(round(t_max / dt))
    for _ in range(n):
        x1, y1 = 1.0 - x, 1.0 - y
        ay0 = a00 * y + a01 * y1
        ay1 = a10 * y + a11 * y1
        ua = x * ay0 + x1 * ay1
        xb0 = x * b00 + x1 * b10
        xb1 = x * b01 + x1 * b11
        ub = xb0 * y + xb1 * y1
        x += dt * gamma * x * (ay0 - ua)
        y += dt * gamma * y * (xb0 - ub)
    return x, y


def check_oracle_equivalence():
    g = preset_game("trading-farming")
    traj = simulate_classical(g, MixedStrategy.from_prob(0.6), MixedStrategy.from_prob(0.7),
                              params=IntegrationParams(dt=1e-3, t_max=10.0))
    xe, ye = euler_replicator_oracle(g, 0.6, 0.7, dt=1e-6, t_max=10.0)
    err = max(abs(float(traj.states[-1, 0]) - xe), abs(float(traj.states[-1, 2]) - ye))
    return err < 1e-4, f"RK4 vs Euler(1e-6) endpoint gap {err:.3g}"


CHECKS = [
    ("game/payoff-bounds", check_payoff_bounds),
    ("game/bilinearity", check_bilinearity),
    ("game/internal-equilibrium-indifference", check_internal_equilibrium_indifference),
    ("game/classification-total", check_classify_total),
    ("game/embed-roundtrip", check_embed_roundtrip),
    ("classical/simplex-preservation", check_simplex_preservation),
    ("classical/sign-factorization", check_sign_factorization),
    ("classical/quadrant-constancy", check_quadrant_constancy),
    ("classical/symmetric-exchange", check_symmetric_exchange),
    ("classical/diagonal-invariance", check_diagonal_invariance),
    ("classical/frozen-opponent-ascent", check_frozen_ascent),
    ("quantum/renormalized-norms", check_quantum_norms),
    ("quantum/hermitized-norm-drift", check_hermitized_norm_drift),
    ("quantum/product-preservation", check_product_preservation),
    ("quantum/payoff-consistency", check_payoff_consistency),
    ("quantum/zero-gap-stationarity", check_zero_gap_stationarity),
    ("quantum/h-def-zero-diagonal", check_hdef_zero_diagonal),
    ("engine/integrator-order", check_integrator_order),
    ("engine/determinism", check_determinism),
    ("engine/oracle-equivalence", check_oracle_equivalence),
]


def run_all(out=print):
    """Run every check; returns True when all pass."""
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
