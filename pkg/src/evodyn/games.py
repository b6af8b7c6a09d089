"""2-player 2-strategy games: payoffs, equilibria and the symmetric taxonomy.

Strategy index 0 is the first strategy (T in Trading-Farming, Hawk in
Hawk-Dove), index 1 the second (F / Dove).  Pure profiles are ordered
TT, TF, FT, FF, matching the row-major flattening of the 2x2 payoff grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ValidationError

PROFILES = ("TT", "TF", "FT", "FF")

# pure-profile coordinates in the (x_T, y_T) plane
VERTEX_COORDS = {"TT": (1.0, 1.0), "TF": (1.0, 0.0), "FT": (0.0, 1.0), "FF": (0.0, 0.0)}

PROB_TOL = 1e-12
NORM_TOL = 1e-9
DEGENERATE_DENOM = 1e-12


class GameClass(Enum):
    DOMINANT_PURE = "DominantPure"
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    DEGENERATE = "Degenerate"
    ASYMMETRIC = "Asymmetric"


def _as_matrix(m, name):
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValidationError(f"{name} must be a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    m.setflags(write=False)
    return m


@dataclass
class Game:
    """Bimatrix game; A pays the row player, B the column player."""

    A: np.ndarray
    B: np.ndarray = None
    symmetric: bool = False

    def __post_init__(self):
        self.A = _as_matrix(self.A, "A")
        if self.B is None:
            self.B = self.A.T.copy()
            self.symmetric = True
        self.B = _as_matrix(self.B, "B")
        if self.symmetric and not np.array_equal(self.B, self.A.T):
            raise ValidationError("symmetric game requires B == A^T exactly")

    @classmethod
    def from_parameters(cls, a, b, c, d):
        """Symmetric game with A = [[a, b], [c, d]] and B = A^T."""
        return cls(np.array([[a, b], [c, d]], dtype=float))

    def transposed(self):
        """Same game with the player roles swapped."""
        return Game(self.B.T.copy(), self.A.T.copy(), symmetric=self.symmetric)


def _as_probs(p, n, name):
    p = np.asarray(p, dtype=float)
    if p.shape != (n,):
        raise ValidationError(f"{name} must be a {n}-vector")
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.any(p < 0) or np.any(p > 1):
        raise ValidationError(f"{name} entries must lie in [0, 1], got {p}")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{name} must sum to 1 within {PROB_TOL}, got sum {p.sum()}")
    p.setflags(write=False)
    return p


@dataclass
class MixedStrategy:
    probs: np.ndarray

    def __post_init__(self):
        self.probs = _as_probs(self.probs, 2, "mixed strategy")

    @classmethod
    def from_prob(cls, p):
        """Strategy playing index 0 with probability p."""
        return cls(np.array([p, 1.0 - p]))

    @property
    def p(self):
        return float(self.probs[0])


@dataclass
class JointDistribution:
    probs: np.ndarray

    def __post_init__(self):
        self.probs = _as_probs(self.probs, 4, "joint distribution")

    def marginals(self):
        """Row and column marginal strategies (x, y)."""
        p = self.probs
        x = np.array([p[0] + p[1], p[2] + p[3]])
        y = np.array([p[0] + p[2], p[1] + p[3]])
        # guard tiny negative round-off before revalidation
        x = np.clip(x, 0.0, 1.0)
        y = np.clip(y, 0.0, 1.0)
        return MixedStrategy(x / x.sum()), MixedStrategy(y / y.sum())


@dataclass
class PayoffPair:
    u_a: float
    u_b: float


@dataclass
class EquilibriumReport:
    pure: list
    internal: tuple | None
    game_class: GameClass


def expected_payoffs(x: MixedStrategy, y: MixedStrategy, g: Game) -> PayoffPair:
    """Bilinear expected payoffs u_a = x^T A y, u_b = x^T B y."""
    ua = float(x.probs @ g.A @ y.probs)
    ub = float(x.probs @ g.B @ y.probs)
    return PayoffPair(ua, ub)


def pure_equilibria(g: Game) -> list:
    """Pure profiles where no player strictly gains by unilateral deviation.

    Weak Nash: ties count, so Trading-Farming lists FF alongside TT.
    """
    out = []
    for k, name in enumerate(PROFILES):
        i, j = divmod(k, 2)
        if g.A[i, j] >= g.A[1 - i, j] and g.B[i, j] >= g.B[i, 1 - j]:
            out.append(name)
    return out


def internal_equilibrium(g: Game):
    """Closed-form interior equilibrium, or None when degenerate/outside (0,1).

    x* = (d'-c')/(a'-b'-c'+d'), y* = (d-b)/(a-b-c+d), with primes from B.
    """
    a, b, c, d = g.A.ravel()
    ap, bp, cp, dp = g.B.ravel()
    den_x = ap - bp - cp + dp
    den_y = a - b - c + d
    if abs(den_x) <= DEGENERATE_DENOM or abs(den_y) <= DEGENERATE_DENOM:
        return None
    xs = (dp - cp) / den_x
    ys = (d - b) / den_y
    if not (0.0 < xs < 1.0 and 0.0 < ys < 1.0):
        return None
    return MixedStrategy.from_prob(xs), MixedStrategy.from_prob(ys)


def classify_symmetric(g: Game) -> GameClass:
    """Taxonomy by the signs of a-c and b-d; non-symmetric games map to Asymmetric."""
    if not g.symmetric:
        return GameClass.ASYMMETRIC
    a, b = g.A[0]
    c, d = g.A[1]
    if a == c or b == d:
        return GameClass.DEGENERATE
    if (a > c) == (b > d):
        return GameClass.DOMINANT_PURE
    if a < c and b > d:
        return GameClass.TYPE_I
    return GameClass.TYPE_II


def equilibrium_report(g: Game) -> EquilibriumReport:
    return EquilibriumReport(
        pure=pure_equilibria(g),
        internal=internal_equilibrium(g),
        game_class=classify_symmetric(g),
    )


def induced_distribution(q) -> JointDistribution:
    """Measurement distribution p_s = |<s|psi>|^2 of a joint quantum state."""
    amps = np.asarray(getattr(q, "amps", q), dtype=complex)
    if amps.shape != (4,):
        raise ValidationError("joint state must have 4 amplitudes")
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"state norm {norm} deviates from 1 by more than {NORM_TOL}")
    p = np.abs(amps) ** 2
    return JointDistribution(p / p.sum())
