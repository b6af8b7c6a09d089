"""Classical and quantum replicator dynamics for 2-player 2-strategy games."""

from .engine import AttractorLabel, IntegrationParams, Trajectory, detect_attractor, integrate
from .errors import (
    BoundaryPointError,
    NoInternalEquilibriumError,
    NonProductStateError,
    NumericalError,
    OutputError,
    ValidationError,
)
from .games import (
    Game,
    GameClass,
    JointDistribution,
    MixedStrategy,
    PayoffPair,
    classify_symmetric,
    equilibrium_report,
    expected_payoffs,
    induced_distribution,
    internal_equilibrium,
    pure_equilibria,
)
from .experiments import (
    basin_sweep,
    label_trajectory,
    mixed_match,
    nash_fixed_point_check,
    preset_game,
    simulate_classical,
)
from .quantum import (
    JointQuantumState,
    LocalQuantumState,
    QuantumParams,
    embed_classical,
    evolve_quantum,
    quantum_payoff,
)

__version__ = "0.1.0"
