"""Game-theoretic information dissemination in social networks.

Actors weigh knowledge, reputation and popularity when deciding whether
to forward assertions and whether to give feedback.  The package builds
the resulting two-player payoff matrices, solves them for Nash
equilibria, simulates population-scale dissemination, and grows social
networks by pruning negative-utility friendships.
"""

from .core import (
    EXPERT,
    TROLL,
    ActorState,
    GlobalParams,
    InteractionOutcome,
    PayoffMatrix,
    Strategy,
    TraitVector,
    UtilityDeltas,
    build_matrix,
    coverage,
    expected_deltas,
    realize_outcome,
    truthfulness,
    utility,
)
from .emergence import (
    DegreeHistogram,
    FriendshipGraph,
    PowerLawFit,
    build_regular_graph,
    degree_histogram,
    fit_power_law,
    prune_edges,
    run_emergence,
)
from .engine import (
    KnowledgeHistogram,
    Population,
    PopulationSpec,
    init_population,
    run_dissemination,
    step,
    time_to_threshold,
)
from .nash import (
    EquilibriumProfile,
    NumericalFailureError,
    enumerate_equilibria,
    expected_payoffs,
    select_equilibrium,
    solve_selected,
    verify_equilibrium,
)

__version__ = "0.1.0"
