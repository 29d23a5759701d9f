"""Population-scale dissemination runs in discrete time.

A population of actors shares one trait vector; initial self-perceived
knowledge comes in cohorts (by default thirds at k = 0.1 / 0.5 / 0.9)
while reputation, popularity and the known-assertion fractions are drawn
uniformly at random.  Each step picks an ordered pair of distinct actors
uniformly at random, builds their expected-payoff matrix, plays the
selected Nash equilibrium (sampling a pure pair when it is mixed), and
applies the realized outcome.

Simulation time is the average number of communications per actor:
time = 2 * games / n_actors in both duplex and one-way modes, since both
participants of a game communicate.  Runs are reproducible: a single
seeded MT19937 stream (random.Random) drives initialization, pair
selection, strategy sampling and outcome realization, with all draws in
a fixed documented order.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple

from . import core, nash
from .core import ActorState, GlobalParams, Strategy, TraitVector

__all__ = [
    "PopulationSpec",
    "Population",
    "KnowledgeHistogram",
    "GameEvent",
    "init_population",
    "step",
    "run_dissemination",
    "time_to_threshold",
    "sample_pure_pair",
]

log = logging.getLogger(__name__)

#: Default initial-knowledge cohorts: thirds of know-nothings, middling
#: actors, and near-omniscient ones.
DEFAULT_COHORTS: tuple[tuple[float, float], ...] = ((1 / 3, 0.1), (1 / 3, 0.5), (1 / 3, 0.9))


@dataclass(frozen=True)
class PopulationSpec:
    """Everything needed to reproduce a dissemination run."""

    n_actors: int
    traits: TraitVector = core.TROLL
    cohorts: tuple[tuple[float, float], ...] = DEFAULT_COHORTS
    mode: str = "duplex"
    params: GlobalParams = field(default_factory=GlobalParams)
    seed: int = 0
    r_max: float = 1.0
    p_max: float = 1.0
    f_plus_max: float = 1.0
    f_minus_max: float = 0.5

    def __post_init__(self) -> None:
        if self.n_actors < 2:
            raise ValueError(f"n_actors must be >= 2, got {self.n_actors}")
        if self.mode not in ("duplex", "one_way"):
            raise ValueError(f"mode must be 'duplex' or 'one_way', got {self.mode!r}")
        if not self.cohorts:
            raise ValueError("cohorts must be nonempty")
        total = sum(frac for frac, _ in self.cohorts)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"cohort fractions must sum to 1, got {total!r}")
        for frac, k0 in self.cohorts:
            if not (0.0 <= frac <= 1.0 and 0.0 <= k0 <= 1.0):
                raise ValueError(f"cohort ({frac!r}, {k0!r}) out of [0, 1] bounds")
        for name in ("r_max", "p_max", "f_plus_max", "f_minus_max"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


class Population:
    """Mutable run state: actor list, counters, and the run's RNG."""

    def __init__(self, spec: PopulationSpec, actors: list[ActorState], rng: random.Random):
        self.spec = spec
        self.actors = actors
        self.rng = rng
        self.games_played = 0
        self.comm_counts = [0] * len(actors)

    @property
    def time(self) -> float:
        """Average communications per actor so far."""
        return 2.0 * self.games_played / len(self.actors)

    def mean_k(self) -> float:
        return math.fsum(a.k for a in self.actors) / len(self.actors)


def _cohort_sizes(n: int, fractions: list[float]) -> list[int]:
    """floor(frac*n) each; leftover actors join the earliest cohorts."""
    sizes = [int(frac * n) for frac in fractions]
    shortfall = n - sum(sizes)
    for i in range(shortfall):
        sizes[i % len(sizes)] += 1
    return sizes


def init_population(spec: PopulationSpec) -> Population:
    """Deterministic population from the spec's seed.

    Actor i draws, in order: r, p, f_plus, f_minus (uniform within the
    spec bounds); k is fixed by the actor's cohort.
    """
    rng = random.Random(spec.seed)
    sizes = _cohort_sizes(spec.n_actors, [frac for frac, _ in spec.cohorts])
    k_values: list[float] = []
    for size, (_, k0) in zip(sizes, spec.cohorts):
        k_values.extend([k0] * size)
    actors = []
    for i in range(spec.n_actors):
        r = rng.random() * spec.r_max
        p = rng.random() * spec.p_max
        f_plus = rng.random() * spec.f_plus_max
        f_minus = rng.random() * spec.f_minus_max
        actors.append(ActorState(k_values[i], r, p, f_plus, f_minus))
    return Population(spec, actors, rng)


def sample_pure_pair(profile: nash.EquilibriumProfile, rng: random.Random) -> tuple[int, int]:
    """Draw one pure strategy pair from a mixed profile (row draw first)."""

    def draw(probs) -> int:
        u = rng.random()
        acc = 0.0
        last = 0
        for idx, p in enumerate(probs):
            if p == 0.0:
                continue
            acc += p
            last = idx
            if u < acc:
                return idx
        return last  # guard against float shortfall in the cumulative sum

    return draw(profile.sigma_row), draw(profile.sigma_col)


class GameEvent(NamedTuple):
    """One played game: who, what was chosen, what happened."""

    actor_row: int
    actor_col: int
    strategy_row: Strategy
    strategy_col: Strategy
    outcome: core.InteractionOutcome


def step(pop: Population) -> GameEvent:
    """Play one game between a uniformly drawn ordered pair of actors.

    In one-way mode the first drawn actor speaks and the second listens.
    """
    rng = pop.rng
    n = len(pop.actors)
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    spec = pop.spec
    state_i, state_j = pop.actors[i], pop.actors[j]
    matrix = core.build_matrix(state_i, spec.traits, state_j, spec.traits, spec.params, spec.mode)
    profile = nash.solve_selected(matrix)
    ri, ci = sample_pure_pair(profile, rng)
    s_i = matrix.row_strategies[ri]
    s_j = matrix.col_strategies[ci]
    outcome = core.realize_outcome(
        state_i, spec.traits, state_j, spec.traits, s_i, s_j, spec.params, rng
    )
    pop.comm_counts[i] += 1
    pop.comm_counts[j] += 1
    pop.games_played += 1
    return GameEvent(i, j, s_i, s_j, outcome)


@dataclass(frozen=True)
class KnowledgeHistogram:
    """Distribution of actors over k at one snapshot time."""

    time: float
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    mean_k: float

    @property
    def n_actors(self) -> int:
        return sum(self.counts)


def _snapshot(pop: Population, n_bins: int) -> KnowledgeHistogram:
    counts = [0] * n_bins
    for a in pop.actors:
        idx = int(a.k * n_bins)
        if idx >= n_bins:  # k = 1.0 falls in the last bin
            idx = n_bins - 1
        counts[idx] += 1
    edges = tuple(b / n_bins for b in range(n_bins + 1))
    return KnowledgeHistogram(pop.time, edges, tuple(counts), pop.mean_k())


class _InvariantTracker:
    """Checks bounds and monotone learning for every touched actor."""

    def __init__(self, pop: Population):
        self.last = [(a.k, a.f_plus, a.f_minus) for a in pop.actors]

    def check(self, pop: Population, idx: int) -> None:
        a = pop.actors[idx]
        for name in ("k", "r", "p", "f_plus", "f_minus"):
            v = getattr(a, name)
            if not (0.0 <= v <= 1.0):
                raise AssertionError(f"actor {idx}: {name}={v!r} escaped [0, 1]")
        k0, fp0, fm0 = self.last[idx]
        if a.k < k0 or a.f_plus < fp0 or a.f_minus < fm0:
            raise AssertionError(f"actor {idx}: learning went backwards")
        self.last[idx] = (a.k, a.f_plus, a.f_minus)


def run_dissemination(
    spec: PopulationSpec,
    total_games: int,
    snapshot_interval: int | None = None,
    n_bins: int = 50,
    stop_mean_k: float | None = None,
    validate: bool = False,
) -> list[KnowledgeHistogram]:
    """Run total_games steps, snapshotting the knowledge distribution.

    A snapshot is taken at game 0, every snapshot_interval games
    (default: n_actors games), and after the final game.  With
    stop_mean_k set, the run ends early at the first snapshot whose mean
    k reaches the threshold.  validate=True re-checks the state
    invariants of both participants after every single game.
    """
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if total_games < 0:
        raise ValueError(f"total_games must be >= 0, got {total_games}")
    if snapshot_interval is None:
        snapshot_interval = spec.n_actors
    if snapshot_interval < 1:
        raise ValueError(f"snapshot_interval must be >= 1, got {snapshot_interval}")
    pop = init_population(spec)
    tracker = _InvariantTracker(pop) if validate else None
    series = [_snapshot(pop, n_bins)]
    if stop_mean_k is not None and series[-1].mean_k >= stop_mean_k:
        return series
    while pop.games_played < total_games:
        game_target = min(total_games, pop.games_played + snapshot_interval)
        while pop.games_played < game_target:
            event = step(pop)
            if tracker is not None:
                tracker.check(pop, event.actor_row)
                tracker.check(pop, event.actor_col)
        series.append(_snapshot(pop, n_bins))
        if stop_mean_k is not None and series[-1].mean_k >= stop_mean_k:
            break
    log.info(
        "dissemination run finished: %d games, time %.1f, mean k %.4f",
        pop.games_played,
        pop.time,
        series[-1].mean_k,
    )
    return series


def time_to_threshold(series: list[KnowledgeHistogram], threshold: float) -> float | None:
    """First snapshot time with mean k >= threshold; None if never reached."""
    if not series:
        raise ValueError("empty histogram series")
    for snap in series:
        if snap.mean_k >= threshold:
            return snap.time
    return None
