"""Social-network emergence from utility-driven edge pruning.

Start from a random d-regular "friendship" graph, let every connected
pair play a few full-duplex games per iteration while accumulating each
endpoint's realized utility change on the edge, then sever the edges
whose accumulated utility went negative.  Surviving degrees are
histogrammed and fitted with a log-log least-squares line, the classic
check for a Pareto-like (scale-free) degree distribution.

Edges are processed in sorted endpoint order and all randomness flows
from one seeded stream, so runs are bit-reproducible.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass

import numpy as np

from . import core, nash
from .core import GlobalParams, Strategy, TraitVector
from .engine import PopulationSpec, init_population, sample_pure_pair

__all__ = [
    "FriendshipGraph",
    "DegreeHistogram",
    "PowerLawFit",
    "IterationResult",
    "build_regular_graph",
    "run_emergence",
    "prune_edges",
    "fit_power_law",
    "degree_histogram",
]

log = logging.getLogger(__name__)


class FriendshipGraph:
    """Undirected simple graph with per-edge accumulated utility pairs.

    Edges are stored keyed by (u, v) with u < v; the utility pair follows
    the same endpoint order.
    """

    def __init__(self, n_nodes: int):
        if n_nodes < 1:
            raise ValueError("graph needs at least one node")
        self.n_nodes = n_nodes
        self.edge_utils: dict[tuple[int, int], list[float]] = {}

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in self.edge_utils:
            raise ValueError(f"duplicate edge {key}")
        if not (0 <= key[0] and key[1] < self.n_nodes):
            raise ValueError(f"edge {key} out of range")
        self.edge_utils[key] = [0.0, 0.0]

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.edge_utils)

    @property
    def n_edges(self) -> int:
        return len(self.edge_utils)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for u, v in self.edge_utils:
            deg[u] += 1
            deg[v] += 1
        return deg

    def reset_utilities(self) -> None:
        for acc in self.edge_utils.values():
            acc[0] = 0.0
            acc[1] = 0.0

    def copy_structure(self) -> "FriendshipGraph":
        g = FriendshipGraph(self.n_nodes)
        for key, acc in self.edge_utils.items():
            g.edge_utils[key] = [acc[0], acc[1]]
        return g


def build_regular_graph(n: int, degree: int, seed: int) -> FriendshipGraph:
    """Random d-regular simple graph via the pairing model.

    Stubs are shuffled and paired greedily; colliding pairs (self-loop or
    duplicate) are thrown back and re-shuffled, and the whole pairing
    restarts if a pass makes no progress.  Deterministic given the seed.
    """
    if degree < 0 or degree >= n:
        raise ValueError(f"degree must satisfy 0 <= degree < n, got degree={degree}, n={n}")
    if (n * degree) % 2 != 0:
        raise ValueError(f"n*degree must be even, got n={n}, degree={degree}")
    rng = random.Random(seed)
    while True:
        edges = _try_pairing(rng, n, degree)
        if edges is not None:
            graph = FriendshipGraph(n)
            for u, v in edges:
                graph.add_edge(u, v)
            log.debug("regular graph built: n=%d degree=%d edges=%d", n, degree, len(edges))
            return graph
        log.debug("pairing stalled, restarting")


def _try_pairing(rng: random.Random, n: int, degree: int) -> set[tuple[int, int]] | None:
    stubs = [v for v in range(n) for _ in range(degree)]
    edges: set[tuple[int, int]] = set()
    while stubs:
        rng.shuffle(stubs)
        leftovers: list[int] = []
        progress = False
        for idx in range(0, len(stubs) - 1, 2):
            u, v = stubs[idx], stubs[idx + 1]
            key = (u, v) if u < v else (v, u)
            if u != v and key not in edges:
                edges.add(key)
                progress = True
            else:
                leftovers.append(u)
                leftovers.append(v)
        if len(stubs) % 2 == 1:
            leftovers.append(stubs[-1])
        if not progress and leftovers:
            return None
        stubs = leftovers
    return edges


def prune_edges(graph: FriendshipGraph, rule: str = "either") -> tuple[FriendshipGraph, int]:
    """Remove edges whose accumulated utility is negative.

    rule 'either': sever if either endpoint's utility is < 0 (a member
    keeps a friendship only while it pays off for them).
    rule 'both':   sever only if both endpoints are < 0.
    rule 'sum':    sever if the endpoint sum is < 0.
    Zero utility always keeps the edge.  Returns (pruned graph, removals).
    """
    if rule not in ("either", "both", "sum"):
        raise ValueError(f"unknown prune rule {rule!r}")
    pruned = FriendshipGraph(graph.n_nodes)
    removed = 0
    for key in graph.edges():
        u_a, u_b = graph.edge_utils[key]
        if rule == "either":
            cut = min(u_a, u_b) < 0.0
        elif rule == "both":
            cut = max(u_a, u_b) < 0.0
        else:
            cut = u_a + u_b < 0.0
        if cut:
            removed += 1
        else:
            pruned.edge_utils[key] = [u_a, u_b]
    return pruned, removed


@dataclass(frozen=True)
class DegreeHistogram:
    """Node count per degree (all nodes, including isolated ones)."""

    counts: dict[int, int]

    @property
    def n_nodes(self) -> int:
        return sum(self.counts.values())

    def items(self) -> list[tuple[int, int]]:
        return sorted(self.counts.items())


def degree_histogram(graph: FriendshipGraph) -> DegreeHistogram:
    counts: dict[int, int] = {}
    for d in graph.degrees():
        counts[d] = counts.get(d, 0) + 1
    return DegreeHistogram(counts)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log degree, log count)."""

    exponent: float
    intercept: float
    r_squared: float
    d_min: int
    d_max: int


def fit_power_law(hist: DegreeHistogram, d_min: int, d_max: int) -> PowerLawFit:
    """Fit log(count) = exponent*log(degree) + intercept over [d_min, d_max].

    Only degrees with nonzero counts inside the range participate; at
    least 3 such points are required.  Flat data yields exponent 0 and
    r_squared 1 (a perfect horizontal fit).
    """
    if d_min < 1:
        raise ValueError(f"d_min must be >= 1, got {d_min}")
    if d_max < d_min:
        raise ValueError(f"empty fit range [{d_min}, {d_max}]")
    points = [(d, c) for d, c in hist.items() if d_min <= d <= d_max and c > 0]
    if len(points) < 3:
        raise ValueError(
            f"need at least 3 nonzero-count degrees in [{d_min}, {d_max}], got {len(points)}"
        )
    x = np.log([float(d) for d, _ in points])
    y = np.log([float(c) for _, c in points])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), r2, d_min, d_max)


@dataclass(frozen=True)
class IterationResult:
    """State after one accumulate-and-prune iteration."""

    iteration: int
    graph: FriendshipGraph
    removed: int
    histogram: DegreeHistogram
    fit: PowerLawFit | None


def run_emergence(
    graph: FriendshipGraph,
    spec: PopulationSpec,
    interactions_per_edge: int = 5,
    prune_rule: str = "either",
    iterations: int = 1,
    seed: int = 0,
    fit_range: tuple[int, int] = (5, 24),
    force_strategy: Strategy | None = None,
    reset_states: bool = False,
) -> list[IterationResult]:
    """Accumulate edge utilities, prune, and fit, iteration by iteration.

    Per iteration every surviving edge hosts interactions_per_edge
    full-duplex games (row player = smaller node index; edges in sorted
    order; state updates persist, so order matters and is pinned).  Each
    game adds the two realized utility changes to the edge's accumulator
    pair, which pruning then consults.  The degree histogram and power-law
    fit are recorded after each prune; the fit is None when fewer than 3
    in-range degrees remain.

    force_strategy bypasses equilibrium play and makes both actors use
    one fixed strategy (diagnostic knob).  reset_states=True re-draws
    actor states between iterations instead of letting them persist.
    """
    if spec.n_actors != graph.n_nodes:
        raise ValueError(
            f"spec.n_actors={spec.n_actors} does not match graph nodes={graph.n_nodes}"
        )
    if interactions_per_edge < 1:
        raise ValueError(f"interactions_per_edge must be >= 1, got {interactions_per_edge}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    run_spec = PopulationSpec(
        n_actors=spec.n_actors,
        traits=spec.traits,
        cohorts=spec.cohorts,
        mode="duplex",
        params=spec.params,
        seed=seed,
        r_max=spec.r_max,
        p_max=spec.p_max,
        f_plus_max=spec.f_plus_max,
        f_minus_max=spec.f_minus_max,
    )
    pop = init_population(run_spec)
    rng = pop.rng
    traits = run_spec.traits
    params = run_spec.params
    current = graph.copy_structure()
    results: list[IterationResult] = []
    for it in range(1, iterations + 1):
        if reset_states and it > 1:
            pop = init_population(run_spec)
            # Keep one stream for the whole run: re-init consumes fresh draws.
            pop.rng = rng
        current.reset_utilities()
        for u, v in current.edges():
            acc = current.edge_utils[(u, v)]
            state_u, state_v = pop.actors[u], pop.actors[v]
            for _ in range(interactions_per_edge):
                if force_strategy is not None:
                    s_u = s_v = force_strategy
                else:
                    matrix = core.build_matrix(state_u, traits, state_v, traits, params)
                    profile = nash.solve_selected(matrix)
                    ri, ci = sample_pure_pair(profile, rng)
                    s_u = matrix.row_strategies[ri]
                    s_v = matrix.col_strategies[ci]
                outcome = core.realize_outcome(
                    state_u, traits, state_v, traits, s_u, s_v, params, rng
                )
                acc[0] += outcome.deltas_a.du
                acc[1] += outcome.deltas_b.du
        current, removed = prune_edges(current, prune_rule)
        hist = degree_histogram(current)
        try:
            fit = fit_power_law(hist, fit_range[0], fit_range[1])
        except ValueError:
            fit = None
        log.info(
            "emergence iteration %d: removed %d edges, %d remain%s",
            it,
            removed,
            current.n_edges,
            "" if fit is None else f", exponent {fit.exponent:.3f}",
        )
        results.append(IterationResult(it, current.copy_structure(), removed, hist, fit))
    return results
