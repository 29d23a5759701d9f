"""Actor model and payoff construction for the two-player dissemination game.

Two actors meet and each secretly picks one of four actions: stay silent,
give feedback only, send an assertion only, or do both.  An assertion is a
unit of information that is true with network-wide probability ``phi``;
false assertions (rumors) count for only ``lambda_`` of a true one when an
actor tallies its self-perceived knowledge.  Feedback is a truthful reply
that raises the sender's reputation for a true assertion and lowers it for
a rumor.  Every visible act (sending an assertion or a feedback) makes an
actor a bit more popular, and popularity decays each game.

Utility is the trait-weighted mix ``U = kappa*k + rho*r + pi*p``.  The
expected utility change of every strategy pair forms a bimatrix game
(4x4 full duplex, 2x2 for the legacy one-way mode); `build_matrix`
constructs it and `realize_outcome` samples one concrete interaction whose
mean effect converges to the matrix entry.

Feedback can only answer an assertion that was actually transmitted, so
strategy pairs whose feedback bit is moot produce bit-identical matrix
entries; the solver relies on that degeneracy being exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

__all__ = [
    "GlobalParams",
    "TraitVector",
    "ActorState",
    "Strategy",
    "PayoffMatrix",
    "UtilityDeltas",
    "DirectionRecord",
    "InteractionOutcome",
    "TROLL",
    "EXPERT",
    "DUPLEX_STRATEGIES",
    "ONE_WAY_ROW_STRATEGIES",
    "ONE_WAY_COL_STRATEGIES",
    "utility",
    "truthfulness",
    "coverage",
    "expected_deltas",
    "build_matrix",
    "realize_outcome",
]


def _check_unit(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class GlobalParams:
    """Network-wide constants shared by every actor.

    phi            probability that a circulating assertion is true
    delta          popularity decay factor applied to both actors per game
    lambda_        rumor discount: a false assertion is worth lambda_ of a
                   true one in perceived knowledge
    n_assertions   total number of assertions circulating in the network
    gamma_r        reputation step size per feedback received
    gamma_p        popularity gain per visible act
    cost_send      effort cost of sending one assertion
    cost_feedback  effort cost of sending one feedback
    """

    phi: float = 0.8
    delta: float = 0.1
    lambda_: float = 0.5
    n_assertions: int = 2000
    gamma_r: float = 0.1
    gamma_p: float = 0.05
    cost_send: float = 0.005
    cost_feedback: float = 0.002

    def __post_init__(self) -> None:
        _check_unit("phi", self.phi)
        _check_unit("delta", self.delta)
        _check_unit("lambda_", self.lambda_)
        if not (isinstance(self.n_assertions, int) and self.n_assertions >= 1):
            raise ValueError(f"n_assertions must be a positive integer, got {self.n_assertions!r}")
        for name in ("gamma_r", "gamma_p"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        for name in ("cost_send", "cost_feedback"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {v!r}")


@dataclass(frozen=True)
class TraitVector:
    """Personality weights: desire for knowledge, reputation, popularity.

    The weights must sum to 1 so utility stays a convex combination of the
    three state variables.
    """

    kappa: float
    rho: float
    pi: float

    def __post_init__(self) -> None:
        _check_unit("kappa", self.kappa)
        _check_unit("rho", self.rho)
        _check_unit("pi", self.pi)
        total = self.kappa + self.rho + self.pi
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"trait weights must sum to 1 (got {total!r})")


#: Popularity-hungry preset.
TROLL = TraitVector(kappa=0.1, rho=0.1, pi=0.8)
#: Reputation-hungry preset.
EXPERT = TraitVector(kappa=0.2, rho=0.7, pi=0.1)


class ActorState:
    """Mutable per-actor state.

    k        self-perceived knowledge
    r        reputation
    p        popularity
    f_plus   fraction of the phi*N true assertions this actor knows
    f_minus  fraction of the (1-phi)*N false assertions this actor knows

    All five live in [0, 1]; k, f_plus and f_minus never decrease
    (learning is never undone).
    """

    __slots__ = ("k", "r", "p", "f_plus", "f_minus")

    def __init__(self, k: float, r: float, p: float, f_plus: float, f_minus: float):
        _check_unit("k", k)
        _check_unit("r", r)
        _check_unit("p", p)
        _check_unit("f_plus", f_plus)
        _check_unit("f_minus", f_minus)
        self.k = k
        self.r = r
        self.p = p
        self.f_plus = f_plus
        self.f_minus = f_minus

    def copy(self) -> "ActorState":
        return ActorState(self.k, self.r, self.p, self.f_plus, self.f_minus)

    def __repr__(self) -> str:
        return (
            f"ActorState(k={self.k!r}, r={self.r!r}, p={self.p!r}, "
            f"f_plus={self.f_plus!r}, f_minus={self.f_minus!r})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActorState):
            return NotImplemented
        return (
            self.k == other.k
            and self.r == other.r
            and self.p == other.p
            and self.f_plus == other.f_plus
            and self.f_minus == other.f_minus
        )


class Strategy(IntEnum):
    """The four actions available to each player in a duplex game.

    Index encoding: bit 1 (index >= 2) = send an assertion, bit 0
    (odd index) = provide feedback if an assertion arrives.
    """

    SILENT = 0
    FEEDBACK = 1
    SEND = 2
    SEND_FEEDBACK = 3

    @property
    def sends(self) -> bool:
        return self >= 2

    @property
    def gives_feedback(self) -> bool:
        return bool(self & 1)


DUPLEX_STRATEGIES: tuple[Strategy, ...] = (
    Strategy.SILENT,
    Strategy.FEEDBACK,
    Strategy.SEND,
    Strategy.SEND_FEEDBACK,
)
#: One-way mode: the speaker chooses hold/send and never gives feedback.
ONE_WAY_ROW_STRATEGIES: tuple[Strategy, ...] = (Strategy.SILENT, Strategy.SEND)
#: One-way mode: the listener chooses feedback/no-feedback and never sends.
ONE_WAY_COL_STRATEGIES: tuple[Strategy, ...] = (Strategy.SILENT, Strategy.FEEDBACK)


class UtilityDeltas(NamedTuple):
    """Per-actor change breakdown for one game (expected or realized)."""

    dk: float
    dr: float
    dp: float
    cost: float
    du: float


class DirectionRecord(NamedTuple):
    """What happened along one sender-to-receiver direction."""

    active: bool
    assertion_true: bool | None
    new_to_receiver: bool | None
    feedback_sent: bool


class InteractionOutcome(NamedTuple):
    """One sampled interaction: direction records plus realized changes."""

    a_to_b: DirectionRecord
    b_to_a: DirectionRecord
    deltas_a: UtilityDeltas
    deltas_b: UtilityDeltas


@dataclass
class PayoffMatrix:
    """Bimatrix of expected utility-change pairs (row player, column player).

    Strategy labels are Strategy members for game-built matrices and may
    be plain indices for matrices loaded from files.
    """

    row_strategies: tuple
    col_strategies: tuple
    entries: list  # entries[i][j] = (delta_u_row, delta_u_col)

    @property
    def rows(self) -> int:
        return len(self.row_strategies)

    @property
    def cols(self) -> int:
        return len(self.col_strategies)

    def row_payoff(self, i: int, j: int) -> float:
        return self.entries[i][j][0]

    def col_payoff(self, i: int, j: int) -> float:
        return self.entries[i][j][1]


def utility(state: ActorState, traits: TraitVector) -> float:
    """Trait-weighted utility kappa*k + rho*r + pi*p, in [0, 1]."""
    return traits.kappa * state.k + traits.rho * state.r + traits.pi * state.p


def truthfulness(state: ActorState, params: GlobalParams) -> float | None:
    """Probability that an assertion drawn from this actor's stock is true.

    Assertions are drawn uniformly from the actor's known mass
    ``m = phi*f_plus + (1-phi)*f_minus``.  Returns None when m = 0: the
    actor holds nothing and cannot send (inactive, not an error).
    """
    known = params.phi * state.f_plus + (1.0 - params.phi) * state.f_minus
    if known == 0.0:
        return None
    return params.phi * state.f_plus / known


def coverage(f_plus: float, f_minus: float, params: GlobalParams) -> float:
    """Rumor-discounted fraction of the network's assertions already seen.

    A false assertion counts for lambda_ of a true one.  Equals 1 exactly
    when f_plus = f_minus = 1; the knowledge update closes the gap 1-k at
    the same rate this quantity's gap closes, so k -> 1 whenever an actor
    has seen everything, regardless of where k started.
    """
    z = params.phi + params.lambda_ * (1.0 - params.phi)
    if z == 0.0:  # phi = lambda_ = 0: no assertion carries knowledge value
        return 0.0
    return (params.phi * f_plus + params.lambda_ * (1.0 - params.phi) * f_minus) / z


def _knowledge_gain(state: ActorState, params: GlobalParams, true_assertion: bool) -> float:
    """Deterministic k increment if one new (true/false) assertion lands."""
    phi = params.phi
    n = params.n_assertions
    if true_assertion:
        if phi == 0.0:
            return 0.0
        f_plus_new = min(1.0, state.f_plus + 1.0 / (phi * n))
        cov_new = coverage(f_plus_new, state.f_minus, params)
    else:
        if phi == 1.0:
            return 0.0
        f_minus_new = min(1.0, state.f_minus + 1.0 / ((1.0 - phi) * n))
        cov_new = coverage(state.f_plus, f_minus_new, params)
    gap = 1.0 - coverage(state.f_plus, state.f_minus, params)
    if gap <= 0.0:
        return 0.0
    ratio = (1.0 - cov_new) / gap
    if ratio < 0.0:
        ratio = 0.0
    elif ratio > 1.0:
        ratio = 1.0
    return (1.0 - state.k) * (1.0 - ratio)


class _ActorTables(NamedTuple):
    """Per-actor quantities precomputed once per game."""

    can_send: bool
    t: float  # truthfulness; 0.0 placeholder when inactive
    dp_by_acts: tuple[float, float, float]  # popularity delta for 0/1/2 own acts
    recv_if_true: float  # expected dk if the opponent transmits a true assertion
    recv_if_false: float
    exp_dr: float  # expected dr as a sender whose assertion gets feedback


def _actor_tables(state: ActorState, params: GlobalParams) -> _ActorTables:
    t = truthfulness(state, params)
    can_send = t is not None
    p0 = (1.0 - params.delta) * state.p
    p1 = p0 + params.gamma_p * (1.0 - p0)
    p2 = p1 + params.gamma_p * (1.0 - p1)
    dp = (p0 - state.p, p1 - state.p, p2 - state.p)
    recv_t = (1.0 - state.f_plus) * _knowledge_gain(state, params, True)
    recv_f = (1.0 - state.f_minus) * _knowledge_gain(state, params, False)
    if can_send:
        exp_dr = params.gamma_r * (t * (1.0 - state.r) - (1.0 - t) * state.r)
    else:
        t = 0.0
        exp_dr = 0.0
    return _ActorTables(can_send, t, dp, recv_t, recv_f, exp_dr)


def _entry(
    ta: _ActorTables,
    tb: _ActorTables,
    traits_a: TraitVector,
    traits_b: TraitVector,
    s_a: Strategy,
    s_b: Strategy,
    params: GlobalParams,
) -> tuple[UtilityDeltas, UtilityDeltas]:
    # Effective acts: an empty-handed actor cannot send, and feedback only
    # answers an assertion that was actually transmitted.  Moot strategy
    # bits therefore cannot influence any number computed below.
    send_a = s_a.sends and ta.can_send
    send_b = s_b.sends and tb.can_send
    fb_a = s_a.gives_feedback and send_b
    fb_b = s_b.gives_feedback and send_a

    dk_a = ta.recv_if_true * tb.t + ta.recv_if_false * (1.0 - tb.t) if send_b else 0.0
    dk_b = tb.recv_if_true * ta.t + tb.recv_if_false * (1.0 - ta.t) if send_a else 0.0
    dr_a = ta.exp_dr if fb_b else 0.0
    dr_b = tb.exp_dr if fb_a else 0.0
    dp_a = ta.dp_by_acts[(1 if send_a else 0) + (1 if fb_a else 0)]
    dp_b = tb.dp_by_acts[(1 if send_b else 0) + (1 if fb_b else 0)]
    cost_a = (params.cost_send if send_a else 0.0) + (params.cost_feedback if fb_a else 0.0)
    cost_b = (params.cost_send if send_b else 0.0) + (params.cost_feedback if fb_b else 0.0)

    du_a = traits_a.kappa * dk_a + traits_a.rho * dr_a + traits_a.pi * dp_a - cost_a
    du_b = traits_b.kappa * dk_b + traits_b.rho * dr_b + traits_b.pi * dp_b - cost_b
    return (
        UtilityDeltas(dk_a, dr_a, dp_a, cost_a, du_a),
        UtilityDeltas(dk_b, dr_b, dp_b, cost_b, du_b),
    )


def expected_deltas(
    state_a: ActorState,
    traits_a: TraitVector,
    state_b: ActorState,
    traits_b: TraitVector,
    s_a: Strategy,
    s_b: Strategy,
    params: GlobalParams,
) -> tuple[UtilityDeltas, UtilityDeltas]:
    """Expected per-actor utility changes for one strategy pair.

    Expectations are over assertion truth and newness only; popularity
    moves and effort costs are deterministic given the strategies.  The
    result is exactly what `realize_outcome` averages to.
    """
    ta = _actor_tables(state_a, params)
    tb = _actor_tables(state_b, params)
    return _entry(ta, tb, traits_a, traits_b, s_a, s_b, params)


def build_matrix(
    state_a: ActorState,
    traits_a: TraitVector,
    state_b: ActorState,
    traits_b: TraitVector,
    params: GlobalParams,
    mode: str = "duplex",
) -> PayoffMatrix:
    """Expected-payoff bimatrix for a pair of actors.

    mode "duplex": 4x4 over all four strategies for both players.
    mode "one_way": 2x2; the row player is the speaker (hold/send), the
    column player the listener (no-feedback/feedback).  One-way entries
    coincide bit-for-bit with the corresponding duplex sub-entries.
    """
    if mode == "duplex":
        row_strats, col_strats = DUPLEX_STRATEGIES, DUPLEX_STRATEGIES
    elif mode == "one_way":
        row_strats, col_strats = ONE_WAY_ROW_STRATEGIES, ONE_WAY_COL_STRATEGIES
    else:
        raise ValueError(f"unknown mode {mode!r} (expected 'duplex' or 'one_way')")
    ta = _actor_tables(state_a, params)
    tb = _actor_tables(state_b, params)
    entries = []
    for s_a in row_strats:
        row = []
        for s_b in col_strats:
            da, db = _entry(ta, tb, traits_a, traits_b, s_a, s_b, params)
            row.append((da.du, db.du))
        entries.append(row)
    return PayoffMatrix(row_strats, col_strats, entries)


def _apply_knowledge(state: ActorState, params: GlobalParams, true_assertion: bool) -> float:
    """Credit one new assertion to the receiver; returns the realized dk."""
    gain = _knowledge_gain(state, params, true_assertion)
    phi = params.phi
    n = params.n_assertions
    if true_assertion:
        state.f_plus = min(1.0, state.f_plus + 1.0 / (phi * n))
    else:
        state.f_minus = min(1.0, state.f_minus + 1.0 / ((1.0 - phi) * n))
    new_k = min(1.0, state.k + gain)
    dk = new_k - state.k
    state.k = new_k
    return dk


def realize_outcome(
    state_a: ActorState,
    traits_a: TraitVector,
    state_b: ActorState,
    traits_b: TraitVector,
    s_a: Strategy,
    s_b: Strategy,
    params: GlobalParams,
    rng,
) -> InteractionOutcome:
    """Sample one concrete interaction and update both actor states.

    Per active direction, in the fixed order a->b then b->a: draw the
    assertion's truth from the sender's stock, then whether it is new to
    the receiver; new assertions raise the receiver's f and k.  Feedback
    (when the receiver's bit is set) moves the sender's reputation toward
    1 for a true assertion and toward 0 for a rumor.  Both actors' p
    decays once per game, then grows once per own visible act (send
    first, then feedback).  Effort costs enter the payoff only.

    ``rng`` needs only a ``random()`` method; draws are consumed in a
    fixed documented order so runs are reproducible.
    """
    t_a = truthfulness(state_a, params)
    t_b = truthfulness(state_b, params)
    send_a = s_a.sends and t_a is not None
    send_b = s_b.sends and t_b is not None
    fb_a = s_a.gives_feedback and send_b
    fb_b = s_b.gives_feedback and send_a

    r_a0, r_b0, k_a0, k_b0, p_a0, p_b0 = (
        state_a.r, state_b.r, state_a.k, state_b.k, state_a.p, state_b.p,
    )

    # Direction a -> b.
    if send_a:
        is_true_ab = rng.random() < t_a
        new_prob = (1.0 - state_b.f_plus) if is_true_ab else (1.0 - state_b.f_minus)
        is_new_ab = rng.random() < new_prob
        if is_new_ab:
            _apply_knowledge(state_b, params, is_true_ab)
        if fb_b:
            if is_true_ab:
                state_a.r = state_a.r + params.gamma_r * (1.0 - state_a.r)
            else:
                state_a.r = state_a.r - params.gamma_r * state_a.r
        rec_ab = DirectionRecord(True, is_true_ab, is_new_ab, fb_b)
    else:
        rec_ab = DirectionRecord(False, None, None, False)

    # Direction b -> a.
    if send_b:
        is_true_ba = rng.random() < t_b
        new_prob = (1.0 - state_a.f_plus) if is_true_ba else (1.0 - state_a.f_minus)
        is_new_ba = rng.random() < new_prob
        if is_new_ba:
            _apply_knowledge(state_a, params, is_true_ba)
        if fb_a:
            if is_true_ba:
                state_b.r = state_b.r + params.gamma_r * (1.0 - state_b.r)
            else:
                state_b.r = state_b.r - params.gamma_r * state_b.r
        rec_ba = DirectionRecord(True, is_true_ba, is_new_ba, fb_a)
    else:
        rec_ba = DirectionRecord(False, None, None, False)

    # Popularity: decay once, then one gain per own visible act.
    for state, send, fb in ((state_a, send_a, fb_a), (state_b, send_b, fb_b)):
        p = (1.0 - params.delta) * state.p
        if send:
            p = p + params.gamma_p * (1.0 - p)
        if fb:
            p = p + params.gamma_p * (1.0 - p)
        state.p = p

    cost_a = (params.cost_send if send_a else 0.0) + (params.cost_feedback if fb_a else 0.0)
    cost_b = (params.cost_send if send_b else 0.0) + (params.cost_feedback if fb_b else 0.0)
    dk_a, dk_b = state_a.k - k_a0, state_b.k - k_b0
    dr_a, dr_b = state_a.r - r_a0, state_b.r - r_b0
    dp_a, dp_b = state_a.p - p_a0, state_b.p - p_b0
    du_a = traits_a.kappa * dk_a + traits_a.rho * dr_a + traits_a.pi * dp_a - cost_a
    du_b = traits_b.kappa * dk_b + traits_b.rho * dr_b + traits_b.pi * dp_b - cost_b
    return InteractionOutcome(
        rec_ab,
        rec_ba,
        UtilityDeltas(dk_a, dr_a, dp_a, cost_a, du_a),
        UtilityDeltas(dk_b, dr_b, dp_b, cost_b, du_b),
    )
