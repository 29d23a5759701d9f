"""Nash equilibria of small bimatrix games by support enumeration.

Designed for the 4x4 duplex and 2x2 one-way dissemination games, whose
moot-feedback degeneracy duplicates whole rows and columns.  The solver
therefore tries every pair of nonempty supports (including unequal
sizes), skips singular indifference systems, and keeps only candidates
that survive a full no-profitable-deviation check.

All linear algebra is direct elimination with partial pivoting on plain
floats; a pivot below 1e-12 marks the system singular.  Results are
deterministic: supports are enumerated in lexicographic order and
near-duplicate profiles (1e-7 in max norm) are dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import PayoffMatrix

__all__ = [
    "MixedStrategy",
    "EquilibriumProfile",
    "NumericalFailureError",
    "enumerate_equilibria",
    "verify_equilibrium",
    "select_equilibrium",
    "expected_payoffs",
    "solve_selected",
]

#: A mixed strategy is a probability vector over a player's pure strategies.
MixedStrategy = tuple[float, ...]

_PIVOT_EPS = 1e-12
_DEDUP_EPS = 1e-7


class NumericalFailureError(RuntimeError):
    """No equilibrium survived the numerical checks (finite games have one)."""


@dataclass(frozen=True)
class EquilibriumProfile:
    """A mixed-strategy pair with its payoffs and verification residual."""

    sigma_row: MixedStrategy
    sigma_col: MixedStrategy
    payoff_row: float
    payoff_col: float
    residual: float
    support_row: tuple[int, ...]
    support_col: tuple[int, ...]

    @property
    def welfare(self) -> float:
        return self.payoff_row + self.payoff_col


def _check_dims(m: PayoffMatrix, sigma_row, sigma_col) -> None:
    if len(sigma_row) != m.rows or len(sigma_col) != m.cols:
        raise ValueError(
            f"strategy lengths ({len(sigma_row)}, {len(sigma_col)}) do not match "
            f"matrix shape ({m.rows}, {m.cols})"
        )


def expected_payoffs(m: PayoffMatrix, sigma_row, sigma_col) -> tuple[float, float]:
    """Bilinear expected payoffs (row player, column player)."""
    _check_dims(m, sigma_row, sigma_col)
    u_row = 0.0
    u_col = 0.0
    for i in range(m.rows):
        x = sigma_row[i]
        if x == 0.0:
            continue
        for j in range(m.cols):
            y = sigma_col[j]
            if y == 0.0:
                continue
            a, b = m.entries[i][j]
            u_row += x * y * a
            u_col += x * y * b
    return u_row, u_col


def verify_equilibrium(m: PayoffMatrix, prof: EquilibriumProfile, tol: float = 1e-9) -> float:
    """Max gain any player could get by a unilateral pure deviation.

    The profile is an equilibrium (within tol) iff the residual <= tol.
    """
    return _deviation_residual(m, prof.sigma_row, prof.sigma_col)


def _deviation_residual(m: PayoffMatrix, sigma_row, sigma_col) -> float:
    _check_dims(m, sigma_row, sigma_col)
    u_row, u_col = expected_payoffs(m, sigma_row, sigma_col)
    best_row = max(
        sum(sigma_col[j] * m.entries[i][j][0] for j in range(m.cols)) for i in range(m.rows)
    )
    best_col = max(
        sum(sigma_row[i] * m.entries[i][j][1] for i in range(m.rows)) for j in range(m.cols)
    )
    return max(best_row - u_row, best_col - u_col)


def _solve_dense(aug: list[list[float]], n_rows: int, n_cols: int) -> list[float] | None:
    """Solve the n_rows x n_cols system given as [A | b] rows.

    Square systems: Gaussian elimination with partial pivoting.
    Overdetermined: normal equations, then elimination.  Underdetermined
    or (near-)singular systems return None and the caller skips the
    support pair.
    """
    if n_rows < n_cols:
        return None
    if n_rows > n_cols:
        # Normal equations A^T A x = A^T b.
        nt = []
        for i in range(n_cols):
            row = []
            for j in range(n_cols):
                row.append(sum(aug[k][i] * aug[k][j] for k in range(n_rows)))
            row.append(sum(aug[k][i] * aug[k][n_cols] for k in range(n_rows)))
            nt.append(row)
        aug = nt
        n_rows = n_cols
    a = [row[:] for row in aug]
    n = n_cols
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot_row][col]) < _PIVOT_EPS:
            return None
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor != 0.0:
                for c in range(col, n + 1):
                    a[r][c] -= factor * a[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n] - sum(a[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / a[r][r]
    return x


def _indifference_mixture(
    payoffs_getter, own_support, opp_support, n_opp: int
) -> tuple[tuple[float, ...], float] | None:
    """Opponent mixture making `own_support` strategies indifferent.

    Unknowns: one probability per opponent-support strategy plus the
    common payoff v.  Equations: one per own-support strategy plus
    normalization.  Returns (mixture over all n_opp strategies, v) or
    None when the system is singular/infeasible.
    """
    k = len(opp_support)
    rows = []
    for i in own_support:
        row = [payoffs_getter(i, j) for j in opp_support]
        row.append(-1.0)  # -v
        row.append(0.0)  # rhs
        rows.append(row)
    rows.append([1.0] * k + [0.0, 1.0])  # probabilities sum to 1
    sol = _solve_dense(rows, len(rows), k + 1)
    if sol is None:
        return None
    probs, v = sol[:k], sol[k]
    full = [0.0] * n_opp
    for idx, j in enumerate(opp_support):
        if probs[idx] < 0.0:
            if probs[idx] < -1e-9:
                return None
            probs[idx] = 0.0
        full[j] = probs[idx]
    total = sum(full)
    if abs(total - 1.0) > 1e-9:
        return None
    if total != 1.0:
        full = [x / total for x in full]
    return tuple(full), v


def _supports(n: int) -> list[tuple[int, ...]]:
    subsets = []
    for size in range(1, n + 1):
        subsets.extend(itertools.combinations(range(n), size))
    subsets.sort()
    return subsets


def enumerate_equilibria(m: PayoffMatrix, tol: float = 1e-9) -> list[EquilibriumProfile]:
    """All Nash equilibria found by support enumeration, verified.

    Every pair of nonempty supports is tried in lexicographic order; a
    candidate is kept iff its probabilities are a valid distribution and
    no player can gain more than tol by deviating.  Profiles closer than
    1e-7 in max norm are deduplicated (first wins).  Raises
    NumericalFailureError if nothing survives: a finite game always has
    an equilibrium, so an empty list means numerical failure.
    """
    if m.rows > 8 or m.cols > 8:
        raise ValueError(f"matrix {m.rows}x{m.cols} exceeds the supported 8x8 size")
    for i in range(m.rows):
        for j in range(m.cols):
            a, b = m.entries[i][j]
            if not (abs(a) < float("inf") and abs(b) < float("inf")):
                raise ValueError(f"non-finite payoff at entry ({i}, {j})")

    results: list[EquilibriumProfile] = []
    kept: list[list[float]] = []  # concatenated probability vectors, for dedup

    def row_payoff(i: int, j: int) -> float:
        return m.entries[i][j][0]

    def col_payoff_t(j: int, i: int) -> float:  # transposed accessor
        return m.entries[i][j][1]

    for support_row in _supports(m.rows):
        for support_col in _supports(m.cols):
            # Column mixture y makes the row support indifferent; row
            # mixture x makes the column support indifferent.
            sol_y = _indifference_mixture(row_payoff, support_row, support_col, m.cols)
            if sol_y is None:
                continue
            sol_x = _indifference_mixture(col_payoff_t, support_col, support_row, m.rows)
            if sol_x is None:
                continue
            sigma_col, _ = sol_y
            sigma_row, _ = sol_x
            residual = _deviation_residual(m, sigma_row, sigma_col)
            if residual > tol:
                continue
            vec = list(sigma_row) + list(sigma_col)
            if any(
                max(abs(a - b) for a, b in zip(vec, old)) < _DEDUP_EPS for old in kept
            ):
                continue
            u_row, u_col = expected_payoffs(m, sigma_row, sigma_col)
            kept.append(vec)
            results.append(
                EquilibriumProfile(
                    sigma_row=sigma_row,
                    sigma_col=sigma_col,
                    payoff_row=u_row,
                    payoff_col=u_col,
                    residual=residual,
                    support_row=tuple(i for i in range(m.rows) if sigma_row[i] > 0.0),
                    support_col=tuple(j for j in range(m.cols) if sigma_col[j] > 0.0),
                )
            )
    if not results:
        raise NumericalFailureError(
            "support enumeration found no equilibrium; the game is numerically degenerate"
        )
    return results


def select_equilibrium(
    candidates: list[EquilibriumProfile], m: PayoffMatrix | None = None
) -> EquilibriumProfile:
    """Deterministically pick one profile: max payoff sum, then smallest
    supports lexicographically, then largest probability vector."""
    if not candidates:
        raise ValueError("cannot select from an empty candidate list")
    best_welfare = max(c.welfare for c in candidates)
    tied = [c for c in candidates if c.welfare >= best_welfare - 1e-12]
    tied.sort(
        key=lambda c: (
            c.support_row,
            c.support_col,
            tuple(-p for p in c.sigma_row),
            tuple(-p for p in c.sigma_col),
        )
    )
    return tied[0]


def _pure_equilibria(m: PayoffMatrix) -> list[EquilibriumProfile]:
    """Exact best-response scan over all cells."""
    col_best = [max(m.entries[i][j][0] for i in range(m.rows)) for j in range(m.cols)]
    row_best = [max(m.entries[i][j][1] for j in range(m.cols)) for i in range(m.rows)]
    found = []
    for i in range(m.rows):
        row = m.entries[i]
        for j in range(m.cols):
            a, b = row[j]
            if a >= col_best[j] and b >= row_best[i]:
                sigma_row = tuple(1.0 if r == i else 0.0 for r in range(m.rows))
                sigma_col = tuple(1.0 if c == j else 0.0 for c in range(m.cols))
                found.append(
                    EquilibriumProfile(
                        sigma_row=sigma_row,
                        sigma_col=sigma_col,
                        payoff_row=a,
                        payoff_col=b,
                        residual=0.0,
                        support_row=(i,),
                        support_col=(j,),
                    )
                )
    return found


def solve_selected(m: PayoffMatrix, tol: float = 1e-9) -> EquilibriumProfile:
    """One deterministic equilibrium, fast.

    Pure equilibria are located by an exact 16-cell best-response scan
    and selected by the standard rule; full support enumeration runs only
    when no pure equilibrium exists (exact indifference, rare in the
    dissemination games).  Selection can differ from
    select_equilibrium(enumerate_equilibria(m)) only when a mixed
    equilibrium strictly welfare-dominates every pure one, which requires
    such a knife edge.
    """
    pure = _pure_equilibria(m)
    if pure:
        return select_equilibrium(pure, m)
    return select_equilibrium(enumerate_equilibria(m, tol), m)
