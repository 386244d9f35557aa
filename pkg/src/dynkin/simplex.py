"""Exact zero-sum matrix game solver: rational primal simplex, Bland's rule.

For a payoff matrix M (row player minimises, column player maximises) the
minimax LP  "minimise v subject to x'M <= v 1, x in the simplex"  is solved
through the classical substitution u = x / v after shifting M entrywise so
that all payoffs are positive: the LP becomes the packing program

    maximise sum(u)  subject to  M' u <= 1 (one constraint per column), u >= 0,

whose slack basis is feasible, so a single primal simplex run suffices.
The optimal column mixture is read off the dual values (slack reduced
costs).  All arithmetic is over `fractions.Fraction`; Bland's pivoting rule
(smallest-index entering column, smallest basis index on ratio ties) makes
the run deterministic and cycle-free.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["solve_zero_sum"]


def solve_zero_sum(matrix) -> tuple[Fraction, tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Value and optimal mixtures of the zero-sum game with payoff ``matrix``.

    ``matrix[i][j]`` is what the row player (minimiser) pays when the pure
    pair (i, j) is played.  Returns ``(value, row_mix, col_mix)`` with both
    mixtures exactly normalized and

        max_j (row_mix' M)_j == value == min_i (M col_mix)_i.
    """
    M = [[Fraction(v) for v in row] for row in matrix]
    R, C = len(M), len(M[0])
    if any(len(row) != C for row in M):
        raise ValueError("ragged payoff matrix")
    if C > R:
        # solve the transposed game with roles swapped to keep the
        # constraint side (and hence typical pivot count) small
        value, col, row = solve_zero_sum([[-M[i][j] for i in range(R)] for j in range(C)])
        return -value, row, col
    shift = 1 - min(min(row) for row in M)
    # tableau: C constraint rows + objective; columns: R structural, C slacks, rhs
    ncols = R + C + 1
    tab = []
    for j in range(C):
        row = [M[i][j] + shift for i in range(R)]
        row += [Fraction(1) if s == j else Fraction(0) for s in range(C)]
        row.append(Fraction(1))
        tab.append(row)
    obj = [Fraction(-1)] * R + [Fraction(0)] * C + [Fraction(0)]
    basis = list(range(R, R + C))

    while True:
        enter = -1
        for j in range(R + C):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave, best, best_basis = -1, None, None
        for r in range(C):
            a = tab[r][enter]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < best_basis):
                    leave, best, best_basis = r, ratio, basis[r]
        if leave < 0:
            raise ArithmeticError("unbounded matrix-game LP; matrix shift failed")
        piv = tab[leave][enter]
        prow = [v / piv for v in tab[leave]]
        tab[leave] = prow
        for r in range(C):
            if r != leave and tab[r][enter] != 0:
                fct = tab[r][enter]
                tab[r] = [v - fct * p for v, p in zip(tab[r], prow)]
        if obj[enter] != 0:
            fct = obj[enter]
            obj = [v - fct * p for v, p in zip(obj, prow)]
        basis[leave] = enter

    u = [Fraction(0)] * R
    for r, b in enumerate(basis):
        if b < R:
            u[b] = tab[r][-1]
    total_u = sum(u, Fraction(0))
    # dual values sit in the objective row under the slack columns
    s = [obj[R + j] for j in range(C)]
    total_s = sum(s, Fraction(0))
    if total_u == 0 or total_s == 0:
        raise ArithmeticError("degenerate optimum in matrix-game LP")
    value = 1 / total_u - shift
    row_mix = tuple(ui / total_u for ui in u)
    col_mix = tuple(sj / total_s for sj in s)
    return value, row_mix, col_mix
