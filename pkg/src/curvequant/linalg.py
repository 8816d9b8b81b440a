"""Exact sparse linear algebra over Q (and small dense helpers)."""

from __future__ import annotations

from fractions import Fraction as Q

__all__ = ["solve_exact", "solve_many", "invert_dense", "nullity_zero"]


def _reduce_row(row, rhs, pivots):
    """Reduce (row, rhs) against the current pivot set.

    Eliminating the smallest pivot column only introduces larger columns
    (each pivot row has its pivot as minimum column), so this terminates
    after at most len(pivots) eliminations.
    """
    row = {c: v for c, v in row.items() if v != 0}
    while True:
        pcols = [c for c in row if c in pivots]
        if not pcols:
            return row, rhs
        col = min(pcols)
        prow, prhs = pivots[col]
        f = row[col]
        for c, v in prow.items():
            nv = row.get(c, Q(0)) - f * v
            if nv == 0:
                row.pop(c, None)
            else:
                row[c] = nv
        rhs = rhs - f * prhs


def solve_exact(rows, rhs_list, nvars):
    """Solve a sparse overdetermined system; free variables are set to zero.

    rows: list of {col: Q} dicts.  Returns a list of Q of length nvars, or
    None when the system is inconsistent.
    """
    pivots = {}
    for row, rhs in zip(rows, rhs_list):
        row = {c: Q(v) for c, v in row.items() if v != 0}
        rhs = Q(rhs)
        row, rhs = _reduce_row(row, rhs, pivots)
        if not row:
            if rhs != 0:
                return None
            continue
        col = min(row)
        f = row[col]
        prow = {c: v / f for c, v in row.items()}
        prhs = rhs / f
        pivots[col] = (prow, prhs)
    # back substitution with free variables at zero
    sol = [Q(0)] * nvars
    for col in sorted(pivots, reverse=True):
        prow, prhs = pivots[col]
        v = prhs
        for c, coeff in prow.items():
            if c != col:
                v -= coeff * sol[c]
        sol[col] = v
    return sol


def solve_many(rows, rhs_columns, nvars):
    """Solve one sparse system for several right-hand sides at once.

    rhs_columns: dict key -> list of rhs values (one per row).  Returns
    dict key -> solution list, or None on inconsistency of any column.
    """
    out = {}
    for key, rhs_list in rhs_columns.items():
        sol = solve_exact(rows, rhs_list, nvars)
        if sol is None:
            return None
        out[key] = sol
    return out


def invert_dense(mat):
    """Exact inverse of a dense square matrix of Fractions; None if singular."""
    n = len(mat)
    a = [[Q(x) for x in row] + [Q(1) if i == j else Q(0) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        f = a[col][col]
        a[col] = [x / f for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                g = a[r][col]
                a[r] = [x - g * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def nullity_zero(mat) -> bool:
    """True when a dense rectangular matrix has full column rank."""
    if not mat:
        return True
    ncols = len(mat[0])
    rows = [{j: Q(v) for j, v in enumerate(r) if v != 0} for r in mat]
    pivots = {}
    for row in rows:
        row, _ = _reduce_row(row, Q(0), pivots)
        if row:
            col = min(row)
            f = row[col]
            pivots[col] = ({c: v / f for c, v in row.items()}, Q(0))
    return len(pivots) == ncols
