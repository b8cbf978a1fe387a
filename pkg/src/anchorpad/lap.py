"""Minimum-cost assignment solve with a deterministic tie-break.

The heavy kernel (shortest augmenting path) runs in the compiled extension
when available; set ANCHORPAD_PURE_LAP=1 to force the pure-numpy twin. On top
of the kernel, a refinement pass over the tight-edge graph (zero reduced cost
under the optimal duals) rewrites the matching into the lexicographically
smallest optimal one, so equal-cost optima resolve the same way on every
platform and backend.
"""

from __future__ import annotations

import os

import numpy as np

from . import _lap_py

if os.environ.get("ANCHORPAD_PURE_LAP", "") == "1":
    _kernel = _lap_py
    BACKEND = "python"
else:
    try:
        from . import _lap_cy as _kernel

        BACKEND = "cython"
    except ImportError:
        _kernel = _lap_py
        BACKEND = "python"

__all__ = ["solve", "BACKEND"]


def _try_augment(row, adj, match_row, match_col, blocked):
    """Iterative Kuhn DFS: find an augmenting path for `row` in the tight graph.

    `blocked` marks columns that must not be touched (already fixed by the
    lexicographic pass or just claimed). Updates the matching on success.
    """
    visited = np.zeros(match_row.shape[0], dtype=bool)
    # stack entries: (row, index into adj[row]); path kept implicitly by parents
    stack = [(row, 0)]
    parent_col = {}  # col -> row that reached it during this search
    while stack:
        r, k = stack.pop()
        cols = adj[r]
        advanced = False
        while k < len(cols):
            c = cols[k]
            k += 1
            if blocked[c] or visited[c]:
                continue
            visited[c] = True
            parent_col[c] = r
            owner = match_row[c]
            if owner == -1:
                # free column: walk back flipping the alternating path
                cc = c
                while True:
                    rr = parent_col[cc]
                    prev = match_col[rr]
                    match_col[rr] = cc
                    match_row[cc] = rr
                    if rr == row:
                        return True
                    cc = prev
            stack.append((r, k))
            stack.append((owner, 0))
            advanced = True
            break
        if advanced:
            continue
    return False


def _refine_lexicographic(c, col_of_row, u, v, n_real):
    """Rewrite an optimal matching into the lexicographically smallest one.

    Any optimal perfect matching of a square instance uses only tight edges
    (cost - u - v == 0) of the optimal duals, and conversely every perfect
    matching inside the tight graph is optimal. Greedily fixing, for each row
    in index order, the smallest tight column that still leaves the remaining
    rows matchable therefore yields the lexicographic minimum.
    """
    n = c.shape[0]
    rc = c - u[:, None] - v[None, :]
    matched_slack = float(np.abs(rc[np.arange(n), col_of_row]).max()) if n else 0.0
    scale = max(1.0, float(np.abs(c).max()))
    tol = max(1e-10 * scale, 2.0 * matched_slack, 1e-12)
    tight = rc <= tol
    adj = [np.nonzero(tight[i])[0] for i in range(n)]

    match_col = col_of_row.astype(np.intp).copy()
    match_row = np.empty(n, dtype=np.intp)
    match_row[match_col] = np.arange(n, dtype=np.intp)
    blocked = np.zeros(n, dtype=bool)

    for i in range(n_real):
        current = match_col[i]
        for cand in adj[i]:
            if blocked[cand]:
                continue
            if cand == current:
                break
            # tentatively hand `cand` to row i and rehome its current owner
            saved_col = match_col.copy()
            saved_row = match_row.copy()
            displaced = match_row[cand]
            match_row[current] = -1
            match_col[i] = cand
            match_row[cand] = i
            match_col[displaced] = -1
            blocked[cand] = True
            if _try_augment(displaced, adj, match_row, match_col, blocked):
                current = cand
                break
            blocked[cand] = False
            match_col = saved_col
            match_row = saved_row
        blocked[current] = True
        match_col[i] = current
    return match_col


def solve(cost: np.ndarray) -> np.ndarray:
    """Assign every row of `cost` (rows <= cols) a distinct column at minimum
    total cost; among equal-cost optima returns the lexicographically smallest
    column list. Returns col_of_row with shape (n_rows,)."""
    c = np.ascontiguousarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError("cost must be a 2-d matrix")
    ns, nl = c.shape
    if ns > nl:
        raise ValueError("solve expects n_rows <= n_cols")
    if ns == 0:
        return np.empty(0, dtype=np.intp)
    if ns < nl:
        # dummy zero rows absorb surplus columns without changing real costs
        c_sq = np.vstack([c, np.zeros((nl - ns, nl))])
    else:
        c_sq = c
    col_of_row, u, v = _kernel.solve_square(c_sq)
    refined = _refine_lexicographic(c_sq, col_of_row, u, v, ns)
    return refined[:ns]
