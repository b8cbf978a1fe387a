"""Pure-numpy assignment kernel: shortest-augmenting-path with potentials.

Mirrors the compiled kernel in _lap_cy.pyx operation for operation so both
backends produce bit-identical matchings and duals.
"""

from __future__ import annotations

import numpy as np


def solve_square(cost: np.ndarray):
    """Minimum-cost perfect matching on a square cost matrix.

    Returns (col_of_row, u, v): assigned column per row plus dual potentials
    satisfying cost[i, j] - u[i] - v[j] >= 0 with equality on matched edges.
    """
    c = np.ascontiguousarray(cost, dtype=np.float64)
    n = c.shape[0]
    if c.shape[1] != n:
        raise ValueError("solve_square expects a square matrix")
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.intp)  # p[j]: 1-based row matched to col j; col 0 is virtual
    way = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = c[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            idx = np.nonzero(better)[0]
            minv[idx + 1] = cur[idx]
            way[idx + 1] = j0
            free_idx = np.nonzero(free)[0] + 1
            j1 = int(free_idx[np.argmin(minv[free_idx])])
            delta = minv[j1]
            used_idx = np.nonzero(used)[0]
            u[p[used_idx]] += delta
            v[used_idx] -= delta
            minv[free_idx] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.intp)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row, u[1:].copy(), v[1:].copy()
