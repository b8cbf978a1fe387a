"""Cross-view alignment: cosine cost matrix, exact assignment, similarity-
sorted reordering, kernel interpolation that pads the smaller view level with
the larger one, final realignment, and fusion."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import cycle, islice

import numpy as np

from . import lap

__all__ = [
    "CostMatrix",
    "Assignment",
    "KernelConfig",
    "PaddedAlignment",
    "build_cost_matrix",
    "hungarian",
    "reorder_rows",
    "select_gap_indices",
    "gaussian_kernel",
    "interpolate_point",
    "default_sigma",
    "pad_and_realign",
    "fuse",
]


@dataclass(frozen=True)
class CostMatrix:
    """Dissimilarity matrix with the smaller view on the rows.

    ``rows_view`` records which input view landed on the rows (0 or 1).
    Entries live in [0, 1]: rows are 1 - (row-normalized clipped cosine).
    """

    z: np.ndarray
    rows_view: int

    @property
    def n_short(self) -> int:
        return self.z.shape[0]

    @property
    def n_long(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class Assignment:
    """One-to-one pairing covering the smaller side of a cost matrix."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def columns(self) -> np.ndarray:
        return np.asarray([c for _, c in self.pairs], dtype=np.int64)


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel bandwidth; None selects the median pairwise distance
    of the short view's latent rows (seeded subsample)."""

    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class PaddedAlignment:
    """Result of padding the short view and realigning.

    ``padded_short`` holds the distance-sorted short view with synthesized
    rows inserted; ``source_rows`` maps each padded row to its original
    short-view row (-1 for synthesized rows); ``final_pairs`` is the perfect
    matching (long_row, padded_row) from the realignment.
    """

    padded_short: np.ndarray
    zbar: np.ndarray = field(repr=False)
    synth_flags: np.ndarray
    final_pairs: tuple[tuple[int, int], ...]
    source_rows: np.ndarray
    sigma: float


def _cosine_cost_rows(rows: np.ndarray, against: np.ndarray) -> np.ndarray:
    """1 - row-normalized clipped cosine similarity of `rows` vs `against`."""
    rn = np.linalg.norm(rows, axis=1)
    an = np.linalg.norm(against, axis=1)
    if np.any(rn == 0) or np.any(an == 0):
        raise ValueError("zero-vector row: cosine cost undefined")
    sims = (rows / rn[:, None]) @ (against / an[:, None]).T
    np.clip(sims, 0.0, 1.0, out=sims)
    row_sums = sims.sum(axis=1)
    dead = row_sums == 0
    if np.any(dead):
        sims[dead] = 1.0
        row_sums = sims.sum(axis=1)
    return 1.0 - sims / row_sums[:, None]


def build_cost_matrix(latent1: np.ndarray, latent2: np.ndarray) -> CostMatrix:
    """Cost matrix for cross-view assignment; the smaller view takes the rows
    (view 1 on ties)."""
    l1 = np.asarray(latent1, dtype=np.float64)
    l2 = np.asarray(latent2, dtype=np.float64)
    if l1.ndim != 2 or l2.ndim != 2:
        raise ValueError("latents must be 2-d matrices")
    if l1.shape[0] <= l2.shape[0]:
        return CostMatrix(z=_cosine_cost_rows(l1, l2), rows_view=0)
    return CostMatrix(z=_cosine_cost_rows(l2, l1), rows_view=1)


def hungarian(cost: np.ndarray) -> Assignment:
    """Minimum-total-cost one-to-one assignment of min(n_rows, n_cols) pairs.

    Every row of the smaller side is matched; equal-cost optima resolve to
    the lexicographically smallest pair list.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.size == 0:
        raise ValueError("cost must be a nonempty 2-d matrix")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite entry in cost matrix")
    if c.shape[0] <= c.shape[1]:
        cols = lap.solve(c)
        pairs = tuple((i, int(cols[i])) for i in range(c.shape[0]))
    else:
        rows = lap.solve(np.ascontiguousarray(c.T))
        pairs = tuple(sorted((int(rows[j]), j) for j in range(c.shape[1])))
    total = 0.0
    for i, j in pairs:
        total += c[i, j]
    return Assignment(pairs=pairs, total_cost=float(total))


def reorder_rows(cost: CostMatrix, assignment: Assignment) -> tuple[np.ndarray, np.ndarray]:
    """Sort the cost-matrix rows by their assigned-pair distance (ascending,
    ties by original row index).

    Returns (z_sorted, row_order) with z_sorted = z[row_order].
    """
    z = cost.z
    if len(assignment.pairs) != z.shape[0]:
        raise ValueError("assignment does not cover every row of the cost matrix")
    dists = np.asarray([z[i, j] for i, j in assignment.pairs])
    row_order = np.argsort(dists, kind="stable")
    return z[row_order], row_order


def select_gap_indices(sorted_distances: np.ndarray, n_k: int) -> list[tuple[int, int]]:
    """The n_k consecutive-row slots (j, j+1) with the largest distance jumps,
    ties toward smaller j; slots repeat round-robin when n_k exceeds the
    number of slots."""
    d = np.asarray(sorted_distances, dtype=np.float64)
    if n_k == 0:
        return []
    if d.shape[0] < 2:
        raise ValueError("need at least 2 sorted rows to select insertion slots")
    jumps = np.diff(d)
    ranked = np.lexsort((np.arange(jumps.shape[0]), -jumps))
    return [(int(j), int(j) + 1) for j in islice(cycle(ranked), n_k)]


def gaussian_kernel(x, x_i, sigma: float) -> float:
    """exp(-0.5 * (dist / sigma)^2) with dist the Euclidean distance."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    diff = np.asarray(x, dtype=np.float64) - np.asarray(x_i, dtype=np.float64)
    return float(np.exp(-0.5 * (np.linalg.norm(diff) / sigma) ** 2))


def interpolate_point(bounding_rows: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Kernel-weighted synthesis at the midpoint of the slot-bounding rows.

    With two bounding rows the midpoint target makes both normalized kernel
    weights exactly 1/2, so the synthesized row is their mean; a single row
    returns itself. Returns (row, weights).
    """
    rows = np.asarray(bounding_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValueError("need at least one bounding row")
    target = rows.mean(axis=0)
    raw = np.asarray([gaussian_kernel(target, r, sigma) for r in rows])
    total = raw.sum()
    if total == 0.0:
        # kernels underflow for tiny sigma; the midpoint symmetry limit is uniform
        weights = np.full(rows.shape[0], 1.0 / rows.shape[0])
    else:
        weights = raw / total
    return weights @ rows, weights


def default_sigma(latent_short: np.ndarray, seed: int = 0, max_pairs: int = 2000) -> float:
    """Median pairwise Euclidean distance among the short view's latent rows."""
    n = latent_short.shape[0]
    if n < 2:
        return 1.0
    if n * (n - 1) // 2 <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, n, size=max_pairs)
        jj = (ii + rng.integers(1, n, size=max_pairs)) % n
    med = float(np.median(np.linalg.norm(latent_short[ii] - latent_short[jj], axis=1)))
    return med if med > 0 else 1.0


def pad_and_realign(
    latent_short: np.ndarray,
    latent_long: np.ndarray,
    z_sorted: np.ndarray,
    row_order: np.ndarray,
    assignment: Assignment,
    kcfg: KernelConfig | None = None,
) -> PaddedAlignment:
    """Synthesize n_long - n_short rows at the largest similarity gaps, extend
    the sorted cost matrix to square, and realign on its transpose.

    Synthesized rows get freshly computed cosine-cost rows against the long
    view so the extended matrix stays a distance matrix.
    """
    kcfg = kcfg or KernelConfig()
    short = np.asarray(latent_short, dtype=np.float64)
    long_ = np.asarray(latent_long, dtype=np.float64)
    n_s, n_l = short.shape[0], long_.shape[0]
    if z_sorted.shape != (n_s, n_l):
        raise ValueError(f"sorted cost matrix shape {z_sorted.shape} does not match views")
    n_k = n_l - n_s
    if n_k < 0:
        raise ValueError("short view is larger than long view")

    cols = assignment.columns()
    sorted_dists = np.asarray([z_sorted[r, cols[row_order[r]]] for r in range(n_s)])
    sigma = kcfg.sigma if kcfg.sigma is not None else default_sigma(short, kcfg.seed)
    sorted_short = short[row_order]

    slots = select_gap_indices(sorted_dists, n_k) if n_k else []
    inserts: dict[int, list[np.ndarray]] = {}
    for j, j1 in slots:
        row, _ = interpolate_point(sorted_short[[j, j1]], sigma)
        inserts.setdefault(j, []).append(row)

    padded_rows = []
    zbar_rows = []
    flags = []
    sources = []
    for r in range(n_s):
        padded_rows.append(sorted_short[r])
        zbar_rows.append(z_sorted[r])
        flags.append(False)
        sources.append(int(row_order[r]))
        for synth in inserts.get(r, ()):
            padded_rows.append(synth)
            zbar_rows.append(_cosine_cost_rows(synth[None, :], long_)[0])
            flags.append(True)
            sources.append(-1)
    padded_short = np.asarray(padded_rows)
    zbar = np.asarray(zbar_rows)
    final = hungarian(zbar.T)
    return PaddedAlignment(
        padded_short=padded_short,
        zbar=zbar,
        synth_flags=np.asarray(flags, dtype=bool),
        final_pairs=final.pairs,
        source_rows=np.asarray(sources, dtype=np.int64),
        sigma=float(sigma),
    )


def fuse(
    padded: PaddedAlignment,
    latent_long: np.ndarray,
    long_labels: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate each matched (short row, long row) pair into one fused row.

    Rows follow the long view's order, so the long view's genuine virtual
    labels evaluate the fused clustering.
    """
    long_ = np.asarray(latent_long, dtype=np.float64)
    labels = np.asarray(long_labels, dtype=np.int64)
    if len(padded.final_pairs) != long_.shape[0] or labels.shape[0] != long_.shape[0]:
        raise ValueError("matching size does not cover the long view")
    fused = np.empty((long_.shape[0], padded.padded_short.shape[1] + long_.shape[1]))
    for long_row, padded_row in padded.final_pairs:
        fused[long_row] = np.concatenate([padded.padded_short[padded_row], long_[long_row]])
    return fused, labels.copy()
