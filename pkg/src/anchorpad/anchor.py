"""Anchor search: visit scores from a self-repellent random walk over a
cosine-similarity transition matrix, greedy max-separation expansion, index
unification across views, and anchor-based re-representation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CorruptedDataset, as_modality_matrix

__all__ = [
    "WalkConfig",
    "AnchorSet",
    "walk_schedule",
    "transition_matrix",
    "decay_factor",
    "self_repellent_visit_scores",
    "greedy_expand",
    "unify_indices",
    "rerepresent",
    "default_anchor_count",
    "default_radius",
    "select_anchors",
]

# Aligned blocks up to this size run the dense transition-matrix walk; larger
# blocks route the walk through a fixed set of landmark rows so anchor search
# stays subquadratic in the block size.
DENSE_BLOCK_LIMIT = 384
LANDMARK_COUNT = 192


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk settings: decay strength, optional (walks, length) override,
    optional start distribution (uniform when None), and the seed used for
    radius estimation."""

    alpha: float = 0.5
    schedule_override: tuple[int, int] | None = None
    initial_distribution: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.schedule_override is not None:
            n_w, w_l = self.schedule_override
            if n_w < 1 or w_l < 1:
                raise ValueError(f"schedule override must be positive, got {self.schedule_override}")
        if self.initial_distribution is not None:
            pi = np.asarray(self.initial_distribution, dtype=np.float64)
            if pi.ndim != 1 or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
                raise ValueError("initial_distribution must be a probability vector")
            object.__setattr__(self, "initial_distribution", pi)


@dataclass(frozen=True)
class AnchorSet:
    """Selected anchors: per-view visit scores and indices, the unified index
    set over aligned-block positions, per-view anchor matrices (aligned rows
    at the unified indices), and the per-view greedy radii used."""

    per_view_indices: tuple[np.ndarray, ...]
    per_view_scores: tuple[np.ndarray, ...]
    unified: np.ndarray
    matrices: tuple[np.ndarray, ...]
    radii: tuple[float, ...]

    @property
    def n_anchors(self) -> int:
        return int(self.unified.shape[0])


def walk_schedule(n: int) -> tuple[int, int]:
    """Piecewise (walk count, walk length) by sample count."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if n < 100:
        return (20, 3)
    if n < 1000:
        return (10, 5)
    if n < 10000:
        return (5, 10)
    return (3, 20)


def transition_matrix(x: np.ndarray) -> np.ndarray:
    """Row-stochastic transition matrix from pairwise cosine similarity.

    Negative similarities clip to zero, the diagonal is zeroed, and rows
    normalize to sum 1; a row left with no positive similarity falls back to
    the uniform distribution over the other nodes.
    """
    x = as_modality_matrix(x, "transition input")
    n = x.shape[0]
    if n < 2:
        raise ValueError("transition matrix needs at least 2 rows")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ValueError("all-zero feature row: cosine similarity undefined")
    xn = x / norms[:, None]
    s = xn @ xn.T
    np.clip(s, 0.0, None, out=s)
    np.fill_diagonal(s, 0.0)
    row_sums = s.sum(axis=1)
    dead = row_sums == 0
    if np.any(dead):
        s[dead] = 1.0 / (n - 1)
        s[dead, np.nonzero(dead)[0]] = 0.0
        row_sums = s.sum(axis=1)
    return s / row_sums[:, None]


def _check_transition(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("transition matrix must be square")
    if np.any(p < 0) or np.any(np.diagonal(p) != 0):
        raise ValueError("transition matrix must be nonnegative with a zero diagonal")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("transition matrix rows must sum to 1")
    return p


def decay_factor(x, mu, alpha: float):
    """Visit-count decay (x/mu)**(-alpha); 1 when alpha is 0 or x equals mu.

    Scale-invariant: decay_factor(c*x, c*mu, alpha) == decay_factor(x, mu, alpha).
    Accepts scalars or arrays (broadcast elementwise).
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(x <= 0) or np.any(mu <= 0):
        raise ValueError("decay_factor requires positive visit counts")
    out = (x / mu) ** (-alpha)
    return float(out) if out.ndim == 0 else out


def _resolve_walk(n: int, config: WalkConfig) -> tuple[int, int, np.ndarray]:
    n_w, w_l = config.schedule_override if config.schedule_override else walk_schedule(n)
    if config.initial_distribution is not None:
        pi = config.initial_distribution
        if pi.shape[0] != n:
            raise ValueError(f"initial_distribution has length {pi.shape[0]}, expected {n}")
    else:
        pi = np.full(n, 1.0 / n)
    return n_w, w_l, pi


def self_repellent_visit_scores(p: np.ndarray, config: WalkConfig) -> np.ndarray:
    """Accumulated visit mass over n_w walks of w_l steps each.

    Each walk restarts from the initial distribution and evolves it through
    the transition matrix (occupancy convention: the chance of sitting at
    node j after step t), accumulating the per-step masses. Before a walk
    starts, column j of the transition matrix is damped by the decay of the
    visit mass accumulated so far (with +1 smoothing against zero counts) --
    transitions into often-visited nodes shrink -- and rows renormalize.
    With alpha=0 this is exactly the undamped power-walk sum over steps.
    """
    p = _check_transition(p)
    n = p.shape[0]
    n_w, w_l, pi = _resolve_walk(n, config)
    scores = np.zeros(n)
    for _ in range(n_w):
        if config.alpha == 0.0:
            pw = p
        else:
            damp = decay_factor(scores + 1.0, scores.mean() + 1.0, config.alpha)
            pw = p * damp[None, :]
            pw = pw / pw.sum(axis=1, keepdims=True)
        vec = pi
        for _ in range(w_l):
            vec = pw.T @ vec
            scores = scores + vec
    return scores


def greedy_expand(
    x: np.ndarray,
    scores: np.ndarray,
    d: float,
    n_a: int,
    return_sweeps: bool = False,
):
    """Pick n_a indices by repeatedly taking the best-scored unmarked node and
    marking everything within Euclidean radius d of it.

    When every node is marked before n_a picks, marks reset (already-picked
    nodes stay ineligible) and the sweep repeats. Within one sweep all picks
    are pairwise more than d apart.
    """
    x = as_modality_matrix(x, "greedy input")
    scores = np.asarray(scores, dtype=np.float64)
    n = x.shape[0]
    if scores.shape != (n,):
        raise ValueError(f"scores length {scores.shape} does not match {n} rows")
    if not (1 <= n_a <= n):
        raise ValueError(f"anchor count must be in [1, {n}], got {n_a}")
    if d <= 0:
        raise ValueError(f"radius must be > 0, got {d}")

    sq_norms = np.einsum("ij,ij->i", x, x)
    chosen = np.zeros(n, dtype=bool)
    marked = np.zeros(n, dtype=bool)
    selected: list[int] = []
    sweep_ids: list[int] = []
    sweep = 0
    while len(selected) < n_a:
        if marked.all():
            marked = chosen.copy()
            sweep += 1
        i = int(np.argmax(np.where(marked, -np.inf, scores)))
        selected.append(i)
        sweep_ids.append(sweep)
        chosen[i] = True
        dist_sq = np.maximum(sq_norms + sq_norms[i] - 2.0 * (x @ x[i]), 0.0)
        marked |= np.sqrt(dist_sq) <= d
    indices = np.asarray(selected, dtype=np.int64)
    if return_sweeps:
        return indices, np.asarray(sweep_ids, dtype=np.int64)
    return indices


def unify_indices(per_view_index_lists, n_valid: int | None = None) -> np.ndarray:
    """Sorted deduplicated union of per-view index lists."""
    arrays = [np.asarray(lst, dtype=np.int64) for lst in per_view_index_lists]
    if not arrays:
        raise ValueError("need at least one index list")
    merged = np.unique(np.concatenate(arrays))
    if merged.size and (merged[0] < 0 or (n_valid is not None and merged[-1] >= n_valid)):
        raise ValueError("anchor index out of range")
    return merged


def rerepresent(x: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Similarity re-representation: row i maps to its dot products with every
    anchor row (output shape rows(x) x rows(anchors))."""
    x = as_modality_matrix(x, "rerepresent input")
    anchors = as_modality_matrix(anchors, "anchor matrix")
    if x.shape[1] != anchors.shape[1]:
        raise ValueError(f"feature width mismatch: {x.shape[1]} vs {anchors.shape[1]}")
    return x @ anchors.T


def default_anchor_count(k: int, aligned_count: int) -> int:
    """max(2k, ceil(sqrt(aligned_count))), capped at the aligned block size."""
    return min(max(2 * k, math.isqrt(aligned_count - 1) + 1), aligned_count)


def default_radius(x: np.ndarray, seed: int, max_pairs: int = 2000) -> float:
    """25th percentile of sampled pairwise Euclidean distances in x."""
    n = x.shape[0]
    total_pairs = n * (n - 1) // 2
    if total_pairs <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, n, size=max_pairs)
        off = rng.integers(1, n, size=max_pairs)
        jj = (ii + off) % n
    dists = np.linalg.norm(x[ii] - x[jj], axis=1)
    radius = float(np.percentile(dists, 25))
    if radius <= 0:
        positive = dists[dists > 0]
        radius = float(positive.min()) if positive.size else 1.0
    return radius


def _landmark_visit_scores(x: np.ndarray, config: WalkConfig) -> np.ndarray:
    """Visit scores with transitions relayed through a seeded landmark subset.

    The similarity kernel becomes s_ij = sum_l a_il a_jl with
    a = clip(cos(x, landmarks), 0), zeroed on the diagonal and row-normalized,
    so every walk step is two thin matrix products (O(n * landmarks)) instead
    of a dense n x n multiply. Decay damping and the walk schedule match the
    dense op.
    """
    n = x.shape[0]
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ValueError("all-zero feature row: cosine similarity undefined")
    xn = x / norms[:, None]
    rng = np.random.default_rng(config.seed)
    m = min(n, LANDMARK_COUNT)
    landmarks = rng.choice(n, size=m, replace=False)
    a = np.clip(xn @ xn[landmarks].T, 0.0, None)
    self_mass = np.einsum("ij,ij->i", a, a)  # s_ii, removed from every row
    row_mass = a @ a.sum(axis=0) - self_mass
    dead = row_mass <= 0.0

    n_w, w_l, pi = _resolve_walk(n, config)
    scores = np.zeros(n)
    for _ in range(n_w):
        if config.alpha == 0.0:
            damp = np.ones(n)
        else:
            damp = decay_factor(scores + 1.0, scores.mean() + 1.0, config.alpha)
        # per-row outbound mass of the damped kernel: d_i = sum_j s_ij damp_j
        denom = a @ (a.T @ damp) - self_mass * damp
        damp_total = damp.sum()
        vec = pi
        for _ in range(w_l):
            # occupancy update q_j = damp_j * sum_i s_ij vec_i / d_i
            w = np.where(dead, 0.0, vec / np.where(dead, 1.0, denom))
            nxt = damp * (a @ (a.T @ w) - self_mass * w)
            if dead.any():
                # rows with no positive similarity walk uniformly to the others
                spill = (vec[dead] / (damp_total - damp[dead])).sum()
                nxt += damp * spill
                nxt[dead] -= damp[dead] * vec[dead] / (damp_total - damp[dead])
            vec = nxt
            scores = scores + vec
    return scores


def select_anchors(
    corrupted: CorruptedDataset,
    n_a: int,
    config: WalkConfig | None = None,
    radius: float | tuple[float, ...] | None = None,
) -> AnchorSet:
    """Run the per-view walk + greedy expansion over the aligned block, then
    unify indices across views and cut the per-view anchor matrices.

    Anchors come only from the aligned block, where cross-view correspondence
    is known. ``radius`` may be a scalar, a per-view tuple, or None for the
    per-view sampled-distance default.
    """
    config = config or WalkConfig()
    aligned = corrupted.aligned_count
    if aligned < 2:
        raise ValueError(f"aligned block too small for anchor search: {aligned}")
    if not (1 <= n_a <= aligned):
        raise ValueError(f"anchor count {n_a} exceeds aligned block size {aligned}")
    if isinstance(radius, (tuple, list)):
        if len(radius) != corrupted.n_views:
            raise ValueError("per-view radius list does not match view count")
        radii = [float(r) for r in radius]
    else:
        radii = [None if radius is None else float(radius)] * corrupted.n_views

    per_view_indices = []
    per_view_scores = []
    used_radii = []
    for v, view in enumerate(corrupted.views):
        block = view[:aligned]
        if aligned <= DENSE_BLOCK_LIMIT:
            scores = self_repellent_visit_scores(transition_matrix(block), config)
        else:
            scores = _landmark_visit_scores(block, config)
        r = radii[v] if radii[v] is not None else default_radius(block, config.seed + v)
        per_view_indices.append(greedy_expand(block, scores, r, n_a))
        per_view_scores.append(scores)
        used_radii.append(r)
    unified = unify_indices(per_view_indices, n_valid=aligned)
    matrices = tuple(view[:aligned][unified] for view in corrupted.views)
    return AnchorSet(
        per_view_indices=tuple(per_view_indices),
        per_view_scores=tuple(per_view_scores),
        unified=unified,
        matrices=matrices,
        radii=tuple(used_radii),
    )
