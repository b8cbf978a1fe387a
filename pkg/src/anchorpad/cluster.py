"""K-means on fused features plus clustering metrics (ACC, NMI, ARI, weighted
F1) evaluated under an optimal one-to-one cluster-label matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import hungarian

__all__ = [
    "ClusteringReport",
    "kmeans",
    "accuracy",
    "nmi",
    "ari",
    "f1_weighted",
    "evaluate",
]


@dataclass(frozen=True)
class ClusteringReport:
    acc: float
    nmi: float
    ari: float
    f1_weighted: float
    seed: int
    k: int


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 300, tol: float = 1e-8):
    """One seeded k-means++ initialization plus Lloyd iterations.

    Returns (labels, inertia, inertia_history); history is non-increasing.
    """
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        probs = d2 / total if total > 0 else np.full(n, 1.0 / n)
        centers[c] = x[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))

    history = []
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dists = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        history.append(float(dists[np.arange(n), labels].sum()))
        new_centers = centers.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centers[c] = x[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-fit point
                far = int(dists[np.arange(n), labels].argmax())
                new_centers[c] = x[far]
        shift = np.linalg.norm(new_centers - centers, axis=1).max()
        centers = new_centers
        if shift < tol:
            break
    dists = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dists.argmin(axis=1)
    inertia = float(dists[np.arange(n), labels].sum())
    history.append(inertia)
    return labels, inertia, history


def kmeans(x: np.ndarray, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Best-inertia labels over seeded k-means++ restarts (first best wins)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("kmeans expects a 2-d matrix")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if x.shape[0] < k:
        raise ValueError(f"need at least k={k} rows, got {x.shape[0]}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        labels, inertia, _ = _lloyd(x, k, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _normalize_labels(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape[0] != truth.shape[0] or pred.shape[0] == 0:
        raise ValueError("pred and truth must have equal nonzero length")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    return p, t


def _contingency(p: np.ndarray, t: np.ndarray) -> np.ndarray:
    kp, kt = p.max() + 1, t.max() + 1
    table = np.zeros((kp, kt), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def _match_clusters(table: np.ndarray) -> dict[int, int]:
    """Hungarian matching of predicted clusters to true classes (max overlap).

    Agreement ties break toward the larger weighted-F1 contribution (a
    label-invariant secondary objective), so relabeling predicted clusters
    never changes any metric computed from the matching.
    """
    t = table.astype(np.float64)
    n = t.sum()
    row = t.sum(axis=1, keepdims=True)
    col = t.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        f1_part = np.where(row + col > 0, (col / n) * 2.0 * t / (row + col), 0.0)
    eps = 1.0 / (2.0 * (min(t.shape) + 1.0))
    assignment = hungarian(-(t + eps * f1_part))
    return dict(assignment.pairs)


def accuracy(pred, truth) -> float:
    """Best agreement fraction over one-to-one cluster relabelings."""
    p, t = _normalize_labels(pred, truth)
    table = _contingency(p, t)
    mapping = _match_clusters(table)
    hits = sum(table[r, c] for r, c in mapping.items())
    return float(hits / p.shape[0])


def nmi(pred, truth) -> float:
    """Mutual information over the arithmetic mean of entropies.

    Both partitions single-cluster counts as 1.0; one-sided single-cluster
    yields 0.0.
    """
    p, t = _normalize_labels(pred, truth)
    table = _contingency(p, t).astype(np.float64)
    n = p.shape[0]
    pij = table / n
    pi = pij.sum(axis=1)
    qj = pij.sum(axis=0)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / np.outer(pi, qj)[nz])).sum())
    hp = float(-(pi[pi > 0] * np.log(pi[pi > 0])).sum())
    ht = float(-(qj[qj > 0] * np.log(qj[qj > 0])).sum())
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0
    return float(np.clip(mi / (0.5 * (hp + ht)), 0.0, 1.0))


def ari(pred, truth) -> float:
    """Adjusted Rand index via pair counting with expected-index correction."""
    p, t = _normalize_labels(pred, truth)
    table = _contingency(p, t)
    n = p.shape[0]

    def comb2(v):
        return v * (v - 1) / 2.0

    sum_ij = comb2(table.astype(np.float64)).sum()
    sum_a = comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_b = comb2(table.sum(axis=0).astype(np.float64)).sum()
    total = comb2(float(n))
    expected = sum_a * sum_b / total if total > 0 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    denom = max_index - expected
    if denom == 0.0:
        return 1.0
    return float((sum_ij - expected) / denom)


def f1_weighted(pred, truth) -> float:
    """Support-weighted one-vs-rest F1 after the same cluster matching as
    accuracy (unmatched predicted clusters count against precision)."""
    p, t = _normalize_labels(pred, truth)
    table = _contingency(p, t)
    mapping = _match_clusters(table)
    kt = int(t.max()) + 1
    mapped = np.asarray([mapping.get(int(c), kt + int(c)) for c in p])
    n = p.shape[0]
    score = 0.0
    for c in range(kt):
        tp = float(np.sum((mapped == c) & (t == c)))
        fp = float(np.sum((mapped == c) & (t != c)))
        fn = float(np.sum((mapped != c) & (t == c)))
        support = tp + fn
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / support if support > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        score += (support / n) * f1
    return float(score)


def evaluate(pred, truth, seed: int, k: int) -> ClusteringReport:
    """Bundle the four metrics into one report."""
    return ClusteringReport(
        acc=accuracy(pred, truth),
        nmi=nmi(pred, truth),
        ari=ari(pred, truth),
        f1_weighted=f1_weighted(pred, truth),
        seed=seed,
        k=k,
    )
