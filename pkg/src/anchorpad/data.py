"""Multi-view dataset model, CSV ingestion, synthetic generation, and the
shuffle+missing corruption engine that produces misaligned, incomplete views."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MultimodalDataset",
    "CorruptionPlan",
    "CorruptedDataset",
    "as_modality_matrix",
    "load_dataset",
    "save_dataset",
    "generate_synthetic",
    "make_corruption_plan",
    "apply_corruption",
]


def as_modality_matrix(values, name: str = "view") -> np.ndarray:
    """Validate and return one view as a float64 matrix (rows = samples).

    Entries must be finite and the matrix non-empty in both dimensions.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name}: expected a 2-d matrix, got ndim={x.ndim}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"{name}: empty matrix {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name}: non-finite entry")
    return x


@dataclass(frozen=True)
class MultimodalDataset:
    """Views of the same n samples plus ground-truth class labels.

    Every view has exactly n rows; labels are 0-based class ids covering
    {0..k-1} with each class nonempty.
    """

    views: tuple[np.ndarray, ...]
    labels: np.ndarray

    def __post_init__(self):
        views = tuple(as_modality_matrix(v, f"view {i}") for i, v in enumerate(self.views))
        object.__setattr__(self, "views", views)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if not views:
            raise ValueError("dataset needs at least one view")
        n = views[0].shape[0]
        for i, v in enumerate(views):
            if v.shape[0] != n:
                raise ValueError(f"view {i} has {v.shape[0]} rows, expected {n}")
        if labels.ndim != 1 or labels.shape[0] != n:
            raise ValueError(f"label count mismatch: {labels.shape[0]} labels for {n} rows")
        uniq = np.unique(labels)
        k = uniq.size
        if labels.min(initial=0) < 0 or not np.array_equal(uniq, np.arange(k)):
            raise ValueError("labels must be exactly {0..k-1} with every class nonempty")

    @property
    def n(self) -> int:
        return self.views[0].shape[0]

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def n_views(self) -> int:
        return len(self.views)


@dataclass(frozen=True)
class CorruptionPlan:
    """Per-view row shuffle and keep mask simulating misalignment + missing data.

    The first ``aligned_count`` rows are left untouched in every view; the
    shuffle permutes only the remaining block, and missing rows are removed
    only from that block.
    """

    align_rate: float
    missing_rate: float
    seed: int
    shuffles: tuple[np.ndarray, ...]
    keep_masks: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return self.shuffles[0].shape[0]

    @property
    def aligned_count(self) -> int:
        return int(np.floor(self.align_rate * self.n))

    @property
    def n_views(self) -> int:
        return len(self.shuffles)


@dataclass(frozen=True)
class CorruptedDataset:
    """Views after corruption; row counts may differ between views.

    The first ``aligned_count`` rows of every view are the same original
    samples in the same order. ``virtual_labels`` carry each surviving row's
    ground-truth class, in the view's surviving row order.
    """

    views: tuple[np.ndarray, ...]
    aligned_count: int
    virtual_labels: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n_views(self) -> int:
        return len(self.views)

    def row_counts(self) -> tuple[int, ...]:
        return tuple(v.shape[0] for v in self.views)


def _read_matrix_csv(path: str) -> np.ndarray:
    """Parse a headerless comma-separated float matrix, reporting file + line."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing file: {path}")
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValueError(f"{path}:{lineno}: ragged row ({len(fields)} fields, expected {width})")
            try:
                row = [float(tok) for tok in fields]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unparseable value") from None
            for val in row:
                if not np.isfinite(val):
                    raise ValueError(f"{path}:{lineno}: non-finite entry")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: empty matrix")
    return np.asarray(rows, dtype=np.float64)


def _read_labels_csv(path: str, n: int) -> np.ndarray:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing file: {path}")
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unparseable label") from None
    if len(labels) != n:
        raise ValueError(f"{path}: label count mismatch ({len(labels)} labels for {n} rows)")
    return np.asarray(labels, dtype=np.int64)


def load_dataset(path: str) -> MultimodalDataset:
    """Load a dataset directory: view0.csv, view1.csv, ... plus labels.csv."""
    if not os.path.isdir(path):
        raise FileNotFoundError(f"missing dataset directory: {path}")
    views = []
    i = 0
    while True:
        vpath = os.path.join(path, f"view{i}.csv")
        if not os.path.isfile(vpath):
            break
        views.append(_read_matrix_csv(vpath))
        i += 1
    if not views:
        raise FileNotFoundError(f"missing file: {os.path.join(path, 'view0.csv')}")
    labels = _read_labels_csv(os.path.join(path, "labels.csv"), views[0].shape[0])
    return MultimodalDataset(views=tuple(views), labels=labels)


def save_dataset(dataset: MultimodalDataset, path: str) -> None:
    """Write a dataset in the directory format read by load_dataset (LF lines)."""
    os.makedirs(path, exist_ok=True)
    for i, view in enumerate(dataset.views):
        with open(os.path.join(path, f"view{i}.csv"), "w", encoding="utf-8", newline="\n") as fh:
            for row in view:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    with open(os.path.join(path, "labels.csv"), "w", encoding="utf-8", newline="\n") as fh:
        for lab in dataset.labels:
            fh.write(f"{int(lab)}\n")


def _lattice_means(k: int, dim: int, separation: float) -> np.ndarray:
    """k cluster means on an integer lattice scaled so pairwise spacing >= separation."""
    side = 1
    while side**dim < k:
        side += 1
    pts = list(itertools.islice(itertools.product(range(side), repeat=dim), k))
    return separation * np.asarray(pts, dtype=np.float64)


def generate_synthetic(
    k: int,
    n: int,
    dims: tuple[int, ...],
    separation: float,
    seed: int,
    shared_fraction: float = 0.5,
) -> MultimodalDataset:
    """Generate isotropic Gaussian clusters, one view per entry of dims.

    Cluster means are spaced at least ``separation`` apart (the within-cluster
    std is 1), every view shares the same label vector, and the sample order
    is a seeded shuffle so any prefix block mixes all classes.

    ``shared_fraction`` is the variance share of a per-sample factor common to
    all views, giving the same sample correlated within-cluster offsets across
    views (as co-registered sensors do) so cross-view correspondence carries
    signal beyond the class. Each view's marginal stays exactly N(mean, I):
    the shared factor enters through orthonormal columns and the leftover
    noise is projected onto their complement.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < k:
        raise ValueError(f"n must be >= k, got n={n}, k={k}")
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"all view dims must be >= 1, got {dims}")
    if separation <= 0:
        raise ValueError(f"separation must be > 0, got {separation}")
    if not (0.0 <= shared_fraction <= 1.0):
        raise ValueError(f"shared_fraction must be in [0, 1], got {shared_fraction}")

    rng = np.random.default_rng(seed)
    counts = np.full(k, n // k, dtype=np.int64)
    counts[: n % k] += 1
    labels = np.repeat(np.arange(k), counts)
    r = min(dims)
    shared = rng.normal(0.0, 1.0, size=(n, r))
    views = []
    for dim in dims:
        means = _lattice_means(k, dim, separation)
        basis, _ = np.linalg.qr(rng.normal(0.0, 1.0, size=(dim, r)))
        factor = np.sqrt(shared_fraction) * shared + np.sqrt(1.0 - shared_fraction) * rng.normal(
            0.0, 1.0, size=(n, r)
        )
        residual = rng.normal(0.0, 1.0, size=(n, dim))
        residual -= (residual @ basis) @ basis.T
        views.append(means[labels] + factor @ basis.T + residual)
    order = rng.permutation(n)
    return MultimodalDataset(
        views=tuple(v[order] for v in views),
        labels=labels[order],
    )


def make_corruption_plan(
    dataset: MultimodalDataset,
    align_rate: float,
    missing_rate: float,
    seed: int,
) -> CorruptionPlan:
    """Draw per-view shuffles and keep masks for the misaligned block.

    The shuffle is the identity on the aligned block (first
    floor(align_rate*n) rows) and permutes only the rest; per view,
    floor(missing_rate * misaligned_size) rows of the shuffled misaligned
    block are dropped, drawn independently per view.
    """
    if not (0.0 < align_rate <= 1.0):
        raise ValueError(f"align_rate must be in (0, 1], got {align_rate}")
    if not (0.0 <= missing_rate < 1.0):
        raise ValueError(f"missing_rate must be in [0, 1), got {missing_rate}")
    n = dataset.n
    aligned = int(np.floor(align_rate * n))
    misaligned = n - aligned
    n_missing = int(np.floor(missing_rate * misaligned))
    rng = np.random.default_rng(seed)
    shuffles = []
    keep_masks = []
    for _ in range(dataset.n_views):
        shuffle = np.arange(n, dtype=np.int64)
        shuffle[aligned:] = aligned + rng.permutation(misaligned)
        mask = np.ones(n, dtype=bool)
        if n_missing > 0:
            drop = aligned + rng.choice(misaligned, size=n_missing, replace=False)
            mask[drop] = False
        shuffles.append(shuffle)
        keep_masks.append(mask)
    return CorruptionPlan(
        align_rate=align_rate,
        missing_rate=missing_rate,
        seed=seed,
        shuffles=tuple(shuffles),
        keep_masks=tuple(keep_masks),
    )


def apply_corruption(dataset: MultimodalDataset, plan: CorruptionPlan) -> CorruptedDataset:
    """Reorder each view by its shuffle, then remove rows with keep mask 0."""
    if plan.n_views != dataset.n_views:
        raise ValueError(f"plan has {plan.n_views} views, dataset has {dataset.n_views}")
    if plan.n != dataset.n:
        raise ValueError(f"plan built for n={plan.n}, dataset has n={dataset.n}")
    views = []
    virtual_labels = []
    for view, shuffle, mask in zip(dataset.views, plan.shuffles, plan.keep_masks):
        shuffled = view[shuffle]
        views.append(shuffled[mask])
        virtual_labels.append(dataset.labels[shuffle][mask])
    return CorruptedDataset(
        views=tuple(views),
        aligned_count=plan.aligned_count,
        virtual_labels=tuple(virtual_labels),
    )
