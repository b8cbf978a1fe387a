"""Batch experiment orchestration: corruption -> anchor search -> encoder
training -> alignment (with or without gap padding) -> clustering -> metrics,
with per-stage timing, seed fan-out, and CSV/JSON report emission."""

from __future__ import annotations

import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import align as align_mod
from . import anchor as anchor_mod
from . import cluster as cluster_mod
from . import representation as repr_mod
from .data import (
    CorruptedDataset,
    MultimodalDataset,
    apply_corruption,
    generate_synthetic,
    load_dataset,
    make_corruption_plan,
)

__all__ = [
    "SyntheticSpec",
    "ExperimentConfig",
    "RunRecord",
    "ConfigError",
    "StageError",
    "run_pipeline",
    "run_batch",
    "run_ablation",
    "emit_report",
    "STAGE_SEED_OFFSETS",
    "CSV_COLUMNS",
]

# Fixed offsets added to the master seed so each stochastic stage draws from
# its own stream while ablation arms share everything up to the padding step.
STAGE_SEED_OFFSETS = {
    "corrupt": 101,
    "anchors": 211,
    "train": 307,
    "kmeans": 503,
}

_STAGES = [
    "corrupt",
    "anchors",
    "rerepresent",
    "train",
    "encode",
    "cost",
    "assign",
    "pad",
    "fuse",
    "kmeans",
    "evaluate",
]

CSV_COLUMNS = [
    "dataset",
    "align_rate",
    "missing_rate",
    "seed",
    "ipt",
    "acc",
    "nmi",
    "ari",
    "f1",
] + [f"t_{s}_ms" for s in _STAGES]


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class SyntheticSpec:
    k: int
    n: int
    dims: tuple[int, ...]
    separation: float
    seed: int = 0

    def name(self) -> str:
        dims = "x".join(str(d) for d in self.dims)
        return f"synthetic-k{self.k}-n{self.n}-d{dims}-sep{self.separation:g}"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a batch run needs; flags mirror the CLI surface."""

    dataset_path: str | None = None
    synthetic: SyntheticSpec | None = None
    align_rates: tuple[float, ...] = (0.3, 0.5, 0.7)
    missing_rate: float = 0.5
    seeds: tuple[int, ...] = (0,)
    n_anchors: int | None = None
    radius: float | None = None
    alpha: float = 0.5
    schedule: tuple[int, int] | None = None
    margin: float = 1.0
    range_factor: float = 2.0
    # gentler than the LossConfig default: half-converged encoders match
    # misaligned rows better than fully collapsed ones
    learning_rate: float = 5e-3
    epochs: int = 200
    neg_ratio: float = 1.0
    latent_width: int | None = None
    use_encoder: bool = True
    sigma: float | None = None
    ipt: bool = True
    restarts: int = 10
    out_dir: str = "results"
    dump_matrices: bool = False

    def validate(self) -> None:
        if (self.dataset_path is None) == (self.synthetic is None):
            raise ConfigError("exactly one of dataset_path / synthetic must be set")
        if not self.align_rates or any(not (0.0 < r <= 1.0) for r in self.align_rates):
            raise ConfigError(f"align_rates must lie in (0, 1], got {self.align_rates}")
        if not (0.0 <= self.missing_rate < 1.0):
            raise ConfigError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.n_anchors is not None and self.n_anchors < 1:
            raise ConfigError("n_anchors must be >= 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.epochs < 1 or self.learning_rate <= 0:
            raise ConfigError("epochs must be >= 1 and learning_rate > 0")
        if self.margin <= 0 or self.range_factor <= 0:
            raise ConfigError("margin and range_factor must be > 0")

    def dataset_name(self) -> str:
        if self.dataset_path is not None:
            return os.path.basename(os.path.normpath(self.dataset_path))
        return self.synthetic.name()

    def echo(self) -> dict:
        d = {
            "dataset": self.dataset_name(),
            "dataset_path": self.dataset_path,
            "synthetic": None
            if self.synthetic is None
            else {
                "k": self.synthetic.k,
                "n": self.synthetic.n,
                "dims": list(self.synthetic.dims),
                "separation": self.synthetic.separation,
                "seed": self.synthetic.seed,
            },
            "align_rates": list(self.align_rates),
            "missing_rate": self.missing_rate,
            "seeds": list(self.seeds),
            "n_anchors": self.n_anchors,
            "radius": self.radius,
            "alpha": self.alpha,
            "schedule": None if self.schedule is None else list(self.schedule),
            "margin": self.margin,
            "range_factor": self.range_factor,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "neg_ratio": self.neg_ratio,
            "latent_width": self.latent_width,
            "use_encoder": self.use_encoder,
            "sigma": self.sigma,
            "ipt": self.ipt,
            "restarts": self.restarts,
        }
        return d


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    align_rate: float
    missing_rate: float
    seed: int
    ipt: bool
    report: cluster_mod.ClusteringReport
    timings_ms: dict[str, float]
    anchors: dict = field(default_factory=dict)
    n_fused: int = 0
    final_loss: float | None = None

    def sort_key(self):
        return (self.dataset, self.align_rate, self.missing_rate, self.seed, not self.ipt)


@contextmanager
def _stage(timings: dict, name: str):
    start = time.perf_counter()
    try:
        yield
    except Exception as exc:
        raise StageError(name, exc) from exc
    timings[name] = timings.get(name, 0.0) + (time.perf_counter() - start) * 1000.0


@dataclass
class _State:
    """Everything the two ablation arms share."""

    corrupted: CorruptedDataset
    anchors: anchor_mod.AnchorSet
    latent_short: np.ndarray
    latent_long: np.ndarray
    labels_long: np.ndarray
    cost: align_mod.CostMatrix
    assignment: align_mod.Assignment
    z_sorted: np.ndarray
    row_order: np.ndarray
    timings: dict[str, float]
    train_losses: np.ndarray | None
    k: int


def resolve_dataset(config: ExperimentConfig) -> MultimodalDataset:
    if config.dataset_path is not None:
        return load_dataset(config.dataset_path)
    s = config.synthetic
    return generate_synthetic(s.k, s.n, s.dims, s.separation, s.seed)


def _prepare(
    dataset: MultimodalDataset,
    align_rate: float,
    missing_rate: float,
    config: ExperimentConfig,
    seed: int,
) -> _State:
    if dataset.n_views != 2:
        raise ConfigError(f"the alignment pipeline needs exactly 2 views, got {dataset.n_views}")
    timings: dict[str, float] = {}

    with _stage(timings, "corrupt"):
        plan = make_corruption_plan(dataset, align_rate, missing_rate, seed + STAGE_SEED_OFFSETS["corrupt"])
        corrupted = apply_corruption(dataset, plan)

    with _stage(timings, "anchors"):
        n_a = config.n_anchors or anchor_mod.default_anchor_count(dataset.k, corrupted.aligned_count)
        walk = anchor_mod.WalkConfig(
            alpha=config.alpha,
            schedule_override=config.schedule,
            seed=seed + STAGE_SEED_OFFSETS["anchors"],
        )
        anchors = anchor_mod.select_anchors(corrupted, n_a, walk, radius=config.radius)

    with _stage(timings, "rerepresent"):
        rerep = [
            anchor_mod.rerepresent(view, mat)
            for view, mat in zip(corrupted.views, anchors.matrices)
        ]

    aligned = corrupted.aligned_count
    train_losses = None
    if config.use_encoder:
        with _stage(timings, "train"):
            h = config.latent_width or min(anchors.n_anchors, 64)
            loss_cfg = repr_mod.LossConfig(
                m=config.margin,
                a=config.range_factor,
                learning_rate=config.learning_rate,
                epochs=config.epochs,
                neg_ratio=config.neg_ratio,
                seed=seed + STAGE_SEED_OFFSETS["train"],
            )
            trained = repr_mod.train_encoders(rerep[0][:aligned], rerep[1][:aligned], loss_cfg, h)
            train_losses = trained.loss_history
        with _stage(timings, "encode"):
            latents = [
                repr_mod.encode(trained.params1, rerep[0]),
                repr_mod.encode(trained.params2, rerep[1]),
            ]
    else:
        timings["train"] = 0.0
        with _stage(timings, "encode"):
            latents = [rerep[0], rerep[1]]

    with _stage(timings, "cost"):
        cost = align_mod.build_cost_matrix(latents[0], latents[1])
    short_view = cost.rows_view
    long_view = 1 - short_view

    with _stage(timings, "assign"):
        assignment = align_mod.hungarian(cost.z)
        z_sorted, row_order = align_mod.reorder_rows(cost, assignment)

    return _State(
        corrupted=corrupted,
        anchors=anchors,
        latent_short=latents[short_view],
        latent_long=latents[long_view],
        labels_long=corrupted.virtual_labels[long_view],
        cost=cost,
        assignment=assignment,
        z_sorted=z_sorted,
        row_order=row_order,
        timings=timings,
        train_losses=train_losses,
        k=dataset.k,
    )


def _finish(state: _State, ipt: bool, config: ExperimentConfig, seed: int):
    """Run one arm (padding on/off) from the shared state; returns
    (report, timings, fused_row_count, padded_or_none)."""
    timings = dict(state.timings)
    padded = None
    if ipt:
        with _stage(timings, "pad"):
            padded = align_mod.pad_and_realign(
                state.latent_short,
                state.latent_long,
                state.z_sorted,
                state.row_order,
                state.assignment,
                align_mod.KernelConfig(sigma=config.sigma, seed=seed),
            )
        with _stage(timings, "fuse"):
            fused, labels = align_mod.fuse(padded, state.latent_long, state.labels_long)
    else:
        timings["pad"] = 0.0
        with _stage(timings, "fuse"):
            # matched pairs only: unmatched long-view rows are discarded
            by_col = sorted(state.assignment.pairs, key=lambda p: p[1])
            fused = np.asarray(
                [
                    np.concatenate([state.latent_short[i], state.latent_long[j]])
                    for i, j in by_col
                ]
            )
            labels = state.labels_long[[j for _, j in by_col]]

    with _stage(timings, "kmeans"):
        pred = cluster_mod.kmeans(fused, state.k, seed=seed + STAGE_SEED_OFFSETS["kmeans"], restarts=config.restarts)
    with _stage(timings, "evaluate"):
        report = cluster_mod.evaluate(pred, labels, seed=seed, k=state.k)
    return report, timings, fused.shape[0], padded


def _anchor_summary(state: _State) -> dict:
    return {
        "aligned_count": state.corrupted.aligned_count,
        "per_view_selected": [int(ix.shape[0]) for ix in state.anchors.per_view_indices],
        "unified_count": state.anchors.n_anchors,
        "radii": [float(r) for r in state.anchors.radii],
    }


def run_pipeline(
    dataset: MultimodalDataset,
    align_rate: float,
    missing_rate: float,
    config: ExperimentConfig,
    seed: int,
) -> cluster_mod.ClusteringReport:
    """Execute the full pipeline once and return the clustering report."""
    state = _prepare(dataset, align_rate, missing_rate, config, seed)
    report, _, _, _ = _finish(state, config.ipt, config, seed)
    return report


def _write_matrix_csv(path: str, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def _dump_run(dump_dir: str, state: _State, padded, arm: str) -> None:
    os.makedirs(dump_dir, exist_ok=True)
    for v, (scores, idx) in enumerate(zip(state.anchors.per_view_scores, state.anchors.per_view_indices)):
        chosen = np.zeros(scores.shape[0], dtype=int)
        chosen[idx] = 1
        with open(os.path.join(dump_dir, f"anchors_view{v}.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index,score,selected\n")
            for i, (s, c) in enumerate(zip(scores, chosen)):
                fh.write(f"{i},{s:.12g},{c}\n")
    if state.train_losses is not None:
        with open(os.path.join(dump_dir, "training_log.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss\n")
            for e, loss in enumerate(state.train_losses):
                fh.write(f"{e},{loss:.12g}\n")
    _write_matrix_csv(os.path.join(dump_dir, "Z.csv"), state.cost.z)
    _write_matrix_csv(os.path.join(dump_dir, "Zr.csv"), state.z_sorted)
    if padded is not None:
        _write_matrix_csv(os.path.join(dump_dir, f"Zbar_{arm}.csv"), padded.zbar)
        with open(os.path.join(dump_dir, f"matching_{arm}.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("long_row,padded_row,synthesized\n")
            for long_row, padded_row in padded.final_pairs:
                fh.write(f"{long_row},{padded_row},{int(padded.synth_flags[padded_row])}\n")


def _records_for(
    dataset: MultimodalDataset,
    config: ExperimentConfig,
    align_rate: float,
    seed: int,
    arms: tuple[bool, ...],
) -> list[RunRecord]:
    state = _prepare(dataset, align_rate, config.missing_rate, config, seed)
    records = []
    for ipt in arms:
        report, timings, n_fused, padded = _finish(state, ipt, config, seed)
        if config.dump_matrices:
            arm = "ipt" if ipt else "noipt"
            dump_dir = os.path.join(
                config.out_dir,
                "dumps",
                f"{config.dataset_name()}_a{align_rate:g}_s{seed}",
            )
            _dump_run(dump_dir, state, padded, arm)
        records.append(
            RunRecord(
                dataset=config.dataset_name(),
                align_rate=align_rate,
                missing_rate=config.missing_rate,
                seed=seed,
                ipt=ipt,
                report=report,
                timings_ms=timings,
                anchors=_anchor_summary(state),
                n_fused=n_fused,
                final_loss=None if state.train_losses is None else float(state.train_losses[-1]),
            )
        )
    return records


def run_batch(config: ExperimentConfig) -> list[RunRecord]:
    """One record per (align_rate, seed) pair with the configured padding arm."""
    config.validate()
    dataset = resolve_dataset(config)
    records = []
    for align_rate in config.align_rates:
        for seed in config.seeds:
            records.extend(_records_for(dataset, config, align_rate, seed, (config.ipt,)))
    return records


def run_ablation(config: ExperimentConfig) -> list[RunRecord]:
    """Paired records per (align_rate, seed): padding on and off, sharing the
    identical corruption, anchors, and encoder state."""
    config.validate()
    dataset = resolve_dataset(config)
    records = []
    for align_rate in config.align_rates:
        for seed in config.seeds:
            records.extend(_records_for(dataset, config, align_rate, seed, (True, False)))
    return records


def emit_report(records: list[RunRecord], out_dir: str, config: ExperimentConfig | None = None) -> tuple[str, str]:
    """Write results.csv (fixed column order) and results.json; both are
    byte-deterministic for the same records."""
    os.makedirs(out_dir, exist_ok=True)
    ordered = sorted(records, key=RunRecord.sort_key)
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in ordered:
            row = [
                rec.dataset,
                f"{rec.align_rate:g}",
                f"{rec.missing_rate:g}",
                str(rec.seed),
                str(int(rec.ipt)),
                f"{rec.report.acc:.6f}",
                f"{rec.report.nmi:.6f}",
                f"{rec.report.ari:.6f}",
                f"{rec.report.f1_weighted:.6f}",
            ]
            row += [f"{rec.timings_ms.get(s, 0.0):.3f}" for s in _STAGES]
            fh.write(",".join(row) + "\n")

    payload = {
        "config": config.echo() if config is not None else None,
        "records": [
            {
                "dataset": rec.dataset,
                "align_rate": rec.align_rate,
                "missing_rate": rec.missing_rate,
                "seed": rec.seed,
                "ipt": rec.ipt,
                "report": {
                    "acc": rec.report.acc,
                    "nmi": rec.report.nmi,
                    "ari": rec.report.ari,
                    "f1_weighted": rec.report.f1_weighted,
                    "seed": rec.report.seed,
                    "k": rec.report.k,
                },
                "timings_ms": {s: rec.timings_ms.get(s, 0.0) for s in _STAGES},
                "anchors": rec.anchors,
                "n_fused": rec.n_fused,
                "final_loss": rec.final_loss,
            }
            for rec in ordered
        ],
    }
    json_path = os.path.join(out_dir, "results.json")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
