"""anchorpad: clustering for incomplete, misaligned two-view data via anchor
re-representation, noise-contrastive encoding, and kernel-padded realignment."""

from .align import (
    Assignment,
    CostMatrix,
    KernelConfig,
    PaddedAlignment,
    build_cost_matrix,
    fuse,
    gaussian_kernel,
    hungarian,
    interpolate_point,
    pad_and_realign,
    reorder_rows,
    select_gap_indices,
)
from .anchor import (
    AnchorSet,
    WalkConfig,
    decay_factor,
    greedy_expand,
    rerepresent,
    select_anchors,
    self_repellent_visit_scores,
    transition_matrix,
    unify_indices,
    walk_schedule,
)
from .cluster import ClusteringReport, accuracy, ari, evaluate, f1_weighted, kmeans, nmi
from .data import (
    CorruptedDataset,
    CorruptionPlan,
    MultimodalDataset,
    apply_corruption,
    generate_synthetic,
    load_dataset,
    make_corruption_plan,
    save_dataset,
)
from .lap import BACKEND as LAP_BACKEND
from .pipeline import (
    ExperimentConfig,
    RunRecord,
    SyntheticSpec,
    emit_report,
    run_ablation,
    run_batch,
    run_pipeline,
)
from .representation import (
    EncoderParams,
    LossConfig,
    PairBatch,
    TrainResult,
    contrastive_loss,
    cosine_distance,
    encode,
    euclidean_distance,
    loss_gradient,
    noise_contrastive_loss,
    sample_pairs,
    train_encoders,
)

__version__ = "0.1.0"
