"""Pair sampling, contrastive losses, shallow two-layer encoders with exact
analytic gradients, and deterministic full-batch training."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PairBatch",
    "LossConfig",
    "EncoderParams",
    "TrainResult",
    "euclidean_distance",
    "cosine_distance",
    "contrastive_loss",
    "noise_contrastive_loss",
    "sample_pairs",
    "init_encoder",
    "encode",
    "loss_gradient",
    "train_encoders",
]

_NORM_EPS = 1e-12


@dataclass(frozen=True)
class PairBatch:
    """Cross-view pair batch: left/right rows plus a 0/1 label per pair
    (1 = corresponding pair, 0 = negative)."""

    left: np.ndarray
    right: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float64)
        right = np.asarray(self.right, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if left.ndim != 2 or right.ndim != 2 or y.ndim != 1:
            raise ValueError("left/right must be 2-d, y 1-d")
        if not (left.shape[0] == right.shape[0] == y.shape[0] >= 1):
            raise ValueError("left, right and y must have equal nonzero length")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("pair labels must be 0 or 1")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class LossConfig:
    """Margin, false-negative range factor, and training hyperparameters."""

    m: float = 1.0
    a: float = 2.0
    learning_rate: float = 1e-3
    epochs: int = 200
    neg_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.m <= 0 or self.a <= 0:
            raise ValueError("margin and range factor must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.neg_ratio < 0:
            raise ValueError("neg_ratio must be >= 0")


@dataclass
class EncoderParams:
    """Two affine layers with a rectifier between: y = W2^T relu(W1^T x + b1) + b2.

    Also used as the container for gradients of the same shapes.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2)


@dataclass(frozen=True)
class TrainResult:
    params1: EncoderParams
    params2: EncoderParams
    loss_history: np.ndarray = field(repr=False)


def euclidean_distance(u, v) -> float:
    """sqrt(sum((u - v)^2))."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.linalg.norm(u - v))


def cosine_distance(u, v) -> float:
    """1 - cos(u, v), in [0, 2]; both vectors must be nonzero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine distance undefined for a zero vector")
    return float(1.0 - np.dot(u, v) / (nu * nv))


def _pair_euclidean(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.linalg.norm(left - right, axis=1)


def _pair_cosine_distance(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    nl = np.maximum(np.linalg.norm(left, axis=1), _NORM_EPS)
    nr = np.maximum(np.linalg.norm(right, axis=1), _NORM_EPS)
    return 1.0 - np.einsum("ij,ij->i", left, right) / (nl * nr)


def contrastive_loss(batch: PairBatch, m: float = 1.0) -> float:
    """Margin loss on Euclidean pair distances:
    mean(y * d^2 + (1 - y) * max(m - d, 0)^2)."""
    d = _pair_euclidean(batch.left, batch.right)
    hinge = np.maximum(m - d, 0.0)
    return float(np.mean(batch.y * d**2 + (1.0 - batch.y) * hinge**2))


def noise_contrastive_loss(batch: PairBatch, m: float = 1.0, a: float = 2.0) -> float:
    """Cosine-distance loss whose negative term vanishes once d^2 >= a*m:
    (1/2n) sum(y * d^2 + (1 - y) * (1/m) * max(a*m*d - d^3, 0)^2).

    The cubic term mutes gradients from close negatives, softening false
    negative pairs.
    """
    if m <= 0 or a <= 0:
        raise ValueError("margin and range factor must be > 0")
    norms_l = np.linalg.norm(batch.left, axis=1)
    norms_r = np.linalg.norm(batch.right, axis=1)
    if np.any(norms_l == 0) or np.any(norms_r == 0):
        raise ValueError("cosine distance undefined for a zero vector")
    d = _pair_cosine_distance(batch.left, batch.right)
    hinge = np.maximum(a * m * d - d**3, 0.0)
    total = batch.y * d**2 + (1.0 - batch.y) * hinge**2 / m
    return float(total.sum() / (2.0 * len(batch)))


def sample_pairs(
    latent1_aligned: np.ndarray,
    latent2_aligned: np.ndarray,
    neg_ratio: float = 1.0,
    seed: int = 0,
) -> PairBatch:
    """One positive pair (i, i) per aligned row plus floor(neg_ratio * A)
    seeded negatives (i, j) with j != i."""
    l1 = np.asarray(latent1_aligned, dtype=np.float64)
    l2 = np.asarray(latent2_aligned, dtype=np.float64)
    if l1.shape[0] != l2.shape[0]:
        raise ValueError("aligned blocks must have equal row counts")
    a = l1.shape[0]
    if a < 2:
        raise ValueError(f"need at least 2 aligned rows to sample pairs, got {a}")
    n_neg = int(np.floor(neg_ratio * a))
    rng = np.random.default_rng(seed)
    i = rng.integers(0, a, size=n_neg)
    j = (i + rng.integers(1, a, size=n_neg)) % a
    left = np.vstack([l1, l1[i]])
    right = np.vstack([l2, l2[j]])
    y = np.concatenate([np.ones(a), np.zeros(n_neg)])
    return PairBatch(left=left, right=right, y=y)


def init_encoder(n_in: int, h1: int, h: int, rng: np.random.Generator) -> EncoderParams:
    """Uniform(-s, s) init with s = 1/sqrt(fan_in) per layer."""
    s1 = 1.0 / np.sqrt(n_in)
    s2 = 1.0 / np.sqrt(h1)
    return EncoderParams(
        w1=rng.uniform(-s1, s1, size=(n_in, h1)),
        b1=rng.uniform(-s1, s1, size=h1),
        w2=rng.uniform(-s2, s2, size=(h1, h)),
        b2=rng.uniform(-s2, s2, size=h),
    )


def encode(params: EncoderParams, x: np.ndarray) -> np.ndarray:
    """Forward pass of the two-layer encoder for a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w1.shape[0]:
        raise ValueError(f"input width {x.shape} does not match encoder ({params.w1.shape[0]})")
    hidden = np.maximum(x @ params.w1 + params.b1, 0.0)
    return hidden @ params.w2 + params.b2


def _forward_cached(params: EncoderParams, x: np.ndarray):
    pre = x @ params.w1 + params.b1
    hidden = np.maximum(pre, 0.0)
    out = hidden @ params.w2 + params.b2
    return out, (x, pre, hidden)


def _backprop(params: EncoderParams, cache, d_out: np.ndarray) -> EncoderParams:
    x, pre, hidden = cache
    d_hidden = (d_out @ params.w2.T) * (pre > 0)
    return EncoderParams(
        w1=x.T @ d_hidden,
        b1=d_hidden.sum(axis=0),
        w2=hidden.T @ d_out,
        b2=d_out.sum(axis=0),
    )


def _loss_and_grads(params1: EncoderParams, params2: EncoderParams, batch: PairBatch, cfg: LossConfig):
    """Noise-contrastive loss of the encoded batch plus exact gradients for
    both encoders."""
    f, cache1 = _forward_cached(params1, batch.left)
    g, cache2 = _forward_cached(params2, batch.right)
    nf = np.maximum(np.linalg.norm(f, axis=1), _NORM_EPS)
    ng = np.maximum(np.linalg.norm(g, axis=1), _NORM_EPS)
    sim = np.einsum("ij,ij->i", f, g) / (nf * ng)
    d = 1.0 - sim
    n = len(batch)
    m, a, y = cfg.m, cfg.a, batch.y

    hinge = a * m * d - d**3
    active = hinge > 0
    loss = float((y * d**2 + (1.0 - y) * np.where(active, hinge, 0.0) ** 2 / m).sum() / (2.0 * n))

    # dL/dd per pair, then dd/df = -(g/(|f||g|) - sim*f/|f|^2)
    dl_dd = y * d / n + (1.0 - y) * np.where(active, hinge * (a * m - 3.0 * d**2), 0.0) / (n * m)
    df = dl_dd[:, None] * (sim[:, None] * f / nf[:, None] ** 2 - g / (nf * ng)[:, None])
    dg = dl_dd[:, None] * (sim[:, None] * g / ng[:, None] ** 2 - f / (nf * ng)[:, None])
    return loss, _backprop(params1, cache1, df), _backprop(params2, cache2, dg)


def loss_gradient(
    params1: EncoderParams,
    params2: EncoderParams,
    batch: PairBatch,
    cfg: LossConfig,
) -> tuple[EncoderParams, EncoderParams]:
    """Analytic gradient of the noise-contrastive loss composed with both
    encoders, for every weight of both encoders."""
    _, g1, g2 = _loss_and_grads(params1, params2, batch, cfg)
    return g1, g2


def train_encoders(
    x1_aligned: np.ndarray,
    x2_aligned: np.ndarray,
    cfg: LossConfig,
    h: int,
) -> TrainResult:
    """Full-batch gradient descent on the noise-contrastive loss.

    Weights start from seeded uniform(-1/sqrt(fan_in), +) draws; both encoders
    share the same initial weights, since their inputs live in the same
    unified-anchor coordinate system and an identical start leaves
    corresponding rows close from epoch 0. The pair batch is sampled once
    (seed + 1) and held fixed. Raises if the loss diverges to a non-finite
    value.
    """
    x1 = np.asarray(x1_aligned, dtype=np.float64)
    x2 = np.asarray(x2_aligned, dtype=np.float64)
    if x1.shape[0] != x2.shape[0] or x1.shape[0] < 2:
        raise ValueError("aligned blocks must be nonempty and of equal size")
    if x1.shape[1] != x2.shape[1]:
        raise ValueError("aligned re-representations must share width")
    n_in = x1.shape[1]
    if h < 1:
        raise ValueError(f"latent width must be >= 1, got {h}")
    rng = np.random.default_rng(cfg.seed)
    params1 = init_encoder(n_in, 2 * h, h, rng)
    params2 = params1.copy()
    batch = sample_pairs(x1, x2, cfg.neg_ratio, seed=cfg.seed + 1)

    losses = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        loss, g1, g2 = _loss_and_grads(params1, params2, batch, cfg)
        if not np.isfinite(loss):
            raise ValueError(f"training diverged (non-finite loss) at epoch {epoch}")
        losses[epoch] = loss
        for p, g in ((params1, g1), (params2, g2)):
            p.w1 -= cfg.learning_rate * g.w1
            p.b1 -= cfg.learning_rate * g.b1
            p.w2 -= cfg.learning_rate * g.w2
            p.b2 -= cfg.learning_rate * g.b2
    return TrainResult(params1=params1, params2=params2, loss_history=losses)
