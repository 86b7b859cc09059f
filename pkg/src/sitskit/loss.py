"""Region-variance consistency loss, its analytic gradient, and loss totals.

The regularizer measures how fragmented the model's sigmoid probabilities
are inside each prior region: for every item b and region u with at least
two pixels, take the per-class variance of the probabilities over the
region's pixels, average over the K classes, and average the result over
all counted (item, region) pairs N. Regions below two pixels are skipped;
when nothing is counted the loss is exactly zero with a zero gradient.

The gradient with respect to a logit z_j of class k inside a counted
region u (n_u pixels, probability mean p_bar) is

    (1 / (N * K)) * (2 / (n_u - 1)) * (p_j - p_bar) * p_j * (1 - p_j)

with the 2/(n_u - 1) factor replaced by 2/n_u under population variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .regions import MIN_REGION_PIXELS, RegionMap, resize_nearest, region_map_from_labels
from .validation import check_array, check_labels


@dataclass(frozen=True)
class RegionClassVariance:
    """Per-class probability variance of one counted (item, region) pair."""

    item: int
    region_id: int
    variances: np.ndarray  # [K]


@dataclass(frozen=True)
class RegionLossResult:
    loss: float
    per_region: list[RegionClassVariance] = field(default_factory=list)
    regions_counted: int = 0
    regions_skipped: int = 0


@dataclass(frozen=True)
class LossReport:
    """Total-objective decomposition: total = seg_loss + weight * region_loss."""

    seg_loss: float
    region_loss: float
    weight: float
    total: float
    regions_counted: int = 0
    regions_skipped: int = 0


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _resolve_regions(regions, batch: int, height: int, width: int) -> np.ndarray:
    """Region labels as int [B, H*W], resized/broadcast to the logits grid."""
    labels = regions.labels if isinstance(regions, RegionMap) else np.asarray(regions)
    if labels.ndim == 2:
        labels = labels[None]
    if labels.ndim != 3:
        raise ValidationError(f"region map must be [H,W] or [B,H,W], got {labels.shape}")
    if labels.shape[0] not in (1, batch):
        raise ValidationError(
            f"region batch {labels.shape[0]} does not match prediction batch {batch}"
        )
    if labels.shape[1:] != (height, width):
        labels = np.stack([
            resize_nearest(region_map_from_labels(item), height, width).labels
            for item in labels
        ])
    if labels.shape[0] == 1 and batch > 1:
        labels = np.broadcast_to(labels, (batch,) + labels.shape[1:])
    return labels.reshape(batch, height * width)


def _region_terms(logits, regions, unbiased: bool, want_grad: bool):
    logits = check_array(logits, "logits", ndim=4)
    B, K, H, W = logits.shape
    ids = _resolve_regions(regions, B, H, W)
    probs = sigmoid(logits).reshape(B, K, H * W)

    acc = 0.0
    counted = 0
    skipped = 0
    per_region: list[RegionClassVariance] = []
    grad = np.zeros((B, K, H * W), dtype=np.float64) if want_grad else None

    for b in range(B):
        uniq, first, inverse = np.unique(ids[b], return_index=True, return_inverse=True)
        counts = np.bincount(inverse, minlength=len(uniq))
        ok = counts >= MIN_REGION_PIXELS
        skipped += int((~ok).sum())

        sums = np.zeros((K, len(uniq)), dtype=np.float64)
        for k in range(K):
            sums[k] = np.bincount(inverse, weights=probs[b, k], minlength=len(uniq))
        means = sums / counts
        dev = probs[b] - means[:, inverse]

        # A (class, region) whose probabilities are all bitwise equal has an
        # exactly zero variance; mask it so float rounding in the mean cannot
        # leave residue (the zero-loss-iff-constant contract is exact).
        ref = probs[b][:, first]
        varies = np.zeros((K, len(uniq)), dtype=bool)
        for k in range(K):
            mismatch = np.bincount(inverse, weights=(probs[b, k] != ref[k, inverse]),
                                   minlength=len(uniq))
            varies[k] = mismatch > 0
        dev *= varies[:, inverse]

        denom = counts - 1 if unbiased else counts
        var = np.zeros((K, len(uniq)), dtype=np.float64)
        for k in range(K):
            sq = np.bincount(inverse, weights=dev[k] * dev[k], minlength=len(uniq))
            var[k, ok] = sq[ok] / denom[ok]

        counted += int(ok.sum())
        acc += float(var[:, ok].mean(axis=0).sum())
        for j in np.flatnonzero(ok):
            per_region.append(RegionClassVariance(b, int(uniq[j]), var[:, j].copy()))

        if want_grad:
            factor = np.zeros(len(uniq), dtype=np.float64)
            factor[ok] = 2.0 / denom[ok]
            grad[b] = factor[inverse] * dev * (probs[b] * (1.0 - probs[b]))

    loss = acc / counted if counted else 0.0
    if want_grad:
        grad = grad / (counted * K) if counted else grad
        grad = grad.reshape(B, K, H, W)
    return loss, per_region, counted, skipped, grad


def region_smooth_loss(logits, regions, *, unbiased: bool = True) -> RegionLossResult:
    """Mean intra-region per-class variance of sigmoid probabilities.

    ``logits`` is [B, K, H, W] raw predictions; the leading axis can
    enumerate batch items or time steps. ``regions`` is a RegionMap or an
    integer label image [H, W] (broadcast over items) or [B, H, W]; maps on
    a different grid are resampled with nearest-neighbor first. Variance
    uses the n-1 divisor unless ``unbiased=False``.
    """
    loss, per_region, counted, skipped, _ = _region_terms(logits, regions, unbiased, False)
    return RegionLossResult(loss, per_region, counted, skipped)


def region_smooth_loss_grad(logits, regions, *, unbiased: bool = True) -> np.ndarray:
    """Analytic gradient of region_smooth_loss w.r.t. the logits, [B, K, H, W]."""
    _, _, _, _, grad = _region_terms(logits, regions, unbiased, True)
    return grad


def region_smooth_loss_and_grad(logits, regions, *, unbiased: bool = True):
    """Forward value and gradient in one pass (one sigmoid, one reduction)."""
    loss, per_region, counted, skipped, grad = _region_terms(logits, regions, unbiased, True)
    return RegionLossResult(loss, per_region, counted, skipped), grad


def total_loss(seg: float, region: float, weight: float, *,
               regions_counted: int = 0, regions_skipped: int = 0) -> LossReport:
    """Combine the segmentation loss with the weighted region term."""
    if weight < 0:
        raise ValidationError(f"regularizer weight must be >= 0, got {weight}")
    total = float(seg) + float(weight) * float(region)
    return LossReport(float(seg), float(region), float(weight), total,
                      regions_counted, regions_skipped)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def pixel_ce_loss(logits, labels, ignore_id: int | None = None) -> float:
    """Mean softmax cross-entropy over non-ignored pixels (0 if all ignored)."""
    loss, _ = pixel_ce_loss_grad(logits, labels, ignore_id)
    return loss


def pixel_ce_loss_grad(logits, labels, ignore_id: int | None = None):
    """Cross-entropy value and its gradient w.r.t. the logits, [B, K, H, W]."""
    logits = check_array(logits, "logits", ndim=4).astype(np.float64)
    B, K, H, W = logits.shape
    labels = check_labels(labels, K, ignore_id)
    if labels.shape != (B, H, W):
        raise ValidationError(f"labels shape {labels.shape} does not match logits {(B, H, W)}")

    live = np.ones(labels.shape, dtype=bool) if ignore_id is None else labels != ignore_id
    n = int(live.sum())
    grad = np.zeros_like(logits)
    if n == 0:
        return 0.0, grad

    logp = _log_softmax(logits)
    safe = np.where(live, labels, 0)
    picked = np.take_along_axis(logp, safe[:, None], axis=1)[:, 0]
    loss = -float(picked[live].sum()) / n

    softmax = np.exp(logp)
    onehot = np.zeros_like(logits)
    np.put_along_axis(onehot, safe[:, None], 1.0, axis=1)
    grad = (softmax - onehot) * live[:, None] / n
    return loss, grad
