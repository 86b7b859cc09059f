"""Minimal per-pixel linear classifier trained with the regularized objective.

The model is deliberately tiny: per-pixel features are the temporal mean and
population std of each normalized channel (F = 2C), mapped to class logits
by a single linear layer and trained with full-batch gradient descent on

    total = cross_entropy(labeled pixels) + weight * region_variance(all pixels)

which isolates the effect of the region regularizer from any architecture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import TrainingError, ValidationError
from .loss import pixel_ce_loss_grad, region_smooth_loss, region_smooth_loss_and_grad, total_loss
from .metrics import ConfusionMatrix
from .regions import RegionMap
from .rng import SplitMix64
from .validation import check_array

INIT_SPAN = 0.01


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    seg_loss: float
    region_loss: float
    total: float
    train_miou: float
    test_miou: float


def featurize(cube) -> np.ndarray:
    """Per-pixel temporal mean and population std per channel, [2C, H, W].

    Expects an already-normalized cube (or raw [T, C, H, W] values).
    """
    values = cube.values if hasattr(cube, "values") else check_array(cube, "cube", ndim=4)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    return np.concatenate([mean, std], axis=0).astype(np.float32)


def _subset_miou(pred: np.ndarray, truth: np.ndarray, idx: np.ndarray, k: int) -> float:
    if idx.size == 0:
        return float("nan")
    cm = ConfusionMatrix(k).accumulate(pred.ravel()[idx], truth.ravel()[idx])
    return cm.miou()[1]


class RegionSmoothClassifier(BaseEstimator):
    """Linear pixel classifier with region-variance regularization.

    Parameters
    ----------
    weight : float or None
        Regularizer strength; None uses the prior's region count.
    lr : float
        Gradient-descent step size.
    epochs : int
        Full-batch steps.
    seed : int
        Initialization seed (weights uniform in [-0.01, 0.01]).
    unbiased : bool
        Variance divisor inside the regularizer (n-1 when True).
    """

    def __init__(self, weight: float | None = None, lr: float = 0.1,
                 epochs: int = 200, seed: int = 0, unbiased: bool = True):
        self.weight = weight
        self.lr = lr
        self.epochs = epochs
        self.seed = seed
        self.unbiased = unbiased

    def fit(self, features, labels, regions: RegionMap | np.ndarray,
            labeled_idx, num_classes: int | None = None):
        if self.lr <= 0:
            raise ValidationError("lr must be > 0")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        features = check_array(features, "features", ndim=3)
        labels = check_array(labels, "labels", ndim=2)
        f, h, w = features.shape
        if labels.shape != (h, w):
            raise ValidationError(f"labels {labels.shape} do not match features {(h, w)}")
        labeled_idx = np.asarray(sorted(labeled_idx), dtype=np.int64)
        if labeled_idx.size < 1:
            raise ValidationError("need at least one labeled pixel")
        k = int(num_classes if num_classes is not None else labels.max() + 1)

        region_labels = regions.labels if isinstance(regions, RegionMap) else np.asarray(regions)
        weight = float(self.weight) if self.weight is not None else float(
            len(np.unique(region_labels)))
        if weight < 0:
            raise ValidationError("weight must be >= 0")

        rng = SplitMix64(self.seed)
        n_params = f * k + k
        init = np.array([rng.uniform(-INIT_SPAN, INIT_SPAN) for _ in range(n_params)],
                        dtype=np.float32)
        wmat = init[:f * k].reshape(f, k)
        bias = init[f * k:]

        x = features.reshape(f, h * w).T.astype(np.float64)  # [P, F]
        masked = np.full(labels.shape, -1, dtype=np.int64).ravel()
        masked[labeled_idx] = labels.ravel()[labeled_idx]
        masked = masked.reshape(1, h, w)
        test_idx = np.setdiff1d(np.arange(h * w), labeled_idx)

        history: list[EpochRecord] = []
        for epoch in range(self.epochs):
            logits = (x @ wmat.astype(np.float64) + bias.astype(np.float64))
            logits4 = logits.T.reshape(1, k, h, w)

            seg, g_seg = pixel_ce_loss_grad(logits4, masked, ignore_id=-1)
            if weight > 0:
                region, g_region = region_smooth_loss_and_grad(
                    logits4, region_labels, unbiased=self.unbiased)
            else:
                region = region_smooth_loss(logits4, region_labels, unbiased=self.unbiased)
                g_region = None
            report = total_loss(seg, region.loss, weight,
                                regions_counted=region.regions_counted,
                                regions_skipped=region.regions_skipped)
            if not np.isfinite(report.total):
                raise TrainingError(f"non-finite loss at epoch {epoch}", epoch=epoch)

            g = g_seg if g_region is None else g_seg + weight * g_region
            g2 = g[0].reshape(k, h * w).T  # [P, K]

            pred = logits.argmax(axis=1).reshape(h, w)
            history.append(EpochRecord(
                epoch, report.seg_loss, report.region_loss, report.total,
                _subset_miou(pred, labels, labeled_idx, k),
                _subset_miou(pred, labels, test_idx, k)))

            wmat = (wmat.astype(np.float64) - self.lr * (x.T @ g2)).astype(np.float32)
            bias = (bias.astype(np.float64) - self.lr * g2.sum(axis=0)).astype(np.float32)

        self.weights_ = wmat
        self.bias_ = bias
        self.num_classes_ = k
        self.resolved_weight_ = weight
        self.history_ = history
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("RegionSmoothClassifier is not fitted yet")

    def predict_logits(self, features) -> np.ndarray:
        """Raw class logits, shape [1, K, H, W]."""
        self._check_fitted()
        features = check_array(features, "features", ndim=3)
        f, h, w = features.shape
        if f != self.weights_.shape[0]:
            raise ValidationError(
                f"features have {f} channels, model expects {self.weights_.shape[0]}")
        logits = (features.reshape(f, h * w).T.astype(np.float64)
                  @ self.weights_.astype(np.float64) + self.bias_.astype(np.float64))
        return logits.T.reshape(1, self.num_classes_, h, w).astype(np.float32)

    def predict(self, features) -> np.ndarray:
        """Argmax class image, shape [H, W] (ties go to the lowest class)."""
        return np.argmax(self.predict_logits(features)[0], axis=0).astype(np.int32)
