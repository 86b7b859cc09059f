"""Segmentation evaluation: confusion matrix, per-class IoU, mIoU, OA."""

from __future__ import annotations

import numpy as np

from .errors import MetricUndefinedError, ValidationError
from .validation import check_labels, check_same_shape


class ConfusionMatrix:
    """Accumulates (truth, prediction) pixel counts; rows are ground truth.

    Classes absent from both truth and prediction have an undefined IoU and
    are excluded from the mean (reported as NaN per class). Mergeable, so
    shards can be accumulated in parallel and combined deterministically.
    """

    def __init__(self, num_classes: int, ignore_id: int | None = None):
        if num_classes < 1:
            raise ValidationError("need at least one class")
        self.num_classes = num_classes
        self.ignore_id = ignore_id
        self.counts = np.zeros((num_classes, num_classes), dtype=np.uint64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, pred, truth) -> "ConfusionMatrix":
        pred = check_labels(pred, self.num_classes, self.ignore_id)
        truth = check_labels(truth, self.num_classes, self.ignore_id)
        check_same_shape(pred, truth, "prediction vs truth")
        live = np.ones(truth.shape, dtype=bool)
        if self.ignore_id is not None:
            live = (truth != self.ignore_id) & (pred != self.ignore_id)
        flat = self.num_classes * truth[live].astype(np.int64) + pred[live].astype(np.int64)
        binned = np.bincount(flat, minlength=self.num_classes ** 2)
        self.counts += binned.reshape(self.num_classes, self.num_classes).astype(np.uint64)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ValidationError("cannot merge matrices with different class counts")
        self.counts += other.counts
        return self

    def miou(self) -> tuple[np.ndarray, float]:
        """Per-class IoU (NaN where undefined) and their mean over defined classes."""
        if self.total == 0:
            raise MetricUndefinedError("no evaluated pixels: mIoU is undefined")
        cm = self.counts.astype(np.float64)
        tp = np.diag(cm)
        denom = cm.sum(axis=0) + cm.sum(axis=1) - tp
        per_class = np.full(self.num_classes, np.nan)
        defined = denom > 0
        per_class[defined] = tp[defined] / denom[defined]
        return per_class.astype(np.float32), float(np.nanmean(per_class))

    def overall_accuracy(self) -> float:
        if self.total == 0:
            raise MetricUndefinedError("no evaluated pixels: OA is undefined")
        return float(np.diag(self.counts).sum() / self.counts.sum())
