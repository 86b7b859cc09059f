import math

import numpy as np
import pytest

from sitskit import (
    ValidationError,
    pixel_ce_loss,
    pixel_ce_loss_grad,
    region_smooth_loss,
    region_smooth_loss_grad,
    region_map_from_labels,
    sigmoid,
    total_loss,
)

from oracles import central_difference_grad, naive_region_loss

# frozen before the implementation: unbiased variance of {sigmoid(0), sigmoid(10)}
TWO_PIXEL_VARIANCE = 0.12497730209613205


def random_instance(rng, b=None, k=None, h=None, w=None, q=None):
    b = b or int(rng.integers(1, 4))
    k = k or int(rng.integers(1, 6))
    h = h or int(rng.integers(2, 17))
    w = w or int(rng.integers(2, 17))
    q = q or int(rng.integers(1, 9))
    logits = rng.normal(scale=2.0, size=(b, k, h, w)).astype(np.float32)
    ids = rng.integers(0, q, size=(b, h, w)).astype(np.int32)
    return logits, ids


def test_constant_logits_zero_loss():
    logits = np.full((1, 3, 6, 6), 1.7, dtype=np.float32)
    ids = np.random.default_rng(0).integers(0, 4, size=(6, 6)).astype(np.int32)
    result = region_smooth_loss(logits, ids)
    assert result.loss == 0.0


def test_two_pixel_region_frozen_value():
    logits = np.array([0.0, 10.0], dtype=np.float32).reshape(1, 1, 1, 2)
    ids = np.zeros((1, 2), dtype=np.int32)
    result = region_smooth_loss(logits, ids)
    assert result.loss == pytest.approx(TWO_PIXEL_VARIANCE, abs=1e-9)
    assert result.regions_counted == 1
    assert result.per_region[0].variances[0] == pytest.approx(TWO_PIXEL_VARIANCE, abs=1e-9)


def test_all_single_pixel_regions_counts_nothing():
    h = w = 4
    logits = np.random.default_rng(1).normal(size=(1, 2, h, w)).astype(np.float32)
    ids = np.arange(h * w, dtype=np.int32).reshape(h, w)
    result = region_smooth_loss(logits, ids)
    assert result.loss == 0.0
    assert result.regions_counted == 0
    assert result.regions_skipped == h * w
    np.testing.assert_array_equal(region_smooth_loss_grad(logits, ids), 0.0)


def test_matches_triple_loop_oracle():
    rng = np.random.default_rng(2)
    for _ in range(40):
        logits, ids = random_instance(rng)
        expected, counted, skipped = naive_region_loss(logits, ids)
        result = region_smooth_loss(logits, ids)
        assert result.loss == pytest.approx(expected, abs=1e-6)
        assert (result.regions_counted, result.regions_skipped) == (counted, skipped)


def test_population_variance_option():
    rng = np.random.default_rng(3)
    logits, ids = random_instance(rng)
    expected, _, _ = naive_region_loss(logits, ids, unbiased=False)
    assert region_smooth_loss(logits, ids, unbiased=False).loss == pytest.approx(expected, abs=1e-6)


def test_gradient_zero_at_constant():
    logits = np.zeros((2, 3, 5, 5), dtype=np.float32)
    ids = np.random.default_rng(4).integers(0, 3, size=(5, 5)).astype(np.int32)
    np.testing.assert_array_equal(region_smooth_loss_grad(logits, ids), 0.0)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(5):
        logits, ids = random_instance(rng, b=1, k=2, h=4, w=4, q=3)
        grad = region_smooth_loss_grad(logits, ids)
        fd = central_difference_grad(
            lambda z: region_smooth_loss(z, ids).loss, logits, step=1e-3)
        scale = max(float(np.abs(grad).max()), 1e-8)
        assert (np.abs(grad - fd) / scale).max() <= 1e-4


def test_mean_deviation_identity_per_region():
    rng = np.random.default_rng(6)
    logits, ids = random_instance(rng, b=1)
    probs = sigmoid(logits[0]).reshape(logits.shape[1], -1)
    flat = ids[0].ravel()
    for rid in np.unique(flat):
        sel = probs[:, flat == rid]
        dev_sum = (sel - sel.mean(axis=1, keepdims=True)).sum(axis=1)
        np.testing.assert_allclose(dev_sum, 0.0, atol=1e-12)


def test_region_id_relabeling_invariance():
    rng = np.random.default_rng(7)
    logits, ids = random_instance(rng)
    remap = {rid: 1000 - 17 * rid for rid in np.unique(ids)}  # arbitrary bijection
    relabeled = np.vectorize(remap.get)(ids).astype(np.int32)
    a = region_smooth_loss(logits, ids)
    b = region_smooth_loss(logits, relabeled)
    assert a.loss == pytest.approx(b.loss, abs=1e-12)
    np.testing.assert_allclose(region_smooth_loss_grad(logits, ids),
                               region_smooth_loss_grad(logits, relabeled), atol=1e-15)


def test_global_shift_of_constant_instance_stays_zero():
    ids = np.random.default_rng(8).integers(0, 4, size=(6, 6)).astype(np.int32)
    for shift in (-3.0, 0.0, 2.5):
        logits = np.full((1, 2, 6, 6), shift, dtype=np.float32)
        assert region_smooth_loss(logits, ids).loss == 0.0


def test_per_class_shift_changes_loss_continuously():
    rng = np.random.default_rng(9)
    logits, ids = random_instance(rng, b=1, k=2, h=6, w=6, q=2)
    base = region_smooth_loss(logits, ids).loss
    bumped = logits.copy()
    bumped[0, 0][ids[0] == 0] += 1e-4
    near = region_smooth_loss(bumped, ids).loss
    assert abs(near - base) < 1e-4  # small perturbation, small response


def test_batch_decomposition():
    rng = np.random.default_rng(10)
    logits, ids = random_instance(rng, b=3)
    whole = region_smooth_loss(logits, ids)
    total = 0.0
    counted = 0
    for b in range(3):
        item = region_smooth_loss(logits[b:b + 1], ids[b:b + 1])
        total += item.loss * item.regions_counted
        counted += item.regions_counted
    assert whole.loss == pytest.approx(total / counted, abs=1e-9)
    assert whole.regions_counted == counted


def test_region_map_resized_to_logit_grid():
    logits = np.random.default_rng(11).normal(size=(1, 2, 8, 8)).astype(np.float32)
    coarse = region_map_from_labels(np.array([[1, 2], [3, 4]], dtype=np.int32))
    fine = region_map_from_labels(np.kron(coarse.labels, np.ones((4, 4), dtype=np.int32)))
    a = region_smooth_loss(logits, coarse)
    b = region_smooth_loss(logits, fine)
    assert a.loss == pytest.approx(b.loss, abs=1e-12)


def test_batch_mismatch_rejected():
    logits = np.zeros((3, 2, 4, 4), dtype=np.float32)
    ids = np.zeros((2, 4, 4), dtype=np.int32)
    with pytest.raises(ValidationError):
        region_smooth_loss(logits, ids)


def test_nonnegative_on_random_inputs():
    rng = np.random.default_rng(12)
    for _ in range(20):
        logits, ids = random_instance(rng)
        assert region_smooth_loss(logits, ids).loss >= 0.0


def test_total_loss_arithmetic():
    report = total_loss(1.0, 0.02, 50.0)
    assert report.total == pytest.approx(2.0)
    assert total_loss(0.7, 0.5, 0.0).total == pytest.approx(0.7)
    assert total_loss(0.7, 0.0, 123.0).total == pytest.approx(0.7)


def test_total_loss_rejects_negative_weight():
    with pytest.raises(ValidationError):
        total_loss(1.0, 1.0, -0.5)


def test_ce_asymptotes_to_zero_with_margin():
    labels = np.zeros((1, 1, 1), dtype=np.int32)
    losses = []
    for margin in (2.0, 8.0, 20.0):
        logits = np.array([margin, 0.0], dtype=np.float32).reshape(1, 2, 1, 1)
        losses.append(pixel_ce_loss(logits, labels))
    assert losses[0] > losses[1] > losses[2]
    assert losses[2] < 1e-8


def test_ce_uniform_logits_is_log_k():
    for k in (2, 5, 9):
        logits = np.zeros((1, k, 3, 3), dtype=np.float32)
        labels = np.random.default_rng(13).integers(0, k, size=(1, 3, 3)).astype(np.int32)
        assert pixel_ce_loss(logits, labels) == pytest.approx(math.log(k), rel=1e-6)


def test_ce_all_ignored_is_zero():
    logits = np.random.default_rng(14).normal(size=(1, 3, 2, 2)).astype(np.float32)
    labels = np.full((1, 2, 2), 255, dtype=np.int32)
    loss, grad = pixel_ce_loss_grad(logits, labels, ignore_id=255)
    assert loss == 0.0
    np.testing.assert_array_equal(grad, 0.0)


def test_ce_rejects_out_of_range_label():
    logits = np.zeros((1, 3, 2, 2), dtype=np.float32)
    labels = np.full((1, 2, 2), 7, dtype=np.int32)
    with pytest.raises(ValidationError):
        pixel_ce_loss(logits, labels)


def test_ce_gradient_matches_finite_differences():
    rng = np.random.default_rng(15)
    logits = rng.normal(size=(1, 3, 3, 3)).astype(np.float32)
    labels = rng.integers(0, 3, size=(1, 3, 3)).astype(np.int32)
    _, grad = pixel_ce_loss_grad(logits, labels)
    fd = central_difference_grad(lambda z: pixel_ce_loss(z, labels), logits, step=1e-4)
    np.testing.assert_allclose(grad, fd, atol=1e-6)
