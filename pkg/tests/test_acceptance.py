"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion. The toy-training criteria take about two minutes combined.
"""

import csv
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from sitskit import (
    ChannelNormalizer,
    ConfusionMatrix,
    RegionSmoothClassifier,
    build_region_map,
    cloud_mask,
    featurize,
    frame_quality,
    fuse_rgb,
    load_tensor,
    region_index,
    region_smooth_loss,
    region_smooth_loss_grad,
    sample_split,
    save_tensor,
    synth_sits,
)
from sitskit.cube import DEFAULT_BAND_MAP, SitsCube
from sitskit.stsr import CODE_DTYPES

from oracles import (
    cloud_pixel_reference,
    iou_reference,
    naive_region_loss,
)


def report(name: str, ok: bool, detail: str = ""):
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


def run_cli(args, cwd, threads=None):
    env = dict(os.environ)
    if threads is not None:
        env["SITSKIT_THREADS"] = str(threads)
    proc = subprocess.run([sys.executable, "-m", "sitskit", *map(str, args)],
                          cwd=cwd, env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def test_criterion_gradient_correctness():
    """>= 20 random instances; FD step 1e-3; max relative error <= 1e-4; < 10 s."""
    rng = np.random.default_rng(1001)
    started = time.perf_counter()
    worst = 0.0
    step = 1e-3
    for _ in range(20):
        b = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        h = int(rng.integers(2, 17))
        w = int(rng.integers(2, 17))
        q = int(rng.integers(1, 9))
        logits = rng.normal(scale=2.0, size=(b, k, h, w)).astype(np.float32)
        ids = rng.integers(0, q, size=(b, h, w)).astype(np.int32)

        grad = region_smooth_loss_grad(logits, ids)
        flat = logits.astype(np.float64).ravel()
        fd = np.zeros_like(flat)
        for i in range(flat.size):
            up = flat.copy()
            up[i] += step
            down = flat.copy()
            down[i] -= step
            fd[i] = (region_smooth_loss(up.reshape(logits.shape), ids).loss
                     - region_smooth_loss(down.reshape(logits.shape), ids).loss) / (2 * step)
        scale = max(float(np.abs(grad).max()), 1e-8)
        rel = np.abs(grad.ravel() - fd) / scale
        worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - started
    report("gradient-correctness", worst <= 1e-4 and elapsed < 10.0,
           f"max_rel_err={worst:.2e}, {elapsed:.1f}s")


def test_criterion_loss_oracle_equivalence():
    """100 random instances vs triple-loop oracle, 1e-6 absolute, incl. skip paths."""
    rng = np.random.default_rng(1002)
    worst = 0.0
    for case in range(100):
        b = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        h = int(rng.integers(2, 13))
        w = int(rng.integers(2, 13))
        logits = rng.normal(scale=2.0, size=(b, k, h, w)).astype(np.float32)
        if case % 10 == 7:
            ids = np.arange(b * h * w, dtype=np.int32).reshape(b, h, w)  # all skipped
        elif case % 10 == 3:
            ids = rng.integers(0, h * w, size=(b, h, w)).astype(np.int32)  # many 1-px
        else:
            ids = rng.integers(0, int(rng.integers(1, 9)), size=(b, h, w)).astype(np.int32)
        expected, counted, skipped = naive_region_loss(logits, ids)
        got = region_smooth_loss(logits, ids)
        assert (got.regions_counted, got.regions_skipped) == (counted, skipped)
        if counted == 0:
            assert got.loss == 0.0
        worst = max(worst, abs(got.loss - expected))
    report("loss-oracle-equivalence", worst <= 1e-6, f"max_abs_err={worst:.2e}")


def test_criterion_cloud_mask_oracle():
    """Exact agreement with the four-term conjunction on 1e5 random pixels."""
    rng = np.random.default_rng(1003)
    n = 100_000
    values = rng.uniform(0.0, 0.7, size=(5, 1, n)).astype(np.float32)
    got = cloud_mask(values, DEFAULT_BAND_MAP)[0]
    mismatches = 0
    for i in range(n):
        expected = cloud_pixel_reference(values[0, 0, i], values[1, 0, i],
                                         values[3, 0, i], values[4, 0, i])
        if bool(got[i]) != expected:
            mismatches += 1
    report("cloud-mask-oracle", mismatches == 0, f"{n} pixels, {mismatches} mismatches")


def test_criterion_prior_pipeline_contracts():
    """Frame scoring, clear-set threshold/fallback, fusion bounds, region map laws."""
    ok = True
    # score formula exact
    sample = synth_sits(21, 8, 5, 32, 32, 4)
    fq = frame_quality(sample.cube)
    exact = np.all(fq.score == (-10.0 * fq.cloud_ratio + fq.brightness + fq.sharpness)
                   .astype(np.float32))
    ok &= bool(exact)
    # threshold at 0.8 with argmin fallback
    ok &= fq.clear_set == tuple(int(t) for t in np.flatnonzero(fq.cloud_ratio < 0.8))
    cloudy = SitsCube(np.full((3, 5, 8, 8), 0.5, dtype=np.float32), dict(DEFAULT_BAND_MAP), 1.0)
    fq_cloudy = frame_quality(cloudy)
    ok &= fq_cloudy.clear_set == (int(np.argmin(fq_cloudy.cloud_ratio)),)
    # fused RGB in [0,1] and convex-combination bound
    fused = fuse_rgb(sample.cube, fq)
    ok &= bool(fused.values.min() >= 0.0 and fused.values.max() <= 1.0)
    ok &= abs(float(fused.weights.sum()) - 1.0) <= 1e-6 and fused.weights.min() >= 0.0
    # region map: area sort and partition
    rng = np.random.default_rng(1004)
    masks = [rng.uniform(size=(24, 24)) > t for t in (0.3, 0.55, 0.8)]
    rm = build_region_map(masks)
    entries = region_index(rm)
    ok &= sum(len(e.coords) for e in entries) == 24 * 24
    source_areas = sorted((int(m.sum()) for m in masks), reverse=True)
    kept = [i for i in rm.region_ids if i != 0]
    ok &= kept == sorted(kept)
    # id 1 descends from the largest source mask: repaint to verify
    order = sorted(range(3), key=lambda i: -int(masks[i].sum()))
    painted = np.zeros((24, 24), dtype=int)
    for rank, i in enumerate(order, start=1):
        painted[masks[i]] = rank
    survivors = [v for v in np.unique(painted) if v != 0]
    relabel = {old: new for new, old in enumerate(survivors, start=1)}
    ok &= bool(np.all(np.vectorize(lambda v: relabel.get(v, 0))(painted) == rm.labels))
    report("prior-pipeline-contracts", bool(ok), f"source areas {source_areas}")


def test_criterion_metrics_oracle():
    """mIoU/OA match set-based brute force on 100 random images; hand case 1e-4."""
    rng = np.random.default_rng(1005)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        truth = rng.integers(0, k, size=(32, 32)).astype(np.int32)
        pred = rng.integers(0, k, size=(32, 32)).astype(np.int32)
        cm = ConfusionMatrix(k).accumulate(pred, truth)
        per_class, miou = cm.miou()
        ref_classes, ref_miou = iou_reference(pred, truth, k)
        for got, want in zip(per_class, ref_classes):
            if want is None:
                assert np.isnan(got)
            else:
                assert abs(got - want) <= 1e-6
        assert abs(miou - ref_miou) <= 1e-9
        assert cm.overall_accuracy() == (pred == truth).mean()
    truth = np.array([0, 0, 0, 0, 1, 1, 1, 1], dtype=np.int32)
    pred = np.array([0, 0, 1, 1, 1, 1, 1, 1], dtype=np.int32)
    _, miou = ConfusionMatrix(2).accumulate(pred, truth).miou()
    hand_ok = abs(miou - 0.5833333333333333) <= 1e-4
    report("metrics-oracle", hand_ok, f"hand case miou={miou:.6f}")


def test_criterion_reproducibility(tmp_path):
    """Seeded commands replay bit-identically across SITSKIT_THREADS=1 and 4."""
    base = Path(tmp_path)
    run_cli(["synth", "--seed", "4090", "--t", "4", "--h", "24", "--w", "24",
             "--out", base / "a"], cwd=base, threads=1)
    run_cli(["replay", base / "a" / "synth_manifest.json", "--out", base / "b"],
            cwd=base, threads=4)
    same = all((base / "a" / n).read_bytes() == (base / "b" / n).read_bytes()
               for n in ("cube.stsr", "labels.stsr", "regions.stsr"))

    run_cli(["split", "--ratio", "0.05", "--population", "200", "--seed", "2025",
             "--out", base / "sa"], cwd=base, threads=1)
    run_cli(["replay", base / "sa" / "split_manifest.json", "--out", base / "sb"],
            cwd=base, threads=4)
    same &= (base / "sa" / "split.txt").read_bytes() == (base / "sb" / "split.txt").read_bytes()

    run_cli(["demo-train", "--seed", "42", "--epochs", "4", "--t", "3", "--h", "16",
             "--w", "16", "--k", "3", "--ratio", "0.05", "--out", base / "ta"],
            cwd=base, threads=1)
    run_cli(["replay", base / "ta" / "demo-train_manifest.json", "--out", base / "tb"],
            cwd=base, threads=4)
    same &= (base / "ta" / "history.csv").read_bytes() == (base / "tb" / "history.csv").read_bytes()

    run_cli(["prior-gen", "--input", base / "a" / "cube.stsr", "--out", base / "pa"],
            cwd=base, threads=1)
    run_cli(["replay", base / "pa" / "prior-gen_manifest.json", "--out", base / "pb"],
            cwd=base, threads=4)
    same &= all((base / "pa" / n).read_bytes() == (base / "pb" / n).read_bytes()
                for n in ("SAM_PRIOR_0.stsr", "FUSED_RGB_0.stsr"))
    report("reproducibility", bool(same))


def _train_once(seed, weight, epochs=2500, lr=1.0):
    sample = synth_sits(seed, 12, 5, 64, 64, 5)
    norm = ChannelNormalizer().fit([sample.cube])
    feats = featurize(norm.transform(sample.cube))
    split = sample_split(0.01, seed, 64 * 64)
    resolved = float(sample.regions.num_regions) if weight == "q" else weight
    model = RegionSmoothClassifier(weight=resolved, lr=lr, epochs=epochs, seed=seed)
    model.fit(feats, sample.labels, sample.regions, split.selected, num_classes=5)
    last = model.history_[-1]
    return last.test_miou, last.region_loss


def test_criterion_toy_few_shot_effect():
    """5 seeds, 1% labels, ideal regions: lambda=Q beats lambda=0 on mean test
    mIoU and suppresses intra-region variance to <= 10%; < 2 min total."""
    started = time.perf_counter()
    base_miou, base_var, reg_miou, reg_var = [], [], [], []
    for seed in range(5):
        miou0, var0 = _train_once(seed, 0.0)
        miouq, varq = _train_once(seed, "q")
        base_miou.append(miou0)
        base_var.append(var0)
        reg_miou.append(miouq)
        reg_var.append(varq)
    elapsed = time.perf_counter() - started
    gain_ok = np.mean(reg_miou) >= np.mean(base_miou)
    var_ratio = np.mean(reg_var) / np.mean(base_var)
    report("toy-few-shot-effect",
           bool(gain_ok and var_ratio <= 0.10 and elapsed < 120.0),
           f"miou {np.mean(base_miou):.4f}->{np.mean(reg_miou):.4f}, "
           f"var_ratio={var_ratio:.3f}, {elapsed:.0f}s")


def test_criterion_lambda_sweep_harness(tmp_path):
    """demo-train --sweep writes one row per lambda; region_loss decreases with lambda."""
    run_cli(["demo-train", "--sweep", "--seed", "0", "--epochs", "2500", "--lr", "1.0",
             "--out", tmp_path], cwd=tmp_path)
    with open(Path(tmp_path) / "sweep.csv") as fh:
        rows = list(csv.reader(fh))
    lambdas = [float(r[0]) for r in rows[1:]]
    region = [float(r[2]) for r in rows[1:]]
    ok = (len(rows) == 5 and lambdas == sorted(lambdas)
          and all(region[i] >= region[i + 1] for i in range(len(region) - 1)))
    report("lambda-sweep-harness", bool(ok),
           f"lambdas={lambdas}, region_loss={['%.2e' % v for v in region]}")


def test_criterion_stsr_round_trip(tmp_path):
    """1000 randomized save/load cases, bit-exact."""
    rng = np.random.default_rng(1006)
    dtypes = list(CODE_DTYPES.values())
    path = Path(tmp_path) / "case.stsr"
    failures = 0
    for case in range(1000):
        dtype = dtypes[int(rng.integers(len(dtypes)))]
        ndim = int(rng.integers(1, 6))
        shape = tuple(int(v) for v in rng.integers(1, 5, size=ndim))
        if np.issubdtype(dtype, np.floating):
            values = rng.normal(size=shape).astype(dtype)
            # exercise non-finite payloads too
            if case % 17 == 0:
                values.ravel()[0] = np.inf
            if case % 23 == 0:
                values.ravel()[-1] = np.nan
        else:
            info = np.iinfo(dtype)
            values = rng.integers(info.min, int(info.max) + 1, size=shape).astype(dtype)
        save_tensor(values, path)
        loaded = load_tensor(path)
        if (loaded.dtype != values.dtype or loaded.shape != values.shape
                or loaded.tobytes() != values.tobytes()):
            failures += 1
    report("stsr-round-trip", failures == 0, f"1000 cases, {failures} failures")
