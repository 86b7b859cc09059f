"""Command-line interface.

Every command resolves its settings with precedence flags > config file >
defaults, records the resolved values plus any seed in a JSON manifest next
to its outputs, and exits nonzero with a single machine-parsable error line
on failure. ``replay`` re-runs a recorded manifest bit-identically.
"""

from __future__ import annotations

import csv
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .clouds import frame_quality
from .composite import composite_mean, composite_median, fuse_rgb, to_uint8
from .cube import DEFAULT_BAND_MAP, SitsCube
from .errors import SitsKitError, ValidationError
from .fewshot import ChannelNormalizer, sample_split, sample_split_stratified, synth_sits
from .loss import pixel_ce_loss, region_smooth_loss, region_smooth_loss_grad, total_loss
from .manifest import RunManifest, read_manifest, write_manifest
from .metrics import ConfusionMatrix
from .regions import build_region_map, fallback_regions, region_map_from_labels
from .rng import SplitMix64
from .stsr import load_tensor, save_tensor
from .trainer import RegionSmoothClassifier, featurize

DEFAULT_LAMBDA = 50.0
DEFAULT_CROP = 64
DEFAULT_TDROP = (0.1, 0.3)


# ---------------------------------------------------------------------------
# config helpers

def parse_band_map(text: str) -> dict:
    out = {}
    for part in text.split(","):
        name, _, idx = part.partition("=")
        if not idx:
            raise ValidationError(f"bad band map entry {part!r}, expected name=index")
        out[name.strip().upper()] = int(idx)
    return out


def parse_config_file(path: str) -> dict:
    cfg = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if not _:
            raise ValidationError(f"bad config line {line!r}, expected key=value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def resolve_params(ctx: click.Context, config: str | None) -> dict:
    """Apply flags > config file > defaults to the current command."""
    cfg = parse_config_file(config) if config else {}
    resolved = {}
    for param in ctx.command.params:
        name = param.name
        if name == "config":
            continue
        source = ctx.get_parameter_source(name)
        if source == click.core.ParameterSource.COMMANDLINE or name not in cfg:
            resolved[name] = ctx.params[name]
        else:
            resolved[name] = param.type.convert(cfg[name], param, ctx)
    return resolved


def ensure_seed(cfg: dict) -> dict:
    if cfg.get("seed") is None:
        cfg["seed"] = int.from_bytes(os.urandom(8), "little")
    return cfg


def env_threads() -> int | None:
    raw = os.environ.get("SITSKIT_THREADS")
    return int(raw) if raw else None


def finish_run(command: str, cfg: dict, inputs: list, outputs: list, started: float) -> None:
    """Validate outputs, then write the manifest next to them."""
    for path in outputs:
        if str(path).endswith(".stsr"):
            load_tensor(path)
    out_dir = Path(cfg.get("out", "."))
    manifest = RunManifest(
        command=command,
        config={k: v for k, v in cfg.items()},
        inputs=[str(p) for p in inputs],
        outputs=[str(p) for p in outputs],
        seed=cfg.get("seed"),
        wall_time_s=time.perf_counter() - started,
        version=__version__,
        threads=env_threads(),
    ).stamp()
    write_manifest(manifest, out_dir / f"{command}_manifest.json")


def emit(key, value):
    if isinstance(value, float):
        value = format(value, ".10g")
    click.echo(f"{key}={value}")


def write_report(path: Path, rows: list[tuple]) -> None:
    path.write_text("".join(f"{k}={format(v, '.10g') if isinstance(v, float) else v}\n"
                            for k, v in rows))


def load_cube(path: str, band_map: dict, scale: float) -> SitsCube:
    raw = load_tensor(path)
    if raw.ndim != 4:
        raise ValidationError(f"{path}: expected a [T,C,H,W] cube, got shape {raw.shape}")
    if raw.dtype == np.uint16:
        return SitsCube.from_digital_numbers(raw, band_map, scale)
    if raw.dtype == np.float32:
        return SitsCube(raw, band_map, scale)
    raise ValidationError(f"{path}: cube dtype must be f32 or u16, got {raw.dtype}")


# ---------------------------------------------------------------------------
# runners (shared by the commands and by replay)

def run_synth(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    sample = synth_sits(cfg["seed"], cfg["t"], cfg["c"], cfg["h"], cfg["w"], cfg["k"],
                        noise=cfg["noise"], cloud_rate=cfg["cloud_rate"])
    paths = [out / "cube.stsr", out / "labels.stsr", out / "regions.stsr"]
    save_tensor(sample.cube.values, paths[0])
    save_tensor(sample.labels, paths[1])
    save_tensor(sample.regions.labels, paths[2])
    emit("frames", cfg["t"])
    emit("cloud_frames", ",".join(map(str, sample.cloud_frames)) or "none")
    emit("regions", sample.regions.num_regions)
    return paths


def run_split(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if cfg.get("labels"):
        classes = load_tensor(cfg["labels"]).ravel()
        spec = sample_split_stratified(cfg["ratio"], cfg["seed"], classes)
    else:
        spec = sample_split(cfg["ratio"], cfg["seed"], cfg["population"])
    path = out / "split.txt"
    path.write_text("".join(f"{i}\n" for i in spec.selected))
    emit("selected", len(spec.selected))
    return [path]


def run_prior_gen(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    band_map = parse_band_map(cfg["band_map"]) if isinstance(cfg["band_map"], str) else cfg["band_map"]
    cube = load_cube(cfg["input"], band_map, cfg["scale"])
    fq = frame_quality(cube)
    fused = fuse_rgb(cube, fq, stretch=cfg["stretch"])

    if cfg.get("masks"):
        stack = load_tensor(cfg["masks"])
        if stack.ndim != 3:
            raise ValidationError(f"{cfg['masks']}: mask stack must be [Q,H,W], got {stack.shape}")
        if stack.shape[1:] != (cube.height, cube.width):
            raise ValidationError(
                f"{cfg['masks']}: mask extent {stack.shape[1:]} does not match "
                f"cube extent {(cube.height, cube.width)}")
        regions = build_region_map([m > 0 for m in stack], (cube.height, cube.width))
    else:
        regions = fallback_regions(fused, cfg["grid"])

    rid = cfg["id"]
    paths = [out / f"SAM_PRIOR_{rid}.stsr", out / f"FUSED_RGB_{rid}.stsr"]
    save_tensor(regions.labels, paths[0])
    save_tensor(fused.values, paths[1])
    if cfg.get("uint8"):
        paths.append(out / f"FUSED_RGB_{rid}_u8.stsr")
        save_tensor(to_uint8(fused), paths[2])
    emit("best_frame", fq.best_frame)
    emit("clear_frames", len(fq.clear_set))
    emit("regions", sum(1 for i in regions.region_ids if i != regions.background_id))
    return paths


def run_composite(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    band_map = parse_band_map(cfg["band_map"]) if isinstance(cfg["band_map"], str) else cfg["band_map"]
    cube = load_cube(cfg["input"], band_map, cfg["scale"])
    fq = frame_quality(cube)
    frames = ([int(v) for v in str(cfg["frames"]).split(",")] if cfg.get("frames")
              else sorted(fq.clear_set))
    method = cfg["method"]
    if method == "fused":
        path = out / "FUSED_RGB.stsr"
        save_tensor(fuse_rgb(cube, fq, stretch=cfg["stretch"]).values, path)
    elif method == "mean":
        path = out / "COMPOSITE_MEAN.stsr"
        save_tensor(composite_mean(cube, frames).astype(np.float32), path)
    elif method == "median":
        path = out / "COMPOSITE_MEDIAN.stsr"
        save_tensor(composite_median(cube, frames).astype(np.float32), path)
    else:
        raise ValidationError(f"unknown composite method {method!r}")
    emit("method", method)
    emit("frames_used", ",".join(map(str, frames)))
    return [path]


def run_loss(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    logits = load_tensor(cfg["logits"]).astype(np.float32)
    regions = load_tensor(cfg["regions"])
    result = region_smooth_loss(logits, regions, unbiased=not cfg["population_var"])

    seg = 0.0
    if cfg.get("labels"):
        labels = load_tensor(cfg["labels"])
        if labels.ndim == 2:
            labels = labels[None]
        seg = pixel_ce_loss(logits, labels, ignore_id=cfg.get("ignore_class"))
    report = total_loss(seg, result.loss, cfg["weight"],
                        regions_counted=result.regions_counted,
                        regions_skipped=result.regions_skipped)

    paths = [out / "loss_report.txt"]
    write_report(paths[0], [
        ("seg_loss", report.seg_loss),
        ("region_loss", report.region_loss),
        ("lambda", report.weight),
        ("total", report.total),
        ("regions_counted", report.regions_counted),
        ("regions_skipped", report.regions_skipped),
    ])
    if cfg.get("grad_out"):
        grad = region_smooth_loss_grad(logits, regions, unbiased=not cfg["population_var"])
        paths.append(Path(cfg["grad_out"]))
        save_tensor(grad.astype(np.float32), paths[-1])
    for key, value in (("region_loss", report.region_loss), ("total", report.total)):
        emit(key, value)
    return paths


def _random_instance(rng: SplitMix64):
    b = 1 + rng.randrange(3)
    k = 1 + rng.randrange(5)
    h = 2 + rng.randrange(15)
    w = 2 + rng.randrange(15)
    q = 1 + rng.randrange(8)
    logits = rng.normal_array(b * k * h * w, 2.0).reshape(b, k, h, w)
    ids = rng.u64_array(b * h * w).astype(np.int64) % q
    return logits, ids.reshape(b, h, w).astype(np.int32)


def fd_max_rel_error(logits, regions, step: float = 1e-3) -> float:
    """Max error of the analytic gradient vs central finite differences.

    Errors are measured relative to the gradient's largest magnitude
    (floored at 1e-8), so near-zero entries are not drowned by the
    O(step^2) truncation noise of the differences themselves.
    """
    grad = region_smooth_loss_grad(logits, regions)
    fd = np.zeros_like(grad)
    flat = logits.astype(np.float64).ravel()
    for i in range(flat.size):
        for sign in (+1, -1):
            probe = flat.copy()
            probe[i] += sign * step
            value = region_smooth_loss(probe.reshape(logits.shape), regions).loss
            fd.ravel()[i] += sign * value / (2 * step)
    scale = max(float(np.abs(grad).max()), 1e-8)
    return float(np.max(np.abs(grad - fd)) / scale)


def run_grad_check(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    rng = SplitMix64(cfg["seed"])
    worst = 0.0
    for _ in range(cfg["instances"]):
        logits, ids = _random_instance(rng)
        worst = max(worst, fd_max_rel_error(logits, ids, cfg["step"]))
    ok = worst <= cfg["tol"]
    path = out / "grad_check.txt"
    write_report(path, [
        ("instances", cfg["instances"]),
        ("step", cfg["step"]),
        ("max_rel_error", worst),
        ("tolerance", cfg["tol"]),
        ("pass", str(ok).lower()),
    ])
    emit("max_rel_error", worst)
    emit("pass", str(ok).lower())
    if not ok:
        raise SitsKitError(f"gradient check failed: max_rel_error={worst:.3e}")
    return [path]


def run_metrics(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    pred = load_tensor(cfg["pred"])
    truth = load_tensor(cfg["truth"])
    cm = ConfusionMatrix(cfg["classes"], ignore_id=cfg.get("ignore_class"))
    cm.accumulate(pred, truth)
    per_class, miou = cm.miou()
    oa = cm.overall_accuracy()

    paths = [out / "metrics_report.txt"]
    rows = [(f"iou_class_{k}", "nan" if np.isnan(v) else float(v))
            for k, v in enumerate(per_class)]
    write_report(paths[0], rows + [("miou", miou), ("oa", oa), ("evaluated", cm.total)])
    if cfg.get("csv"):
        paths.append(out / "metrics.csv")
        with open(paths[-1], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["class", "iou"])
            for k, v in enumerate(per_class):
                writer.writerow([k, "" if np.isnan(v) else f"{v:.6f}"])
    emit("miou", miou)
    emit("oa", oa)
    return paths


def _demo_setup(cfg: dict):
    from .fewshot import AugmentSpec, spatial_crop, temporal_dropout
    from .regions import region_map_from_labels
    from .rng import SplitMix64

    sample = synth_sits(cfg["seed"], cfg["t"], cfg["c"], cfg["h"], cfg["w"], cfg["k"])
    lo, hi = (float(v) for v in str(cfg["tdrop"]).split(","))
    crop = min(int(cfg["crop"]), cfg["h"], cfg["w"])  # demo data is self-generated
    spec = AugmentSpec(crop=crop, temporal_drop_range=(lo, hi), seed=cfg["seed"])
    rng = SplitMix64(cfg["seed"])
    cube, kept = temporal_dropout(sample.cube, spec, rng)
    cube, labels, (oy, ox) = spatial_crop(cube, sample.labels, spec, rng)
    window = np.s_[oy:oy + spec.crop, ox:ox + spec.crop]
    regions = region_map_from_labels(sample.regions.labels[window])
    emit("kept_frames", len(kept))

    norm = ChannelNormalizer().fit([cube])
    feats = featurize(norm.transform(cube))
    split = sample_split(cfg["ratio"], cfg["seed"], spec.crop * spec.crop)
    return labels, regions, feats, split


def run_demo_train(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    labels, regions, feats, split = _demo_setup(cfg)
    q = regions.num_regions

    if cfg.get("sweep"):
        if cfg.get("sweep_lambdas"):
            weights = [float(v) for v in str(cfg["sweep_lambdas"]).split(",")]
        else:
            weights = [0.0, q / 5.0, float(q), 5.0 * q]
        path = out / "sweep.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "seg_loss", "region_loss", "total",
                             "train_miou", "test_miou"])
            for weight in weights:
                model = RegionSmoothClassifier(
                    weight=weight, lr=cfg["lr"], epochs=cfg["epochs"], seed=cfg["seed"])
                model.fit(feats, labels, regions, split.selected, num_classes=cfg["k"])
                last = model.history_[-1]
                writer.writerow([weight, f"{last.seg_loss:.8g}", f"{last.region_loss:.8g}",
                                 f"{last.total:.8g}", f"{last.train_miou:.6f}",
                                 f"{last.test_miou:.6f}"])
        emit("rows", len(weights))
        return [path]

    weight = cfg["weight"] if cfg.get("weight") is not None else float(q)
    model = RegionSmoothClassifier(weight=weight, lr=cfg["lr"], epochs=cfg["epochs"],
                                   seed=cfg["seed"])
    model.fit(feats, labels, regions, split.selected, num_classes=cfg["k"])
    path = out / "history.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "seg_loss", "region_loss", "total",
                         "train_miou", "test_miou"])
        for rec in model.history_:
            writer.writerow([rec.epoch, f"{rec.seg_loss:.8g}", f"{rec.region_loss:.8g}",
                             f"{rec.total:.8g}", f"{rec.train_miou:.6f}",
                             f"{rec.test_miou:.6f}"])
    last = model.history_[-1]
    emit("lambda", weight)
    emit("final_test_miou", last.test_miou)
    return [path]


def run_bench(cfg: dict) -> list:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    sizes = [int(v) for v in str(cfg["sizes"]).split(",")]
    region_counts = [int(v) for v in str(cfg["regions"]).split(",")]
    rng = SplitMix64(cfg["seed"])
    path = out / "bench.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "w", "q", "repeats", "median_s", "p95_s", "mpix_per_s"])
        for size in sizes:
            for q in region_counts:
                logits = rng.normal_array(5 * size * size, 2.0).reshape(1, 5, size, size)
                ids = (rng.u64_array(size * size).astype(np.int64) % q)
                ids = ids.reshape(1, size, size).astype(np.int32)
                times = []
                for _ in range(cfg["repeats"]):
                    t0 = time.perf_counter()
                    region_smooth_loss(logits, ids)
                    region_smooth_loss_grad(logits, ids)
                    times.append(time.perf_counter() - t0)
                median = float(np.median(times))
                p95 = float(np.percentile(times, 95))
                writer.writerow([size, size, q, cfg["repeats"], f"{median:.6g}",
                                 f"{p95:.6g}", f"{size * size / median / 1e6:.6g}"])
    emit("configurations", len(sizes) * len(region_counts))
    return [path]


RUNNERS = {
    "synth": run_synth,
    "split": run_split,
    "prior-gen": run_prior_gen,
    "composite": run_composite,
    "loss": run_loss,
    "grad-check": run_grad_check,
    "metrics": run_metrics,
    "demo-train": run_demo_train,
    "bench": run_bench,
}


# ---------------------------------------------------------------------------
# click wiring

def dispatch(ctx: click.Context, command: str, config: str | None, needs_seed: bool) -> None:
    cfg = resolve_params(ctx, config)
    if needs_seed:
        ensure_seed(cfg)
    started = time.perf_counter()
    try:
        outputs = RUNNERS[command](cfg)
        inputs = [cfg[key] for key in ("input", "logits", "regions", "labels",
                                       "pred", "truth", "masks") if cfg.get(key)]
        finish_run(command, cfg, inputs, outputs, started)
    except (SitsKitError, OSError) as exc:
        kind = type(exc).__name__
        click.echo(f'error: command={command} type={kind} msg="{exc}"', err=True)
        sys.exit(1)


@click.group()
@click.version_option(__version__)
def main():
    """Satellite time-series toolkit: composites, region priors, losses, metrics."""


config_option = click.option("--config", type=click.Path(exists=True), default=None,
                             help="key=value file; flags still win")
out_option = click.option("--out", type=click.Path(), default=".", help="output directory")
seed_option = click.option("--seed", type=int, default=None,
                           help="RNG seed; generated and recorded when omitted")
DEFAULT_BAND_MAP_TEXT = ",".join(f"{k.lower()}={v}" for k, v in DEFAULT_BAND_MAP.items())
band_map_option = click.option("--band-map", "band_map", default=DEFAULT_BAND_MAP_TEXT,
                               show_default=True, help="semantic band to channel index")
scale_option = click.option("--scale", type=float, default=10000.0,
                            help="reflectance divisor for raw digital numbers")


@main.command()
@click.option("--t", type=int, default=12, help="frames")
@click.option("--c", type=int, default=5, help="channels")
@click.option("--h", type=int, default=64)
@click.option("--w", type=int, default=64)
@click.option("--k", type=int, default=5, help="classes")
@click.option("--noise", type=float, default=0.05)
@click.option("--cloud-rate", type=float, default=0.25)
@seed_option
@out_option
@config_option
@click.pass_context
def synth(ctx, **_):
    """Generate a synthetic labeled time series with cloud blobs."""
    dispatch(ctx, "synth", ctx.params["config"], needs_seed=True)


@main.command()
@click.option("--ratio", type=float, required=True)
@click.option("--population", type=int, default=0)
@click.option("--labels", type=click.Path(exists=True), default=None,
              help="class image (STSR); switches to per-class stratified sampling")
@seed_option
@out_option
@config_option
@click.pass_context
def split(ctx, **_):
    """Sample a deterministic labeled subset, one index per line."""
    dispatch(ctx, "split", ctx.params["config"], needs_seed=True)


@main.command("prior-gen")
@click.option("--input", "input", type=click.Path(exists=True), required=True,
              help="STSR cube, f32 reflectance or u16 digital numbers [T,C,H,W]")
@click.option("--id", "id", type=int, default=0, help="sample id used in file names")
@click.option("--masks", type=click.Path(exists=True), default=None,
              help="external mask stack (STSR u8 [Q,H,W]); fallback regions when absent")
@click.option("--grid", type=int, default=8, help="fallback region cell size")
@click.option("--stretch", type=click.Choice(["percentile", "minmax", "off"]),
              default="percentile")
@click.option("--uint8", is_flag=True, help="also write the fused RGB as u8")
@band_map_option
@scale_option
@out_option
@config_option
@click.pass_context
def prior_gen(ctx, **_):
    """Cloud screening, RGB fusion, and a region prior for one cube."""
    dispatch(ctx, "prior-gen", ctx.params["config"], needs_seed=False)


@main.command()
@click.option("--input", "input", type=click.Path(exists=True), required=True)
@click.option("--method", type=click.Choice(["fused", "mean", "median"]), default="fused")
@click.option("--frames", default=None, help="comma-separated frame indices; default clear set")
@click.option("--stretch", type=click.Choice(["percentile", "minmax", "off"]),
              default="percentile")
@band_map_option
@scale_option
@out_option
@config_option
@click.pass_context
def composite(ctx, **_):
    """Cloud-aware composite of a cube (mean, median, or fused RGB)."""
    dispatch(ctx, "composite", ctx.params["config"], needs_seed=False)


@main.command()
@click.option("--logits", type=click.Path(exists=True), required=True,
              help="STSR f32 [B,K,H,W]")
@click.option("--regions", type=click.Path(exists=True), required=True,
              help="STSR i32 [H,W] or [B,H,W]")
@click.option("--labels", type=click.Path(exists=True), default=None)
@click.option("--lambda", "weight", type=float, default=DEFAULT_LAMBDA)
@click.option("--ignore-class", type=int, default=None)
@click.option("--population-var", is_flag=True, help="use the n divisor instead of n-1")
@click.option("--grad-out", type=click.Path(), default=None,
              help="write the analytic gradient as STSR f32")
@out_option
@config_option
@click.pass_context
def loss(ctx, **_):
    """Evaluate the region-variance loss (and optional CE) on stored tensors."""
    dispatch(ctx, "loss", ctx.params["config"], needs_seed=False)


@main.command("grad-check")
@click.option("--instances", type=int, default=20)
@click.option("--step", type=float, default=1e-3)
@click.option("--tol", type=float, default=1e-4)
@seed_option
@out_option
@config_option
@click.pass_context
def grad_check(ctx, **_):
    """Finite-difference check of the analytic loss gradient."""
    dispatch(ctx, "grad-check", ctx.params["config"], needs_seed=True)


@main.command()
@click.option("--pred", type=click.Path(exists=True), required=True)
@click.option("--truth", type=click.Path(exists=True), required=True)
@click.option("--classes", type=int, required=True)
@click.option("--ignore-class", type=int, default=None)
@click.option("--csv", is_flag=True, help="also write a per-class CSV")
@out_option
@config_option
@click.pass_context
def metrics(ctx, **_):
    """Per-class IoU, mIoU, and overall accuracy of a stored prediction."""
    dispatch(ctx, "metrics", ctx.params["config"], needs_seed=False)


@main.command("demo-train")
@click.option("--ratio", type=float, default=0.01, help="labeled pixel fraction")
@click.option("--lambda", "weight", type=float, default=None,
              help="regularizer strength; default = prior region count")
@click.option("--epochs", type=int, default=200)
@click.option("--lr", type=float, default=0.1)
@click.option("--t", type=int, default=12)
@click.option("--c", type=int, default=5)
@click.option("--h", type=int, default=64)
@click.option("--w", type=int, default=64)
@click.option("--k", type=int, default=5)
@click.option("--crop", type=int, default=64, help="training crop size")
@click.option("--tdrop", default="0.1,0.3", help="temporal dropout rate range lo,hi")
@click.option("--sweep", is_flag=True,
              help="train at lambda in {0, Q/5, Q, 5Q}; one CSV row per lambda")
@click.option("--sweep-lambdas", default=None,
              help="comma-separated lambda values overriding the Q-relative sweep grid")
@seed_option
@out_option
@config_option
@click.pass_context
def demo_train(ctx, **_):
    """Train the toy classifier on augmented synthetic data; emits a history CSV."""
    dispatch(ctx, "demo-train", ctx.params["config"], needs_seed=True)


@main.command()
@click.option("--sizes", default="64,128,256")
@click.option("--regions", default="30,100,300")
@click.option("--repeats", type=int, default=5)
@seed_option
@out_option
@config_option
@click.pass_context
def bench(ctx, **_):
    """Time the loss forward+gradient across sizes and region counts."""
    dispatch(ctx, "bench", ctx.params["config"], needs_seed=True)


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True, help="fresh output directory")
def replay(manifest_path, out):
    """Re-run a recorded manifest; outputs are bit-identical to the original."""
    manifest = read_manifest(manifest_path)
    cfg = dict(manifest.config)
    cfg["out"] = out
    started = time.perf_counter()
    try:
        outputs = RUNNERS[manifest.command](cfg)
        finish_run(manifest.command, cfg, manifest.inputs, outputs, started)
    except (SitsKitError, OSError) as exc:
        click.echo(f'error: command=replay type={type(exc).__name__} msg="{exc}"', err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
