"""Toolkit for few-shot parcel segmentation over satellite image time series.

Pieces: a portable binary tensor container (STSR), spectral cloud screening
and clear-frame selection, cloud-free composites and sharpness-weighted RGB
fusion, region priors from mask stacks or a built-in fallback, the
region-variance consistency loss with an analytic gradient, segmentation
metrics, few-shot data machinery, and a toy trainer that exercises the full
objective end to end. Everything runs deterministically on a CPU.
"""

from .clouds import FrameQuality, cloud_mask, cloud_masks, frame_quality, select_clear_frames
from .composite import FusedRgb, composite_mean, composite_median, fuse_rgb, to_uint8
from .cube import DEFAULT_BAND_MAP, SitsCube, true_color
from .errors import (
    ConfigurationError,
    CorruptionError,
    FormatError,
    MetricUndefinedError,
    SitsKitError,
    TrainingError,
    ValidationError,
)
from .fewshot import (
    AugmentSpec,
    ChannelNormalizer,
    SplitSpec,
    SynthSample,
    sample_split,
    sample_split_stratified,
    spatial_crop,
    synth_sits,
    temporal_dropout,
)
from .loss import (
    LossReport,
    RegionLossResult,
    pixel_ce_loss,
    pixel_ce_loss_grad,
    region_smooth_loss,
    region_smooth_loss_and_grad,
    region_smooth_loss_grad,
    sigmoid,
    total_loss,
)
from .metrics import ConfusionMatrix
from .regions import (
    RegionMap,
    RegionPixels,
    build_region_map,
    fallback_regions,
    region_index,
    region_map_from_labels,
    resize_nearest,
)
from .rng import SplitMix64, derive_seed
from .stsr import load_tensor, save_tensor
from .trainer import EpochRecord, RegionSmoothClassifier, featurize

__version__ = "0.1.0"
