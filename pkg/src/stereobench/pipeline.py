"""End-to-end matcher: features -> cost volume -> aggregation -> regression
-> refinement, at full output resolution.

The right-view disparity needed by the consistency check comes from running
the same matcher with the views swapped and mirrored, which turns
right-to-left matching back into the canonical left-to-right form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregation import SgmConfig, box_aggregate, reduce_groups, sgm_aggregate
from .core import DisparityMap, Image
from .cost_volume import CostConfig, build
from .disparity import RegressionConfig, regress, upsample_disparity
from .features import FeatureConfig, extract
from .refine import RefineConfig, refine


@dataclass
class PipelineConfig:
    feature: FeatureConfig = field(default_factory=FeatureConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    box_radius: int = 0
    sgm: SgmConfig | None = field(default_factory=SgmConfig)
    regress: RegressionConfig = field(default_factory=RegressionConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)


def _mirror(img: Image) -> Image:
    return Image(img.data[:, ::-1].copy(), value_range=img.value_range)


def match_one_view(left: Image, right: Image, cfg: PipelineConfig) -> DisparityMap:
    """Raw matcher output for the left view, upsampled to image resolution."""
    f_l = extract(left, cfg.feature)
    f_r = extract(right, cfg.feature)
    volume = build(f_l, f_r, cfg.cost)
    if volume.groups > 1 or volume.group_kind != "plain":
        volume = reduce_groups(volume)
    if cfg.box_radius > 0:
        volume = box_aggregate(volume, cfg.box_radius)
    if cfg.sgm is not None:
        volume = sgm_aggregate(volume, cfg.sgm)
    d = regress(volume, cfg.regress)
    if cfg.regress.upsample_to_full and cfg.feature.scale > 1:
        d = upsample_disparity(d, cfg.feature.scale, target_hw=(left.height, left.width))
    return d


def compute_disparity(left: Image, right: Image, cfg: PipelineConfig) -> DisparityMap:
    """Full pipeline including refinement for one stereo pair."""
    d_left = match_one_view(left, right, cfg)
    d_right = None
    if cfg.refine.lr_check:
        mirrored = match_one_view(_mirror(right), _mirror(left), cfg)
        d_right = DisparityMap(
            mirrored.values[:, ::-1].copy(), mirrored.valid[:, ::-1].copy()
        )
    return refine(d_left, d_right, cfg.refine)
