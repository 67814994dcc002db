"""stereobench: classical stereo matching pipeline and evaluation harness."""

from .aggregation import SgmConfig, box_aggregate, reduce_groups, sgm_aggregate
from .augment import AugmentConfig, compose, hflip, hsflip, random_crop, vflip
from .core import (CapacityError, CostVolume, DisparityMap, FeatureMap, Image,
                   allocate_volume, volume_slice)
from .cost_volume import (CostConfig, build, build_combined, build_concat,
                          build_correlation, build_difference, build_groupwise)
from .datasets import DatasetManifest, StereoSample, build_manifest, load_sample
from .disparity import (RegressionConfig, parabola_subpixel, soft_argmin,
                        upsample_disparity, wta)
from .features import FeatureConfig, census, downsample, extract, intensity_gradient, normalize
from .kitti_png import read_kitti_disparity_png, write_kitti_disparity_png
from .metrics import MetricSpec, aggregate, bad_tau, epe, evaluate_sample
from .pfm import read_pfm, write_pfm
from .pipeline import PipelineConfig, compute_disparity
from .refine import RefineConfig, fill_holes, lr_check, median_filter
from .synthetic import constant_shift_pair, make_stereogram

__version__ = "0.1.0"
