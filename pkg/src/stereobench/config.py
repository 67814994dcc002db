"""YAML run-configuration: schema validation, default materialization, echo.

Unknown keys are hard errors naming the offending path (the anti-typo rule),
and every stage config is constructed and validated up front, before any
image is processed.  The fully resolved config (defaults included) is echoed
into the output directory so a run is reproducible from its artifacts alone:
``parse(echo(parse(f)))`` equals ``parse(f)``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import yaml

from .aggregation import SgmConfig
from .augment import AUGMENT_OPS
from .cost_volume import CostConfig
from .datasets import DATASETS
from .disparity import RegressionConfig
from .features import FeatureConfig
from .metrics import MetricSpec, default_metric_spec
from .pipeline import PipelineConfig
from .refine import RefineConfig


class ConfigError(ValueError):
    """Schema violation, reported with the dotted path to the field."""


DEFAULTS: dict = {
    "data": {
        "dataset": "synthetic",
        "root": None,
        "split": "train",
        "variant": None,  # sceneflow pass (mandatory) / middlebury resolution
        "synthetic": {
            "count": 2,
            "height": 128,
            "width": 160,
            "max_disparity": 24,
            "boxes": 4,
            "channels": 1,
            "texture": "dots",
        },
    },
    "augment": [],
    "pipeline": {
        "feature": {
            "kind": "census",
            "window": 5,
            "channels": 16,
            "scale": 4,
            "normalize_input": False,
            "mean": [0.485, 0.456, 0.406],
            "std": [0.229, 0.224, 0.225],
        },
        "cost": {
            "kind": "gwc",
            "max_disparity": 48,
            "groups": 8,
            "cat_channels": 16,
            "out_of_range": "zero_fill",
        },
        "aggregate": {
            "box_radius": 0,
            "sgm": {"enabled": True, "p1": 1.0, "p2": 4.0, "paths": 8},
        },
        "regress": {"kind": "wta_parabola", "temperature": 1.0, "upsample_to_full": True},
        "refine": {"lr_check": True, "lr_threshold": 1.0, "median_radius": 1, "fill": "none"},
    },
    "eval": {"epe": True, "bad_thresholds": None, "mask": "all"},
    "output": {
        "dir": "stereobench_out",
        "formats": ["csv", "md"],
        "save_disparity": False,
        "save_visualization": False,
        "colormap_max": 64.0,
    },
    "cross_domain": {"targets": []},
    "seed": 0,
    "threads": 1,
}

_AUGMENT_OP_KEYS = {
    "random_crop": {"height", "width"},
    "hflip": {"prob"},
    "vflip": {"prob"},
    "hsflip": {"prob"},
    "color": {"brightness", "contrast", "gamma", "asymmetric"},
    "erase": {"prob", "max_boxes", "size_range"},
    "scale": {"min_factor", "max_factor", "prob"},
}

_TARGET_KEYS = {"dataset", "root", "split", "variant"}


def _merge(defaults, user, path: str):
    if isinstance(defaults, dict):
        if not isinstance(user, dict):
            raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(user).__name__}")
        out = {}
        for key, default_value in defaults.items():
            if key in user:
                out[key] = _merge(default_value, user[key], f"{path}.{key}" if path else key)
            else:
                out[key] = copy.deepcopy(default_value)
        for key in user:
            if key not in defaults:
                raise ConfigError(f"{path + '.' if path else ''}{key}: unknown key")
        return out
    return copy.deepcopy(user)


def _check_augment_entries(entries, path="augment"):
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: expected a list of op entries")
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "op" not in entry:
            raise ConfigError(f"{path}[{i}]: each entry needs an 'op' key")
        op = entry["op"]
        if op not in AUGMENT_OPS:
            raise ConfigError(f"{path}[{i}].op: unknown op {op!r}")
        allowed = _AUGMENT_OP_KEYS[op]
        for key in entry:
            if key != "op" and key not in allowed:
                raise ConfigError(f"{path}[{i}].{key}: unknown key for op {op!r}")


def _check_targets(targets, path="cross_domain.targets"):
    if not isinstance(targets, list):
        raise ConfigError(f"{path}: expected a list")
    for i, entry in enumerate(targets):
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}[{i}]: expected a mapping")
        for key in entry:
            if key not in _TARGET_KEYS:
                raise ConfigError(f"{path}[{i}].{key}: unknown key")
        dataset = str(entry.get("dataset", "")).lower()
        if dataset not in DATASETS:
            raise ConfigError(f"{path}[{i}].dataset: unknown dataset {entry.get('dataset')!r}")
        if dataset == "middlebury":
            variant = entry.get("variant", "half") or "half"
            if variant != "half":
                raise ConfigError(
                    f"{path}[{i}].variant: the cross-domain protocol fixes "
                    f"middlebury at half resolution"
                )


@dataclass
class RunConfig:
    resolved: dict
    pipeline: PipelineConfig
    metric_spec: MetricSpec

    @property
    def data(self) -> dict:
        return self.resolved["data"]

    @property
    def output(self) -> dict:
        return self.resolved["output"]

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def threads(self) -> int:
        return int(self.resolved["threads"])

    @property
    def augment_pipeline(self) -> list[dict]:
        return self.resolved["augment"]

    @property
    def cross_domain_targets(self) -> list[dict]:
        return self.resolved["cross_domain"]["targets"]


def _build_pipeline(tree: dict) -> PipelineConfig:
    feat = tree["feature"]
    try:
        feature = FeatureConfig(
            kind=feat["kind"], window=int(feat["window"]), channels=int(feat["channels"]),
            scale=int(feat["scale"]), normalize_input=bool(feat["normalize_input"]),
            mean=tuple(float(v) for v in feat["mean"]),
            std=tuple(float(v) for v in feat["std"]),
        )
        c = tree["cost"]
        cost = CostConfig(
            kind=c["kind"], max_disparity=int(c["max_disparity"]), groups=int(c["groups"]),
            cat_channels=int(c["cat_channels"]), out_of_range=c["out_of_range"],
        )
        agg = tree["aggregate"]
        sgm = None
        if agg["sgm"]["enabled"]:
            sgm = SgmConfig(p1=float(agg["sgm"]["p1"]), p2=float(agg["sgm"]["p2"]),
                            paths=int(agg["sgm"]["paths"]))
        r = tree["regress"]
        regress = RegressionConfig(kind=r["kind"], temperature=float(r["temperature"]),
                                   upsample_to_full=bool(r["upsample_to_full"]))
        rf = tree["refine"]
        refine = RefineConfig(lr_check=bool(rf["lr_check"]),
                              lr_threshold=float(rf["lr_threshold"]),
                              median_radius=int(rf["median_radius"]), fill=rf["fill"])
    except ValueError as exc:
        raise ConfigError(f"pipeline: {exc}") from exc
    box_radius = int(agg["box_radius"])
    if box_radius < 0:
        raise ConfigError("pipeline.aggregate.box_radius: must be >= 0")
    return PipelineConfig(feature=feature, cost=cost, box_radius=box_radius,
                          sgm=sgm, regress=regress, refine=refine)


def _build_metric_spec(tree: dict, dataset: str) -> MetricSpec:
    thresholds = tree["bad_thresholds"]
    if thresholds is None:
        spec = default_metric_spec(dataset)
        thresholds = spec.bad_thresholds
    try:
        return MetricSpec(epe=bool(tree["epe"]),
                          bad_thresholds=tuple(float(t) for t in thresholds),
                          mask=tree["mask"])
    except ValueError as exc:
        raise ConfigError(f"eval: {exc}") from exc


def parse_config_dict(user: dict) -> RunConfig:
    """Validate a config tree against the schema and materialize defaults."""
    resolved = _merge(DEFAULTS, user or {}, "")
    _check_augment_entries(resolved["augment"])
    _check_targets(resolved["cross_domain"]["targets"])
    dataset = str(resolved["data"]["dataset"]).lower()
    if dataset != "synthetic" and dataset not in DATASETS:
        raise ConfigError(f"data.dataset: unknown dataset {resolved['data']['dataset']!r}")
    resolved["data"]["dataset"] = dataset
    if resolved["data"]["split"] not in ("train", "test"):
        raise ConfigError(f"data.split: must be train or test")
    pipeline = _build_pipeline(resolved["pipeline"])
    metric_spec = _build_metric_spec(resolved["eval"], dataset)
    return RunConfig(resolved=resolved, pipeline=pipeline, metric_spec=metric_spec)


def parse_config(path: str | Path) -> RunConfig:
    """Load and validate a YAML config file."""
    path = Path(path)
    try:
        user = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config_dict(user)


def echo_config(cfg: RunConfig) -> str:
    """Fully resolved config as canonical YAML (all defaults materialized)."""
    return yaml.safe_dump(cfg.resolved, sort_keys=True, default_flow_style=False)
