"""Disparity evaluation metrics and report aggregation.

EPE is the mean absolute disparity error over jointly valid pixels; bad-tau
is the percentage of those pixels whose error strictly exceeds tau (the
KITTI D1-all number is bad-3 under this definition).  The official KITTI
devkit additionally requires the error to exceed 5% of the true disparity;
that compound rule is available as :func:`d1_official`.

Reports carry both pixel-weighted and sample-averaged aggregates because
published numbers are inconsistent about which they use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DisparityMap


@dataclass
class MetricSpec:
    epe: bool = True
    bad_thresholds: tuple[float, ...] = (3.0,)
    mask: str = "all"  # all | noc (where occlusion masks exist)

    def __post_init__(self) -> None:
        if any(t <= 0 for t in self.bad_thresholds):
            raise ValueError("bad thresholds must be > 0")
        if self.mask not in ("all", "noc"):
            raise ValueError(f"unknown mask mode {self.mask!r}")


# Per-dataset evaluation conventions.
DATASET_METRICS = {
    "sceneflow": MetricSpec(bad_thresholds=()),
    "kitti2012": MetricSpec(bad_thresholds=(3.0,)),
    "kitti2015": MetricSpec(bad_thresholds=(3.0,)),
    "middlebury": MetricSpec(bad_thresholds=(2.0,)),
    "eth3d": MetricSpec(bad_thresholds=(1.0,)),
    "synthetic": MetricSpec(bad_thresholds=(3.0,)),
}


def default_metric_spec(dataset: str) -> MetricSpec:
    try:
        return DATASET_METRICS[dataset]
    except KeyError:
        raise ValueError(f"no metric convention for dataset {dataset!r}") from None


def _joint_valid(est: DisparityMap, gt: DisparityMap, extra_mask=None) -> np.ndarray:
    if est.negative_disparity:
        raise ValueError("flipped (negative-disparity) maps are not evaluable")
    if est.values.shape != gt.values.shape:
        raise ValueError(
            f"shape mismatch: est {est.values.shape} vs gt {gt.values.shape}"
        )
    mask = gt.valid & est.valid
    if extra_mask is not None:
        mask = mask & extra_mask
    if not mask.any():
        raise ValueError("no jointly valid pixels to evaluate")
    return mask


def epe(est: DisparityMap, gt: DisparityMap, extra_mask=None) -> float:
    """Mean absolute error in pixels over jointly valid pixels."""
    mask = _joint_valid(est, gt, extra_mask)
    err = np.abs(est.values.astype(np.float64) - gt.values.astype(np.float64))
    return float(err[mask].mean())


def bad_tau(est: DisparityMap, gt: DisparityMap, tau: float, extra_mask=None) -> float:
    """Percentage of jointly valid pixels with error strictly greater than tau."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    mask = _joint_valid(est, gt, extra_mask)
    err = np.abs(est.values.astype(np.float64) - gt.values.astype(np.float64))
    return float(100.0 * (err[mask] > tau).mean())


def d1_official(est: DisparityMap, gt: DisparityMap, extra_mask=None) -> float:
    """KITTI devkit compound rule: error > 3 px AND > 5% of the true value."""
    mask = _joint_valid(est, gt, extra_mask)
    err = np.abs(est.values.astype(np.float64) - gt.values.astype(np.float64))[mask]
    ref = np.abs(gt.values.astype(np.float64))[mask]
    return float(100.0 * ((err > 3.0) & (err > 0.05 * ref)).mean())


@dataclass
class ReportRow:
    id: str
    valid_pixels: int
    epe: float | None
    bad: dict[float, float] = field(default_factory=dict)


@dataclass
class EvalReport:
    rows: list[ReportRow]
    pixel_weighted: dict[str, float]
    sample_mean: dict[str, float]


def evaluate_sample(
    est: DisparityMap,
    gt: DisparityMap,
    spec: MetricSpec,
    sample_id: str = "",
    extra_mask=None,
) -> ReportRow:
    """All requested metrics over one shared valid set."""
    mask = _joint_valid(est, gt, extra_mask)
    row = ReportRow(id=sample_id, valid_pixels=int(mask.sum()), epe=None)
    if spec.epe:
        row.epe = epe(est, gt, extra_mask)
    for tau in spec.bad_thresholds:
        row.bad[tau] = bad_tau(est, gt, tau, extra_mask)
    return row


def metric_names(spec: MetricSpec) -> list[str]:
    names = ["epe"] if spec.epe else []
    names += [f"bad_{tau:g}" for tau in spec.bad_thresholds]
    return names


def aggregate(rows: list[ReportRow]) -> EvalReport:
    """Pixel-weighted (sum metric*count / sum count) and sample-mean aggregates."""
    if not rows:
        raise ValueError("cannot aggregate an empty row list")
    metrics: dict[str, list[tuple[float, int]]] = {}
    for row in rows:
        if row.epe is not None:
            metrics.setdefault("epe", []).append((row.epe, row.valid_pixels))
        for tau, value in row.bad.items():
            metrics.setdefault(f"bad_{tau:g}", []).append((value, row.valid_pixels))
    pixel_weighted = {}
    sample_mean = {}
    for name, pairs in metrics.items():
        total = sum(count for _, count in pairs)
        pixel_weighted[name] = sum(v * c for v, c in pairs) / total
        sample_mean[name] = sum(v for v, _ in pairs) / len(pairs)
    return EvalReport(rows=list(rows), pixel_weighted=pixel_weighted, sample_mean=sample_mean)
