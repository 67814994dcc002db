"""Stereo-aware augmentations with exact disparity transforms.

Geometry ops move images, disparities and masks together so the warp
relation left(y, x) = right(y, x - d) survives; photometric ops never touch
geometry.  Every random op draws its parameters from an rng derived from
(seed, sample id) and logs them, so a composition is replayable and
parallel application is order-independent.

Op catalogue (composition order is whatever the pipeline lists):
  random_crop   identical window on every plane, values unchanged
  hflip         both views and the disparity mirrored; d -> -d, output is
                flagged non-evaluable (violates the d in [0, D) convention)
  hsflip        mirror both views and swap them; needs genuine right-view
                ground truth (warping left GT would invent occluded values)
  vflip         rows reversed everywhere, values unchanged
  color         photometric jitter, optionally asymmetric between views
  erase         rectangles on the right view filled with its mean color
  scale         resample everything; disparity values scale with x
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import cv2
import numpy as np

from .core import DisparityMap, Image
from .datasets import StereoSample


@dataclass
class ColorParams:
    brightness: float = 0.2  # multiplicative factor drawn from 1 +- brightness
    contrast: float = 0.2
    gamma: tuple[float, float] = (0.8, 1.2)
    asymmetric: bool = True


@dataclass
class EraseParams:
    prob: float = 0.5
    max_boxes: int = 2
    size_range: tuple[int, int] = (40, 100)


@dataclass
class ScaleParams:
    min_factor: float = 0.9
    max_factor: float = 1.1
    prob: float = 1.0


@dataclass
class AugmentConfig:
    crop: tuple[int, int] | None = None  # (height, width)
    hflip_prob: float = 0.0
    vflip_prob: float = 0.0
    hsflip_prob: float = 0.0
    color: ColorParams | None = None
    erase: EraseParams | None = None
    scale: ScaleParams | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("hflip_prob", "vflip_prob", "hsflip_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.scale is not None and (self.scale.min_factor <= 0 or self.scale.max_factor <= 0):
            raise ValueError("scale factors must be > 0")
        if self.erase is not None and not 0.0 <= self.erase.prob <= 1.0:
            raise ValueError("erase prob must lie in [0, 1]")


@dataclass
class AugmentedSample(StereoSample):
    applied_ops: list = field(default_factory=list)


def sample_rng(seed: int, sample_id: str) -> np.random.Generator:
    """Per-sample generator; parallel augmentation stays order-independent."""
    return np.random.default_rng(
        np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(sample_id.encode())])
    )


def _clone(sample: StereoSample, **updates) -> StereoSample:
    fields = dict(
        left=sample.left, right=sample.right, id=sample.id, dataset=sample.dataset,
        disparity_left=sample.disparity_left, disparity_right=sample.disparity_right,
        disparity_left_noc=sample.disparity_left_noc, noc_mask=sample.noc_mask,
    )
    fields.update(updates)
    return StereoSample(**fields)


def crop_window(sample: StereoSample, y0: int, x0: int, h: int, w: int) -> StereoSample:
    """Deterministic core of random_crop: one window for every plane."""
    if y0 < 0 or x0 < 0 or y0 + h > sample.left.height or x0 + w > sample.left.width:
        raise ValueError("crop window outside the image")

    def crop_img(img: Image) -> Image:
        return Image(img.data[y0 : y0 + h, x0 : x0 + w].copy(), value_range=img.value_range)

    def crop_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        return DisparityMap(d.values[y0 : y0 + h, x0 : x0 + w].copy(),
                            d.valid[y0 : y0 + h, x0 : x0 + w].copy(),
                            negative_disparity=d.negative_disparity)

    return _clone(
        sample,
        left=crop_img(sample.left), right=crop_img(sample.right),
        disparity_left=crop_disp(sample.disparity_left),
        disparity_right=crop_disp(sample.disparity_right),
        disparity_left_noc=crop_disp(sample.disparity_left_noc),
        noc_mask=None if sample.noc_mask is None
        else sample.noc_mask[y0 : y0 + h, x0 : x0 + w].copy(),
    )


def random_crop(sample: StereoSample, h: int, w: int, rng: np.random.Generator) -> StereoSample:
    if h > sample.left.height or w > sample.left.width:
        raise ValueError(
            f"crop {h}x{w} larger than image {sample.left.height}x{sample.left.width}"
        )
    y0 = int(rng.integers(0, sample.left.height - h + 1))
    x0 = int(rng.integers(0, sample.left.width - w + 1))
    return crop_window(sample, y0, x0, h, w)


def _mirror_img(img: Image) -> Image:
    return Image(img.data[:, ::-1].copy(), value_range=img.value_range)


def hflip(sample: StereoSample) -> StereoSample:
    """Mirror both views and the disparity on x; d'(y,x) = -d(y, W-1-x).

    The result carries negative disparities, valid for training-style
    consumers only; metric evaluation rejects it.
    """

    def flip_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        return DisparityMap(-d.values[:, ::-1], d.valid[:, ::-1].copy(),
                            negative_disparity=not d.negative_disparity)

    return _clone(
        sample,
        left=_mirror_img(sample.left), right=_mirror_img(sample.right),
        disparity_left=flip_disp(sample.disparity_left),
        disparity_right=flip_disp(sample.disparity_right),
        disparity_left_noc=flip_disp(sample.disparity_left_noc),
        noc_mask=None if sample.noc_mask is None else sample.noc_mask[:, ::-1].copy(),
    )


def hsflip(sample: StereoSample) -> StereoSample:
    """Mirror both views, then swap them; disparities stay positive.

    Needs genuine right-view ground truth: warping the left GT would invent
    values in occlusions, so its absence is an error.
    """
    if sample.disparity_right is None:
        raise ValueError("hsflip requires right-view ground truth")

    def mirror_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        return DisparityMap(d.values[:, ::-1].copy(), d.valid[:, ::-1].copy(),
                            negative_disparity=d.negative_disparity)

    return _clone(
        sample,
        left=_mirror_img(sample.right), right=_mirror_img(sample.left),
        disparity_left=mirror_disp(sample.disparity_right),
        disparity_right=mirror_disp(sample.disparity_left),
        disparity_left_noc=None,  # left-region annotations do not transfer
        noc_mask=None,
    )


def vflip(sample: StereoSample) -> StereoSample:
    """Reverse rows in every plane; disparity values unchanged."""

    def flip_img(img: Image) -> Image:
        return Image(img.data[::-1].copy(), value_range=img.value_range)

    def flip_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        return DisparityMap(d.values[::-1].copy(), d.valid[::-1].copy(),
                            negative_disparity=d.negative_disparity)

    return _clone(
        sample,
        left=flip_img(sample.left), right=flip_img(sample.right),
        disparity_left=flip_disp(sample.disparity_left),
        disparity_right=flip_disp(sample.disparity_right),
        disparity_left_noc=flip_disp(sample.disparity_left_noc),
        noc_mask=None if sample.noc_mask is None else sample.noc_mask[::-1].copy(),
    )


def _apply_photometric(img: Image, brightness: float, contrast: float, gamma: float) -> Image:
    data = img.data
    if brightness != 1.0:
        data = data * np.float32(brightness)
    if contrast != 1.0:
        mean = np.float32(data.mean())
        data = (data - mean) * np.float32(contrast) + mean
    if gamma != 1.0:
        data = np.float32(255.0) * np.power(np.clip(data, 0, None) / np.float32(255.0),
                                            np.float32(gamma))
    if brightness == 1.0 and contrast == 1.0 and gamma == 1.0:
        return Image(data.copy(), value_range=img.value_range)
    return Image(np.clip(data, 0.0, 255.0).astype(np.float32), value_range=img.value_range)


def apply_color(sample: StereoSample, left_params: tuple, right_params: tuple) -> StereoSample:
    """Deterministic core of color_aug; params are (brightness, contrast, gamma)."""
    return _clone(
        sample,
        left=_apply_photometric(sample.left, *left_params),
        right=_apply_photometric(sample.right, *right_params),
    )


def _draw_color(params: ColorParams, rng: np.random.Generator) -> tuple:
    b = float(rng.uniform(1.0 - params.brightness, 1.0 + params.brightness))
    c = float(rng.uniform(1.0 - params.contrast, 1.0 + params.contrast))
    g = float(rng.uniform(params.gamma[0], params.gamma[1]))
    return b, c, g


def color_aug(sample: StereoSample, params: ColorParams, rng: np.random.Generator) -> StereoSample:
    left = _draw_color(params, rng)
    right = _draw_color(params, rng) if params.asymmetric else left
    return apply_color(sample, left, right)


def apply_erase(sample: StereoSample, boxes: list[tuple[int, int, int, int]]) -> StereoSample:
    """Deterministic core of erase: paint (y0, x0, h, w) boxes on the right
    view with its per-channel mean color.  Left image and disparity untouched."""
    right = sample.right.data.copy()
    mean_color = right.reshape(-1, right.shape[2]).mean(axis=0).astype(np.float32)
    for y0, x0, h, w in boxes:
        right[y0 : y0 + h, x0 : x0 + w] = mean_color
    return _clone(sample, right=Image(right, value_range=sample.right.value_range))


def _draw_erase(
    params: EraseParams, rng: np.random.Generator, height: int, width: int
) -> list[tuple[int, int, int, int]]:
    if rng.uniform() >= params.prob:
        return []
    boxes = []
    for _ in range(int(rng.integers(1, params.max_boxes + 1))):
        bh = int(rng.integers(params.size_range[0], params.size_range[1] + 1))
        bw = int(rng.integers(params.size_range[0], params.size_range[1] + 1))
        y0 = int(rng.integers(0, max(height - bh, 0) + 1))
        x0 = int(rng.integers(0, max(width - bw, 0) + 1))
        boxes.append((y0, x0, min(bh, height - y0), min(bw, width - x0)))
    return boxes


def erase(sample: StereoSample, params: EraseParams, rng: np.random.Generator) -> StereoSample:
    boxes = _draw_erase(params, rng, sample.right.height, sample.right.width)
    if not boxes:
        return _clone(sample)
    return apply_erase(sample, boxes)


def apply_scale(sample: StereoSample, new_h: int, new_w: int) -> StereoSample:
    """Deterministic core of scale: resample to (new_h, new_w).

    Images and disparity go bilinear, masks nearest; disparity values are
    multiplied by the realized x factor new_w / W.
    """
    height, width = sample.left.height, sample.left.width
    sx = np.float32(new_w / width)

    def res_img(img: Image) -> Image:
        data = cv2.resize(img.data, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
        if data.ndim == 2:
            data = data[:, :, None]
        return Image(data, value_range=img.value_range)

    def res_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        vals = cv2.resize(np.where(d.valid, d.values, 0.0).astype(np.float32),
                          (new_w, new_h), interpolation=cv2.INTER_LINEAR) * sx
        valid = cv2.resize(d.valid.astype(np.uint8), (new_w, new_h),
                           interpolation=cv2.INTER_NEAREST).astype(bool)
        return DisparityMap(vals, valid, negative_disparity=d.negative_disparity)

    def res_mask(mask: np.ndarray | None) -> np.ndarray | None:
        if mask is None:
            return None
        return cv2.resize(mask.astype(np.uint8), (new_w, new_h),
                          interpolation=cv2.INTER_NEAREST).astype(bool)

    return _clone(
        sample,
        left=res_img(sample.left), right=res_img(sample.right),
        disparity_left=res_disp(sample.disparity_left),
        disparity_right=res_disp(sample.disparity_right),
        disparity_left_noc=res_disp(sample.disparity_left_noc),
        noc_mask=res_mask(sample.noc_mask),
    )


def scale(
    sample: StereoSample,
    params: ScaleParams,
    rng: np.random.Generator,
    min_hw: tuple[int, int] | None = None,
) -> StereoSample:
    if rng.uniform() >= params.prob:
        return _clone(sample)
    sx = float(rng.uniform(params.min_factor, params.max_factor))
    sy = float(rng.uniform(params.min_factor, params.max_factor))
    new_h = max(int(round(sample.left.height * sy)), 1)
    new_w = max(int(round(sample.left.width * sx)), 1)
    if min_hw is not None and (new_h < min_hw[0] or new_w < min_hw[1]):
        raise ValueError(
            f"scaled size {new_h}x{new_w} smaller than the configured crop {min_hw}"
        )
    return apply_scale(sample, new_h, new_w)


# ---------------------------------------------------------------------------
# composition

AUGMENT_OPS = ("random_crop", "hflip", "hsflip", "vflip", "color", "erase", "scale")


def _crop_after(pipeline: list[dict], pos: int) -> tuple[int, int] | None:
    for entry in pipeline[pos + 1 :]:
        if entry.get("op") == "random_crop":
            return int(entry["height"]), int(entry["width"])
    return None


def compose(pipeline: list[dict], sample: StereoSample, seed: int) -> AugmentedSample:
    """Apply op entries in order, logging drawn parameters for replay.

    Same (sample, pipeline, seed) always gives bit-identical output.
    """
    rng = sample_rng(seed, sample.id)
    out = sample
    log: list[tuple[str, dict]] = []
    for pos, entry in enumerate(pipeline):
        op = entry.get("op")
        if op not in AUGMENT_OPS:
            raise ValueError(f"unknown augmentation op {op!r}")
        if op == "random_crop":
            h, w = int(entry["height"]), int(entry["width"])
            if h > out.left.height or w > out.left.width:
                raise ValueError(
                    f"crop {h}x{w} larger than image "
                    f"{out.left.height}x{out.left.width}"
                )
            y0 = int(rng.integers(0, out.left.height - h + 1))
            x0 = int(rng.integers(0, out.left.width - w + 1))
            out = crop_window(out, y0, x0, h, w)
            log.append(("crop_window", {"y0": y0, "x0": x0, "h": h, "w": w}))
        elif op in ("hflip", "vflip", "hsflip"):
            prob = float(entry.get("prob", 1.0))
            if rng.uniform() < prob:
                out = {"hflip": hflip, "vflip": vflip, "hsflip": hsflip}[op](out)
                log.append((op, {}))
        elif op == "color":
            params = ColorParams(
                brightness=float(entry.get("brightness", 0.2)),
                contrast=float(entry.get("contrast", 0.2)),
                gamma=tuple(entry.get("gamma", (0.8, 1.2))),
                asymmetric=bool(entry.get("asymmetric", True)),
            )
            lp = _draw_color(params, rng)
            rp = _draw_color(params, rng) if params.asymmetric else lp
            out = apply_color(out, lp, rp)
            log.append(("apply_color", {"left": lp, "right": rp}))
        elif op == "erase":
            params = EraseParams(
                prob=float(entry.get("prob", 0.5)),
                max_boxes=int(entry.get("max_boxes", 2)),
                size_range=tuple(entry.get("size_range", (40, 100))),
            )
            boxes = _draw_erase(params, rng, out.right.height, out.right.width)
            if boxes:
                out = apply_erase(out, boxes)
                log.append(("apply_erase", {"boxes": boxes}))
        elif op == "scale":
            params = ScaleParams(
                min_factor=float(entry.get("min_factor", 0.9)),
                max_factor=float(entry.get("max_factor", 1.1)),
                prob=float(entry.get("prob", 1.0)),
            )
            out = scale(out, params, rng, min_hw=_crop_after(pipeline, pos))
            log.append(("apply_scale", {"h": out.left.height, "w": out.left.width}))
    return AugmentedSample(
        left=out.left, right=out.right, id=out.id, dataset=out.dataset,
        disparity_left=out.disparity_left, disparity_right=out.disparity_right,
        disparity_left_noc=out.disparity_left_noc, noc_mask=out.noc_mask,
        applied_ops=log,
    )


def replay(sample: StereoSample, applied_ops: list[tuple[str, dict]]) -> StereoSample:
    """Re-run a compose() log deterministically, no rng involved."""
    out = sample
    for name, params in applied_ops:
        if name == "crop_window":
            out = crop_window(out, params["y0"], params["x0"], params["h"], params["w"])
        elif name in ("hflip", "vflip", "hsflip"):
            out = {"hflip": hflip, "vflip": vflip, "hsflip": hsflip}[name](out)
        elif name == "apply_color":
            out = apply_color(out, params["left"], params["right"])
        elif name == "apply_erase":
            out = apply_erase(out, params["boxes"])
        elif name == "apply_scale":
            out = apply_scale(out, params["h"], params["w"])
        else:
            raise ValueError(f"unknown log entry {name!r}")
    return out
