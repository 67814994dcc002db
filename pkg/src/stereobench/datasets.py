"""Manifest-driven enumeration and loading of the five benchmark datasets.

Manifests only index pre-downloaded official directory trees (layouts are
documented in docs/datasets.md); downloading is out of scope.  Enumeration
is deterministic: entries sort lexicographically by id.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .core import DisparityMap, Image
from .features import downsample
from .kitti_png import read_kitti_disparity_png
from .pfm import read_pfm

DATASETS = ("sceneflow", "kitti2012", "kitti2015", "middlebury", "eth3d")


class ManifestError(ValueError):
    """Dataset tree missing or not shaped like the official layout."""


@dataclass
class StereoSample:
    left: Image
    right: Image
    id: str
    dataset: str
    disparity_left: DisparityMap | None = None
    disparity_right: DisparityMap | None = None
    disparity_left_noc: DisparityMap | None = None  # KITTI noc-region GT
    noc_mask: np.ndarray | None = None  # synthetic pairs carry an exact one

    def __post_init__(self) -> None:
        if (self.left.height, self.left.width) != (self.right.height, self.right.width):
            raise ValueError("left/right image dimensions differ")
        for d in (self.disparity_left, self.disparity_right, self.disparity_left_noc):
            if d is not None and (d.height, d.width) != (self.left.height, self.left.width):
                raise ValueError("disparity dimensions do not match the images")


@dataclass
class ManifestEntry:
    id: str
    left: Path
    right: Path
    disp_left: Path | None = None
    disp_right: Path | None = None
    disp_left_noc: Path | None = None


@dataclass
class DatasetManifest:
    dataset: str
    root: Path
    split: str
    entries: list[ManifestEntry] = field(default_factory=list)
    resolution_variant: str | None = None  # middlebury: full | half | quarter
    halve_on_load: bool = False  # middlebury half requested but only full on disk
    variant: str | None = None  # sceneflow: cleanpass | finalpass

    def __len__(self) -> int:
        return len(self.entries)


def build_manifest(
    dataset: str,
    root: str | Path,
    split: str = "train",
    variant: str | None = None,
) -> DatasetManifest:
    """Enumerate one dataset split.

    ``variant`` selects the SceneFlow pass (cleanpass/finalpass, mandatory:
    the two passes are not comparable and there is no safe default) or the
    Middlebury resolution (full/half/quarter, default half).
    """
    dataset = dataset.lower()
    if dataset not in DATASETS:
        raise ManifestError(f"unknown dataset {dataset!r}")
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"dataset root {root} does not exist")
    if split not in ("train", "test"):
        raise ManifestError(f"split must be train or test, got {split!r}")

    builder = {
        "sceneflow": _sceneflow_manifest,
        "kitti2012": _kitti2012_manifest,
        "kitti2015": _kitti2015_manifest,
        "middlebury": _middlebury_manifest,
        "eth3d": _eth3d_manifest,
    }[dataset]
    manifest = builder(root, split, variant)
    manifest.entries.sort(key=lambda e: e.id)
    if not manifest.entries:
        warnings.warn(f"empty manifest for {dataset} {split} at {root}", stacklevel=2)
    return manifest


def _opt(path: Path) -> Path | None:
    return path if path.is_file() else None


def _sceneflow_manifest(root: Path, split: str, variant: str | None) -> DatasetManifest:
    if variant not in ("cleanpass", "finalpass"):
        raise ManifestError(
            "sceneflow needs variant cleanpass or finalpass; the passes are "
            "not comparable so no default is provided"
        )
    frames = root / f"frames_{variant}" / split.upper()
    disp_root = root / "disparity" / split.upper()
    entries = []
    if frames.is_dir():
        for left in sorted(frames.rglob("left/*.png")):
            scene = left.parent.parent.relative_to(frames)
            stem = left.stem
            right = left.parent.parent / "right" / left.name
            if not right.is_file():
                continue
            dl = disp_root / scene / "left" / f"{stem}.pfm"
            dr = disp_root / scene / "right" / f"{stem}.pfm"
            entries.append(ManifestEntry(
                id=f"{scene.as_posix()}/{stem}",
                left=left, right=right,
                disp_left=_opt(dl), disp_right=_opt(dr),
            ))
    return DatasetManifest("sceneflow", root, split, entries, variant=variant)


def _kitti2015_manifest(root: Path, split: str, variant: str | None) -> DatasetManifest:
    sub = root / ("training" if split == "train" else "testing")
    entries = []
    left_dir = sub / "image_2"
    if left_dir.is_dir():
        for left in sorted(left_dir.glob("*_10.png")):
            right = sub / "image_3" / left.name
            if not right.is_file():
                continue
            entries.append(ManifestEntry(
                id=left.stem,
                left=left, right=right,
                disp_left=_opt(sub / "disp_occ_0" / left.name),
                disp_right=_opt(sub / "disp_occ_1" / left.name),
                disp_left_noc=_opt(sub / "disp_noc_0" / left.name),
            ))
    return DatasetManifest("kitti2015", root, split, entries)


def _kitti2012_manifest(root: Path, split: str, variant: str | None) -> DatasetManifest:
    sub = root / ("training" if split == "train" else "testing")
    entries = []
    left_dir = sub / "colored_0"
    right_name = "colored_1"
    if not left_dir.is_dir():  # grayscale-only download
        left_dir = sub / "image_0"
        right_name = "image_1"
    if left_dir.is_dir():
        for left in sorted(left_dir.glob("*_10.png")):
            right = sub / right_name / left.name
            if not right.is_file():
                continue
            entries.append(ManifestEntry(
                id=left.stem,
                left=left, right=right,
                disp_left=_opt(sub / "disp_occ" / left.name),
                disp_left_noc=_opt(sub / "disp_noc" / left.name),
            ))
    return DatasetManifest("kitti2012", root, split, entries)


_MIDDLEBURY_SUFFIX = {"full": "F", "half": "H", "quarter": "Q"}


def _middlebury_manifest(root: Path, split: str, variant: str | None) -> DatasetManifest:
    variant = variant or "half"
    if variant not in _MIDDLEBURY_SUFFIX:
        raise ManifestError(f"middlebury variant must be full/half/quarter, got {variant!r}")
    base = "training" if split == "train" else "test"
    sub = root / f"{base}{_MIDDLEBURY_SUFFIX[variant]}"
    halve = False
    if not sub.is_dir() and variant == "half":
        # the evaluation protocol wants half resolution regardless of what
        # was downloaded; fall back to full-res files and downsample on load
        full = root / f"{base}F"
        if full.is_dir():
            sub = full
            halve = True
    entries = []
    if sub.is_dir():
        for scene in sorted(p for p in sub.iterdir() if p.is_dir()):
            left, right = scene / "im0.png", scene / "im1.png"
            if not (left.is_file() and right.is_file()):
                continue
            entries.append(ManifestEntry(
                id=scene.name,
                left=left, right=right,
                disp_left=_opt(scene / "disp0GT.pfm"),
                disp_right=_opt(scene / "disp1GT.pfm"),
            ))
    return DatasetManifest("middlebury", root, split, entries,
                           resolution_variant=variant, halve_on_load=halve)


def _eth3d_manifest(root: Path, split: str, variant: str | None) -> DatasetManifest:
    sub = root / ("two_view_training" if split == "train" else "two_view_test")
    entries = []
    if sub.is_dir():
        for scene in sorted(p for p in sub.iterdir() if p.is_dir()):
            left, right = scene / "im0.png", scene / "im1.png"
            if not (left.is_file() and right.is_file()):
                continue
            entries.append(ManifestEntry(
                id=scene.name,
                left=left, right=right,
                disp_left=_opt(scene / "disp0GT.pfm"),
            ))
    return DatasetManifest("eth3d", root, split, entries)


class SampleLoadError(RuntimeError):
    """Decode failure, annotated with the sample id."""


def _decode_image(path: Path, grayscale: bool) -> Image:
    flags = cv2.IMREAD_GRAYSCALE if grayscale else cv2.IMREAD_COLOR
    raw = cv2.imread(str(path), flags)
    if raw is None:
        raise SampleLoadError(f"cannot decode image {path}")
    if raw.dtype == np.uint16:
        raw = (raw.astype(np.float32) / 257.0)  # 16-bit camera images -> [0, 255]
    data = raw.astype(np.float32)
    if not grayscale:
        data = data[:, :, ::-1].copy()  # BGR -> RGB
    return Image(data)


def _load_disparity(path: Path, sample_id: str) -> DisparityMap:
    try:
        if path.suffix.lower() == ".pfm":
            arr, _ = read_pfm(path.read_bytes())
            if arr.ndim == 3:
                arr = arr[:, :, 0]
            valid = np.isfinite(arr)
            return DisparityMap(np.nan_to_num(arr, posinf=0.0, neginf=0.0), valid)
        return read_kitti_disparity_png(path.read_bytes())
    except Exception as exc:
        raise SampleLoadError(f"sample {sample_id}: bad disparity {path}: {exc}") from exc


def _halve_sample_resolution(sample: StereoSample) -> StereoSample:
    def halve_disp(d: DisparityMap | None) -> DisparityMap | None:
        if d is None:
            return None
        h2, w2 = (d.height + 1) // 2, (d.width + 1) // 2
        vals = np.zeros((h2, w2), dtype=np.float64)
        cnt = np.zeros((h2, w2), dtype=np.int64)
        hh, ww = 2 * h2, 2 * w2
        pv = np.zeros((hh, ww))
        pm = np.zeros((hh, ww), dtype=bool)
        pv[: d.height, : d.width] = np.where(d.valid, d.values, 0.0)
        pm[: d.height, : d.width] = d.valid
        for dy in (0, 1):
            for dx in (0, 1):
                vals += pv[dy::2, dx::2]
                cnt += pm[dy::2, dx::2]
        valid = cnt > 0
        out = np.zeros((h2, w2), dtype=np.float32)
        out[valid] = (vals[valid] / cnt[valid] / 2.0).astype(np.float32)
        return DisparityMap(out, valid)

    return StereoSample(
        left=downsample(sample.left, 2),
        right=downsample(sample.right, 2),
        id=sample.id,
        dataset=sample.dataset,
        disparity_left=halve_disp(sample.disparity_left),
        disparity_right=halve_disp(sample.disparity_right),
        disparity_left_noc=halve_disp(sample.disparity_left_noc),
    )


def load_sample(manifest: DatasetManifest, index: int) -> StereoSample:
    """Decode one manifest entry to float32 [0, 255] images plus GT."""
    if not 0 <= index < len(manifest.entries):
        raise IndexError(f"index {index} out of range for {len(manifest.entries)} entries")
    entry = manifest.entries[index]
    grayscale = manifest.dataset == "eth3d"
    try:
        left = _decode_image(entry.left, grayscale)
        right = _decode_image(entry.right, grayscale)
    except SampleLoadError:
        raise
    except Exception as exc:
        raise SampleLoadError(f"sample {entry.id}: {exc}") from exc
    sample = StereoSample(
        left=left,
        right=right,
        id=entry.id,
        dataset=manifest.dataset,
        disparity_left=_load_disparity(entry.disp_left, entry.id) if entry.disp_left else None,
        disparity_right=_load_disparity(entry.disp_right, entry.id) if entry.disp_right else None,
        disparity_left_noc=(
            _load_disparity(entry.disp_left_noc, entry.id) if entry.disp_left_noc else None
        ),
    )
    if manifest.halve_on_load:
        sample = _halve_sample_resolution(sample)
    return sample
