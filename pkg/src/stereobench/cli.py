"""Command-line benchmark harness.

Subcommands:
  run           execute the configured pipeline over a dataset and report
  eval          score externally produced disparity files against ground truth
  cross-domain  one fixed pipeline over several datasets, per-dataset metrics
  vis           render a disparity file as a color PNG
  manifest      enumerate a dataset tree and print/write the entry list

Every run is deterministic given (config, data): reports and artifacts are
byte-identical across repeats and thread counts.  Per-sample failures are
logged and skipped; the exit code is 0 only when no sample failed.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .augment import compose
from .config import ConfigError, RunConfig, echo_config, parse_config
from .core import DisparityMap
from .datasets import DatasetManifest, StereoSample, build_manifest, load_sample
from .kitti_png import read_kitti_disparity_png, write_kitti_disparity_png
from .metrics import (EvalReport, MetricSpec, ReportRow, aggregate,
                      default_metric_spec, evaluate_sample, metric_names)
from .pfm import read_pfm
from .pipeline import compute_disparity
from .synthetic import make_stereogram
from .visualize import visualize

REPORT_SCHEMA = "stereobench.report.v1"


# ---------------------------------------------------------------------------
# sample enumeration

def _synthetic_sample(params: dict, seed: int, index: int) -> StereoSample:
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index]))
    pair = make_stereogram(
        rng,
        height=int(params["height"]),
        width=int(params["width"]),
        max_disparity=int(params["max_disparity"]),
        n_boxes=int(params["boxes"]),
        channels=int(params["channels"]),
        texture=params["texture"],
    )
    return StereoSample(
        left=pair.left, right=pair.right,
        id=f"rds_{index:04d}", dataset="synthetic",
        disparity_left=pair.disp_left, disparity_right=pair.disp_right,
        noc_mask=pair.noc_mask,
    )


class SampleSource:
    """Uniform index-addressable view over a manifest or the synthetic set."""

    def __init__(self, cfg: RunConfig):
        data = cfg.data
        self.dataset = data["dataset"]
        self.seed = cfg.seed
        if self.dataset == "synthetic":
            self.manifest = None
            self.params = data["synthetic"]
            self.ids = [f"rds_{i:04d}" for i in range(int(self.params["count"]))]
        else:
            if not data["root"]:
                raise ConfigError("data.root: required for real datasets")
            self.manifest = build_manifest(
                self.dataset, data["root"], data["split"], data["variant"]
            )
            self.ids = [e.id for e in self.manifest.entries]

    def __len__(self) -> int:
        return len(self.ids)

    def load(self, index: int) -> StereoSample:
        if self.manifest is None:
            return _synthetic_sample(self.params, self.seed, index)
        return load_sample(self.manifest, index)


def _gt_for_eval(sample: StereoSample, spec: MetricSpec):
    """Ground truth plus any extra mask implied by the mask mode."""
    gt = sample.disparity_left
    extra = None
    if spec.mask == "noc":
        if sample.disparity_left_noc is not None:
            gt = sample.disparity_left_noc
        elif sample.noc_mask is not None:
            extra = sample.noc_mask
    return gt, extra


# ---------------------------------------------------------------------------
# report formatting

def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _row_cells(row: ReportRow, spec: MetricSpec) -> list:
    cells = [row.id, row.valid_pixels]
    if spec.epe:
        cells.append(row.epe)
    for tau in spec.bad_thresholds:
        cells.append(row.bad.get(tau))
    return cells


def render_report_csv(report: EvalReport, spec: MetricSpec) -> str:
    header = ["id", "valid_pixels"] + metric_names(spec)
    lines = [f"# {REPORT_SCHEMA}", ",".join(header)]
    for row in report.rows:
        lines.append(",".join(_format_value(c) for c in _row_cells(row, spec)))
    return "\n".join(lines) + "\n"


def render_summary_csv(report: EvalReport, spec: MetricSpec) -> str:
    names = metric_names(spec)
    lines = [f"# {REPORT_SCHEMA}", ",".join(["aggregate"] + names)]
    for label, agg in (("pixel_weighted", report.pixel_weighted),
                       ("sample_mean", report.sample_mean)):
        lines.append(",".join([label] + [_format_value(agg.get(n)) for n in names]))
    return "\n".join(lines) + "\n"


def render_report_md(report: EvalReport, spec: MetricSpec, title: str) -> str:
    names = metric_names(spec)
    header = ["id", "valid_pixels"] + names
    lines = [f"# {title}", "", "| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(header)) + "|"]
    for row in report.rows:
        lines.append("| " + " | ".join(_format_value(c) for c in _row_cells(row, spec)) + " |")
    lines += ["", "## Aggregates", "", "| aggregate | " + " | ".join(names) + " |",
              "|" + "|".join(["---"] * (len(names) + 1)) + "|"]
    for label, agg in (("pixel_weighted", report.pixel_weighted),
                       ("sample_mean", report.sample_mean)):
        lines.append("| " + " | ".join([label] + [_format_value(agg.get(n)) for n in names]) + " |")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# run

def _process_sample(cfg: RunConfig, source: SampleSource, index: int):
    sample = source.load(index)
    if cfg.augment_pipeline:
        sample = compose(cfg.augment_pipeline, sample, cfg.seed)
    est = compute_disparity(sample.left, sample.right, cfg.pipeline)
    row = None
    if sample.disparity_left is not None:
        gt, extra = _gt_for_eval(sample, cfg.metric_spec)
        row = evaluate_sample(est, gt, cfg.metric_spec, sample_id=sample.id,
                              extra_mask=extra)
    artifacts = []
    safe_id = sample.id.replace("/", "_")
    if cfg.output["save_disparity"]:
        artifacts.append((f"disparity/{safe_id}.png", write_kitti_disparity_png(est)))
    if cfg.output["save_visualization"]:
        artifacts.append((f"vis/{safe_id}.png",
                          visualize(est, float(cfg.output["colormap_max"]))))
    return row, artifacts


def run_benchmark(cfg: RunConfig, out_dir: Path) -> int:
    """Execute a configured run; returns the number of failed samples."""
    source = SampleSource(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_resolved.yaml").write_text(echo_config(cfg))

    results: dict[int, tuple] = {}
    failures: dict[int, str] = {}

    def work(index: int):
        try:
            return index, _process_sample(cfg, source, index), None
        except Exception as exc:  # noqa: BLE001 - skip-and-summarize by design
            return index, None, f"{source.ids[index]}: {exc}"

    indices = range(len(source))
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(work, indices))
    else:
        outcomes = [work(i) for i in indices]
    for index, result, error in outcomes:
        if error is not None:
            failures[index] = error
        else:
            results[index] = result

    rows = []
    for index in sorted(results):
        row, artifacts = results[index]
        if row is not None:
            rows.append(row)
        for rel, payload in artifacts:
            path = out_dir / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)

    if rows:
        report = aggregate(rows)
        (out_dir / "report.csv").write_text(render_report_csv(report, cfg.metric_spec))
        (out_dir / "summary.csv").write_text(render_summary_csv(report, cfg.metric_spec))
        md = render_report_md(report, cfg.metric_spec,
                              f"stereobench run: {source.dataset}")
        (out_dir / "report.md").write_text(md)
        print(md)
    if failures:
        text = "\n".join(failures[i] for i in sorted(failures)) + "\n"
        (out_dir / "failures.txt").write_text(text)
        print(f"{len(failures)} sample(s) failed:\n{text}", file=sys.stderr)
    print(f"processed {len(results)}/{len(source)} samples -> {out_dir}")
    return len(failures)


# ---------------------------------------------------------------------------
# eval-only

def _read_estimate(path: Path) -> DisparityMap:
    if path.suffix.lower() == ".pfm":
        arr, _ = read_pfm(path.read_bytes())
        if arr.ndim == 3:
            arr = arr[:, :, 0]
        return DisparityMap(np.nan_to_num(arr, posinf=0.0, neginf=0.0), np.isfinite(arr))
    return read_kitti_disparity_png(path.read_bytes())


def eval_only(est_dir: Path, manifest: DatasetManifest, spec: MetricSpec) -> EvalReport:
    """Score a directory of <id>.png / <id>.pfm estimates against GT."""
    rows = []
    for index, entry in enumerate(manifest.entries):
        est_path = None
        for suffix in (".png", ".pfm"):
            candidate = est_dir / f"{entry.id}{suffix}"
            if candidate.is_file():
                est_path = candidate
                break
            flat = est_dir / f"{entry.id.replace('/', '_')}{suffix}"
            if flat.is_file():
                est_path = flat
                break
        if est_path is None:
            raise FileNotFoundError(f"no estimate found for sample {entry.id!r} in {est_dir}")
        est = _read_estimate(est_path)
        sample = load_sample(manifest, index)
        if sample.disparity_left is None:
            raise ValueError(f"sample {entry.id!r} has no ground truth to score against")
        if est.values.shape != sample.disparity_left.values.shape:
            raise ValueError(
                f"sample {entry.id!r}: estimate shape {est.values.shape} does not "
                f"match GT {sample.disparity_left.values.shape}"
            )
        gt, extra = _gt_for_eval(sample, spec)
        rows.append(evaluate_sample(est, gt, spec, sample_id=entry.id, extra_mask=extra))
    return aggregate(rows)


# ---------------------------------------------------------------------------
# cross-domain

def cross_domain(cfg: RunConfig, out_dir: Path) -> int:
    """One pipeline, several datasets, each scored by its own convention."""
    targets = cfg.cross_domain_targets
    if not targets:
        raise ConfigError("cross_domain.targets: empty plan")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_resolved.yaml").write_text(echo_config(cfg))

    table = []
    failed = 0
    for target in targets:
        dataset = str(target["dataset"]).lower()
        variant = target.get("variant")
        if dataset == "middlebury":
            variant = "half"  # the cross-domain protocol is half-resolution
        spec = default_metric_spec(dataset)
        manifest = build_manifest(dataset, target["root"], target.get("split", "train"), variant)
        rows = []
        for index in range(len(manifest.entries)):
            sample_id = manifest.entries[index].id
            try:
                sample = load_sample(manifest, index)
                est = compute_disparity(sample.left, sample.right, cfg.pipeline)
                gt, extra = _gt_for_eval(sample, spec)
                rows.append(evaluate_sample(est, gt, spec, sample_id=sample_id,
                                            extra_mask=extra))
            except Exception as exc:  # noqa: BLE001
                failed += 1
                print(f"{dataset}/{sample_id}: {exc}", file=sys.stderr)
        if not rows:
            failed += 1
            print(f"{dataset}: no evaluable samples", file=sys.stderr)
            continue
        report = aggregate(rows)
        bad_name = next((n for n in metric_names(spec) if n.startswith("bad_")), None)
        table.append({
            "dataset": dataset,
            "resolution": variant or "full",
            "samples": len(rows),
            "epe": report.pixel_weighted.get("epe"),
            "epe_sample_mean": report.sample_mean.get("epe"),
            "bad_metric": bad_name or "",
            "bad": report.pixel_weighted.get(bad_name) if bad_name else None,
            "bad_sample_mean": report.sample_mean.get(bad_name) if bad_name else None,
        })

    columns = ["dataset", "resolution", "samples", "epe", "epe_sample_mean",
               "bad_metric", "bad", "bad_sample_mean"]
    csv_lines = [f"# {REPORT_SCHEMA}", ",".join(columns)]
    md_lines = ["# stereobench cross-domain evaluation", "",
                "| " + " | ".join(columns) + " |",
                "|" + "|".join(["---"] * len(columns)) + "|"]
    for row in table:
        cells = [_format_value(row[c]) for c in columns]
        csv_lines.append(",".join(cells))
        md_lines.append("| " + " | ".join(cells) + " |")
    (out_dir / "cross_domain.csv").write_text("\n".join(csv_lines) + "\n")
    md = "\n".join(md_lines) + "\n"
    (out_dir / "cross_domain.md").write_text(md)
    print(md)
    return failed


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--output", default=None, help="override output.dir")
    p.add_argument("--seed", type=int, default=None, help="override seed")
    p.add_argument("--threads", type=int, default=None, help="override threads")


def _load_cfg(args) -> RunConfig:
    cfg = parse_config(args.config)
    if args.output is not None:
        cfg.resolved["output"]["dir"] = args.output
    if args.seed is not None:
        cfg.resolved["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        cfg.resolved["threads"] = args.threads
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stereobench",
                                     description="classical stereo matching benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured pipeline over a dataset")
    _add_common(p_run)

    p_eval = sub.add_parser("eval", help="evaluate externally produced disparity files")
    _add_common(p_eval)
    p_eval.add_argument("--est-dir", required=True, help="directory of <id>.png/.pfm estimates")

    p_cross = sub.add_parser("cross-domain", help="evaluate one pipeline across datasets")
    _add_common(p_cross)

    p_vis = sub.add_parser("vis", help="render a disparity file as color PNG")
    p_vis.add_argument("--input", required=True, help="disparity file (.png KITTI or .pfm)")
    p_vis.add_argument("--output", required=True, help="output PNG path")
    p_vis.add_argument("--max-disparity", type=float, default=64.0, help="colormap range")

    p_manifest = sub.add_parser("manifest", help="enumerate a dataset tree")
    p_manifest.add_argument("--dataset", required=True)
    p_manifest.add_argument("--root", required=True)
    p_manifest.add_argument("--split", default="train", choices=["train", "test"])
    p_manifest.add_argument("--variant", default=None)
    p_manifest.add_argument("--output", default=None, help="write the entry list here")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load_cfg(args)
            failed = run_benchmark(cfg, Path(cfg.output["dir"]))
            return 1 if failed else 0
        if args.command == "eval":
            cfg = _load_cfg(args)
            source = SampleSource(cfg)
            if source.manifest is None:
                raise ConfigError("eval needs a real dataset with ground truth on disk")
            report = eval_only(Path(args.est_dir), source.manifest, cfg.metric_spec)
            out_dir = Path(cfg.output["dir"])
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "report.csv").write_text(render_report_csv(report, cfg.metric_spec))
            (out_dir / "summary.csv").write_text(render_summary_csv(report, cfg.metric_spec))
            md = render_report_md(report, cfg.metric_spec, "stereobench eval")
            (out_dir / "report.md").write_text(md)
            print(md)
            return 0
        if args.command == "cross-domain":
            cfg = _load_cfg(args)
            failed = cross_domain(cfg, Path(cfg.output["dir"]))
            return 1 if failed else 0
        if args.command == "vis":
            d = _read_estimate(Path(args.input))
            Path(args.output).write_bytes(visualize(d, args.max_disparity))
            return 0
        if args.command == "manifest":
            manifest = build_manifest(args.dataset, args.root, args.split, args.variant)
            print(f"{args.dataset} {args.split}: {len(manifest.entries)} entries")
            listing = "\n".join(e.id for e in manifest.entries) + "\n"
            if args.output:
                Path(args.output).write_text(listing)
            else:
                print(listing, end="")
            return 0
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
