"""Command-line entry point.

Subcommands mirror the workflow stages: ``enumerate`` lists the
preprocessing sequences, ``run`` executes the video x sequence x
projection grid, ``score`` applies the quality metrics, ``compare-gt``
compares segmentation masks, and ``report`` aggregates scores into the
summary tables. ``config`` prints a complete default configuration file.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import assets, gtmetrics, pipeline, stackio, stats
from .config import RunConfig, default_config
from .errors import ConfigError, MissingManifestError, StackFuseError
from .iqa import BrisqueModel, NiqeModel, QualityRecord, brisque, niqe, piqe
from .projections import canonical_projection

log = logging.getLogger("stackfuse")

SCORE_FIELDS = ("image", "metric", "score")


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else default_config()
    if getattr(args, "input", None):
        cfg.input_dir = args.input
    if getattr(args, "output", None):
        cfg.output_dir = args.output
    if getattr(args, "jobs", None):
        cfg.jobs = args.jobs
    if getattr(args, "pipeline", None):
        cfg.pipelines = args.pipeline
    return cfg


def _discover_videos(root: Path, pattern: str) -> list[Path]:
    """Subdirectories with matching frames; or the root itself."""
    if not root.is_dir():
        raise ConfigError(f"input directory not found: {root}")
    subdirs = sorted(d for d in root.iterdir() if d.is_dir() and any(d.glob(pattern)))
    if subdirs:
        return subdirs
    return [root]


def _parse_pipeline_token(token: str) -> tuple[str, tuple[str, ...]]:
    """Split e.g. "QP_CH_NF" into (projection, operator chain)."""
    parts = token.split("_")
    proj = canonical_projection(parts[0])
    return proj, tuple(parts[1:])


def cmd_config(args) -> int:
    print(default_config().to_json())
    return 0


def cmd_enumerate(args) -> int:
    cfg = _load_config(args)
    seqs = pipeline.enumerate_sequences(cfg.families)
    for i, seq in enumerate(seqs):
        print(f"{i:3d}  {seq.token}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    params = cfg.operator_params()
    sequences = pipeline.enumerate_sequences(cfg.families)
    projections = list(cfg.projections)

    if cfg.pipelines:
        wanted = [_parse_pipeline_token(t) for t in cfg.pipelines]
        seq_tokens = {"_".join(ops) for _, ops in wanted}
        sequences = [s for s in sequences if s.token in seq_tokens]
        projections = sorted(
            {p for p, _ in wanted}, key=lambda p: cfg.projections.index(p) if p in cfg.projections else 99
        )
        if not sequences:
            raise ConfigError(f"pipeline filter matched no sequences: {cfg.pipelines}")

    videos = [
        stackio.load_stack(d, pattern=cfg.frame_pattern)
        for d in _discover_videos(Path(cfg.input_dir), cfg.frame_pattern)
    ]
    manifest = pipeline.run_grid(
        videos,
        sequences,
        projections,
        out_dir=cfg.output_dir,
        q=cfg.quantile,
        params=params,
        jobs=cfg.resolved_jobs(),
    )
    n_failed = len(manifest.failed)
    print(f"{len(manifest.rows)} outputs, {n_failed} failed; manifest at "
          f"{Path(cfg.output_dir) / pipeline.MANIFEST_NAME}")
    return 0 if n_failed == 0 else 1


def _iter_score_targets(cfg: RunConfig, input_arg: str | None) -> list[Path]:
    src = Path(input_arg) if input_arg else Path(cfg.output_dir) / pipeline.MANIFEST_NAME
    if src.is_dir():
        return sorted(src.glob("*.png"))
    if src.suffix == ".csv":
        manifest = pipeline.RunManifest.read_csv(src)
        return [Path(r.path) for r in manifest.rows if r.status == "ok"]
    if src.is_file():
        return [src]
    raise MissingManifestError(f"nothing to score at {src}")


def cmd_score(args) -> int:
    cfg = _load_config(args)
    metrics = args.metric or cfg.metrics
    if args.model:
        if len(metrics) != 1 or metrics[0] not in ("niqe", "brisque"):
            raise ConfigError("--model applies to a single model-based metric")
        if metrics[0] == "niqe":
            cfg.niqe_model = args.model
        else:
            cfg.brisque_model = args.model

    niqe_model = None
    brisque_model = None
    if "niqe" in metrics:
        niqe_model = (
            NiqeModel.load(cfg.niqe_model) if cfg.niqe_model else assets.default_niqe_model()
        )
    if "brisque" in metrics:
        brisque_model = (
            BrisqueModel.load(cfg.brisque_model)
            if cfg.brisque_model
            else assets.default_brisque_model()
        )

    targets = _iter_score_targets(cfg, args.input)
    out_path = Path(args.output) if args.output else Path("scores.csv")
    if out_path.is_dir():
        out_path = out_path / "scores.csv"

    failures = 0
    records: list[QualityRecord] = []
    for path in targets:
        img = stackio.read_gray(path)
        for metric in metrics:
            try:
                if metric == "piqe":
                    value = piqe(img)
                elif metric == "niqe":
                    value = niqe(img, niqe_model)
                else:
                    value = brisque(img, brisque_model)
            except StackFuseError as exc:
                failures += 1
                log.warning("%s on %s failed: %s", metric, path.name, exc)
                continue
            records.append(QualityRecord(image=str(path), metric=metric, score=value))
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_FIELDS)
        for rec in records:
            writer.writerow([rec.image, rec.metric, f"{rec.score:.6f}"])
    print(f"wrote {out_path} ({len(targets)} images, {failures} failures)")
    return 0 if failures == 0 else 1


def cmd_compare_gt(args) -> int:
    old = Path(args.old)
    new = Path(args.new)
    if old.is_dir() != new.is_dir():
        raise ConfigError("old and new must both be files or both directories")
    if old.is_dir():
        olds = sorted(old.glob("*.png"), key=lambda p: stackio.natural_key(p.name))
        news = sorted(new.glob("*.png"), key=lambda p: stackio.natural_key(p.name))
        if len(olds) != len(news):
            raise ConfigError(f"mask counts differ: {len(olds)} vs {len(news)}")
        pairs = list(zip(olds, news))
    else:
        pairs = [(old, new)]
    results = []
    for po, pn in pairs:
        cmp = gtmetrics.compare(
            gtmetrics.load_mask(po), gtmetrics.load_mask(pn), relabel=args.relabel
        )
        results.append((po.stem, cmp))
    out_dir = Path(args.output) if args.output else Path("gt_comparison")
    paths = gtmetrics.write_comparison_csvs(results, out_dir)
    print(f"compared {len(results)} pair(s); tables in {paths['pairs'].parent}")
    return 0


def _join_scores(score_csv: Path, manifest: pipeline.RunManifest) -> list[stats.ScoredCell]:
    cells = {r.path: r for r in manifest.rows}
    joined = []
    with score_csv.open(newline="") as fh:
        for rec in csv.DictReader(fh):
            cell = cells.get(rec["image"])
            if cell is None:
                continue
            joined.append(
                stats.ScoredCell(
                    video_id=cell.video_id,
                    sequence=cell.sequence,
                    projection=cell.projection,
                    metric=rec["metric"],
                    score=float(rec["score"]),
                )
            )
    return joined


def cmd_report(args) -> int:
    manifest = pipeline.RunManifest.read_csv(args.manifest)
    records = _join_scores(Path(args.scores), manifest)
    if not records:
        raise MissingManifestError("no score rows joined against the manifest")
    out_dir = Path(args.output) if args.output else Path("report")
    paths = stats.write_report(records, out_dir)
    print(f"report tables in {out_dir}: " + ", ".join(p.name for p in paths.values()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackfuse",
        description="Fuse multi-temporal frame stacks through preprocessing/projection grids and score the results.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="print the default configuration file")
    p.set_defaults(fn=cmd_config)

    p = sub.add_parser("enumerate", help="list preprocessing sequences in canonical order")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("run", help="execute the processing grid")
    p.add_argument("--config")
    p.add_argument("--input", help="directory of videos (frame subdirectories)")
    p.add_argument("--output", help="output directory for images + manifest")
    p.add_argument("--pipeline", action="append",
                   help="run only this pipeline token, e.g. QP_CH_NF (repeatable)")
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("score", help="apply quality metrics to images or a manifest")
    p.add_argument("--config")
    p.add_argument("--input", help="image directory, single image, or manifest CSV")
    p.add_argument("--output", help="output CSV path")
    p.add_argument("--metric", action="append", choices=["piqe", "niqe", "brisque"])
    p.add_argument("--model", help="model file for the selected metric")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("compare-gt", help="compare two segmentation masks or mask directories")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--output", help="output directory for the CSV tables")
    p.add_argument("--relabel", action="store_true",
                   help="relabel via 8-connected components before counting")
    p.set_defaults(fn=cmd_compare_gt)

    p = sub.add_parser("report", help="aggregate a score CSV into the summary tables")
    p.add_argument("--scores", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--output", help="output directory")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StackFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
