"""Score aggregation: descriptive statistics, per-projection
stratification, sum-vs-mean paired testing, and pipeline rankings.

Quantiles everywhere use linear interpolation between order statistics,
the same convention as the quantile projection. The paired test reports
Cohen's d alongside the two-sided p-value, with explicit policies for
degenerate difference vectors (see :func:`paired_test`).
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import EmptySampleError
from .projections import values_quantile


@dataclass(frozen=True)
class ScoredCell:
    """A quality score joined with the grid cell that produced the image."""

    video_id: str
    sequence: str
    projection: str
    metric: str
    score: float


@dataclass
class SummaryStats:
    n: int
    min: float
    max: float
    mean: float
    sd: float
    median: float
    iqr: float


@dataclass
class BoxplotStats:
    """Quartiles, 1.5-IQR whiskers, outliers and the mean marker."""

    q1: float
    median: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    mean: float
    outliers: list[float] = field(default_factory=list)


@dataclass
class PairedTestResult:
    t_statistic: float
    p_value: float
    cohens_d: float
    n_pairs: int
    degenerate: str = ""  # "", "zero-differences", "constant-differences"


def summarize(values: Sequence[float]) -> SummaryStats:
    """Sample statistics; SD uses the n-1 divisor (0 for a single value).

    Median and IQR use the projection module's linear-interpolation
    quantile, so score tables and projected pixels share one convention.
    """
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise EmptySampleError("summarize needs at least one value")
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return SummaryStats(
        n=int(v.size),
        min=float(v.min()),
        max=float(v.max()),
        mean=float(v.mean()),
        sd=sd,
        median=values_quantile(v, 0.5),
        iqr=values_quantile(v, 0.75) - values_quantile(v, 0.25),
    )


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise EmptySampleError("boxplot_stats needs at least one value")
    q1 = values_quantile(v, 0.25)
    q3 = values_quantile(v, 0.75)
    span = 1.5 * (q3 - q1)
    inside = v[(v >= q1 - span) & (v <= q3 + span)]
    outliers = v[(v < q1 - span) | (v > q3 + span)]
    return BoxplotStats(
        q1=q1,
        median=values_quantile(v, 0.5),
        q3=q3,
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        mean=float(v.mean()),
        outliers=sorted(outliers.tolist()),
    )


def stratify(
    records: Iterable[ScoredCell], key: str = "projection"
) -> dict[str, tuple[SummaryStats, BoxplotStats]]:
    """Group scores by a cell attribute and summarize each group."""
    groups: dict[str, list[float]] = defaultdict(list)
    for r in records:
        groups[getattr(r, key)].append(r.score)
    if not groups:
        raise EmptySampleError("no records to stratify")
    return {k: (summarize(v), boxplot_stats(v)) for k, v in sorted(groups.items())}


def student_t_cdf(t: float, df: int) -> float:
    """CDF of Student's t with df degrees of freedom."""
    return float(special.stdtr(df, t))


def paired_test(x: Sequence[float], y: Sequence[float]) -> PairedTestResult:
    """Paired t-test on x - y with Cohen's d = mean(d) / sd(d).

    Degenerate cases are flagged rather than raised: all-zero
    differences report (t=0, p=1, d=0); constant nonzero differences
    report infinite t and d with p=0.
    """
    x = np.asarray(list(x), dtype=np.float64)
    y = np.asarray(list(y), dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("paired_test needs two equal-length samples, n >= 2")
    d = x - y
    n = d.size
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return PairedTestResult(0.0, 1.0, 0.0, n, degenerate="zero-differences")
        sign = math.copysign(1.0, mean)
        return PairedTestResult(
            sign * math.inf, 0.0, sign * math.inf, n, degenerate="constant-differences"
        )
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * student_t_cdf(-abs(t), n - 1)
    return PairedTestResult(t, p, mean / sd, n)


# ---------------------------------------------------------------------------
# report tables

def sp_ap_tests(records: Iterable[ScoredCell]) -> list[dict]:
    """Sum-vs-mean projection paired tests, per metric and sequence.

    Scores pair by (video, sequence) within each metric; an "ALL" row
    pools every sequence. Rows with fewer than two complete pairs are
    skipped.
    """
    by_key: dict[tuple[str, str, str, str], float] = {}
    metrics: set[str] = set()
    sequences: set[str] = set()
    for r in records:
        if r.projection in ("SP", "AP"):
            by_key[(r.metric, r.sequence, r.video_id, r.projection)] = r.score
            metrics.add(r.metric)
            sequences.add(r.sequence)

    def collect(metric: str, seqs: Sequence[str]) -> tuple[list[float], list[float]]:
        xs, ys = [], []
        pairs = sorted(
            {(s, v) for (m, s, v, p) in by_key if m == metric and s in seqs}
        )
        for s, v in pairs:
            sp = by_key.get((metric, s, v, "SP"))
            ap = by_key.get((metric, s, v, "AP"))
            if sp is not None and ap is not None:
                xs.append(sp)
                ys.append(ap)
        return xs, ys

    rows = []
    for metric in sorted(metrics):
        for seq in ["ALL", *sorted(sequences)]:
            seqs = sorted(sequences) if seq == "ALL" else [seq]
            xs, ys = collect(metric, seqs)
            if len(xs) < 2:
                continue
            res = paired_test(xs, ys)
            rows.append(
                {
                    "metric": metric,
                    "sequence": seq,
                    "n_pairs": res.n_pairs,
                    "t": res.t_statistic,
                    "p": res.p_value,
                    "cohens_d": res.cohens_d,
                    "degenerate": res.degenerate,
                }
            )
    return rows


def rank_pipelines(records: Iterable[ScoredCell], top: int = 10) -> list[dict]:
    """Best pipelines per metric by mean min-max-normalized score.

    Scores are normalized per metric over the whole record set so the
    three metrics rank on a common [0, 1] scale; lower is better.
    """
    records = list(records)
    by_metric: dict[str, list[ScoredCell]] = defaultdict(list)
    for r in records:
        by_metric[r.metric].append(r)
    rows = []
    for metric in sorted(by_metric):
        recs = by_metric[metric]
        scores = np.array([r.score for r in recs])
        lo, hi = scores.min(), scores.max()
        span = hi - lo if hi > lo else 1.0
        grouped: dict[tuple[str, str], list[float]] = defaultdict(list)
        for r, s in zip(recs, (scores - lo) / span):
            grouped[(r.sequence, r.projection)].append(float(s))
        ranking = sorted(
            ((float(np.mean(v)), k, len(v)) for k, v in grouped.items()),
            key=lambda item: (item[0], item[1]),
        )
        for rank, (mean_norm, (seq, proj), n) in enumerate(ranking[:top], start=1):
            rows.append(
                {
                    "metric": metric,
                    "rank": rank,
                    "sequence": seq,
                    "projection": proj,
                    "mean_normalized_score": mean_norm,
                    "n": n,
                }
            )
    return rows


def write_report(
    records: Sequence[ScoredCell], out_dir: Path | str, top: int = 10
) -> dict[str, Path]:
    """Write the four report CSVs and return their paths."""
    if not records:
        raise EmptySampleError("no scored records to report on")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_metric: dict[str, list[float]] = defaultdict(list)
    for r in records:
        by_metric[r.metric].append(r.score)
    desc_path = out_dir / "descriptive_stats.csv"
    with desc_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "n", "min", "max", "mean", "sd", "median", "iqr"])
        for metric in sorted(by_metric):
            s = summarize(by_metric[metric])
            w.writerow([
                metric, s.n, f"{s.min:.6g}", f"{s.max:.6g}", f"{s.mean:.6g}",
                f"{s.sd:.6g}", f"{s.median:.6g}", f"{s.iqr:.6g}",
            ])

    box_path = out_dir / "projection_boxplots.csv"
    with box_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "metric", "projection", "n", "mean", "q1", "median", "q3",
            "whisker_lo", "whisker_hi", "n_outliers", "outliers",
        ])
        for metric in sorted({r.metric for r in records}):
            strata = stratify([r for r in records if r.metric == metric])
            for proj, (summ, box) in strata.items():
                w.writerow([
                    metric, proj, summ.n, f"{box.mean:.6g}", f"{box.q1:.6g}",
                    f"{box.median:.6g}", f"{box.q3:.6g}", f"{box.whisker_lo:.6g}",
                    f"{box.whisker_hi:.6g}", len(box.outliers),
                    ";".join(f"{o:.6g}" for o in box.outliers),
                ])

    test_path = out_dir / "sp_ap_tests.csv"
    with test_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "sequence", "n_pairs", "t", "p", "cohens_d", "degenerate"])
        for row in sp_ap_tests(records):
            w.writerow([
                row["metric"], row["sequence"], row["n_pairs"],
                f"{row['t']:.6g}", f"{row['p']:.6g}", f"{row['cohens_d']:.6g}",
                row["degenerate"],
            ])

    rank_path = out_dir / "top_pipelines.csv"
    with rank_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "rank", "sequence", "projection", "mean_normalized_score", "n"])
        for row in rank_pipelines(records, top=top):
            w.writerow([
                row["metric"], row["rank"], row["sequence"], row["projection"],
                f"{row['mean_normalized_score']:.6g}", row["n"],
            ])

    return {
        "descriptive": desc_path,
        "boxplots": box_path,
        "sp_ap": test_path,
        "ranking": rank_path,
    }
