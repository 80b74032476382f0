"""Agreement metrics between two instance-segmentation masks.

Masks are integer rasters: 0 is background, positive values are instance
labels (not necessarily contiguous). Pixel-level agreement compares the
binary foregrounds; instance-level statistics count labels and their
pixel areas. Instances are never matched across masks, aggregate counts
and areas are compared instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import GeometryMismatchError
from .projections import values_quantile

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


@dataclass
class MaskComparison:
    """Field-per-column record for one (old, new) mask pair."""

    iou: float
    bg_mismatch_o: float
    bg_mismatch_n: float
    cell_count_o: int
    cell_count_n: int
    areas_o: list[int]
    areas_n: list[int]


def load_mask(path: Path | str) -> np.ndarray:
    """Read a labeled mask from an 8- or 16-bit single-channel PNG."""
    with Image.open(Path(path)) as im:
        arr = np.asarray(im)
    if arr.ndim != 2:
        raise GeometryMismatchError(f"{path}: mask must be single-channel, got {arr.shape}")
    return arr.astype(np.int64)


def _check_geometry(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise GeometryMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Foreground intersection-over-union in percent.

    Two empty foregrounds agree perfectly (100.0).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_geometry(a, b)
    fa = a > 0
    fb = b > 0
    union = np.logical_or(fa, fb).sum()
    if union == 0:
        return 100.0
    inter = np.logical_and(fa, fb).sum()
    return 100.0 * float(inter) / float(union)


def bg_mismatch(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Percent of pixels background in one mask but foreground in the other.

    Returns (background-in-a and foreground-in-b,
             background-in-b and foreground-in-a).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_geometry(a, b)
    total = a.size
    m_a = 100.0 * float(np.logical_and(a == 0, b > 0).sum()) / total
    m_b = 100.0 * float(np.logical_and(b == 0, a > 0).sum()) / total
    return m_a, m_b


def instance_stats(
    mask: np.ndarray, relabel: bool = False, connectivity: int = 8
) -> tuple[int, list[int]]:
    """Instance count and per-instance pixel areas, ordered by label.

    With ``relabel`` the existing labels are discarded and connected
    components of the binary foreground (8-connectivity by default)
    become the instances.
    """
    mask = np.asarray(mask)
    if relabel:
        structure = EIGHT_CONNECTED if connectivity == 8 else FOUR_CONNECTED
        mask, _ = ndimage.label(mask > 0, structure=structure)
    labels, counts = np.unique(mask[mask > 0], return_counts=True)
    return len(labels), counts.tolist()


def compare(a: np.ndarray, b: np.ndarray, relabel: bool = False) -> MaskComparison:
    """All pairwise metrics for an (old, new) mask pair."""
    cc_o, areas_o = instance_stats(a, relabel=relabel)
    cc_n, areas_n = instance_stats(b, relabel=relabel)
    m_o, m_n = bg_mismatch(a, b)
    return MaskComparison(
        iou=iou(a, b),
        bg_mismatch_o=m_o,
        bg_mismatch_n=m_n,
        cell_count_o=cc_o,
        cell_count_n=cc_n,
        areas_o=areas_o,
        areas_n=areas_n,
    )


# ---------------------------------------------------------------------------
# CSV emission

PAIR_FIELDS = (
    "pair_id", "iou", "bg_mismatch_o", "bg_mismatch_n",
    "cell_count_o", "cell_count_n", "mean_area_o", "mean_area_n",
)


def write_comparison_csvs(
    results: list[tuple[str, MaskComparison]], out_dir: Path | str
) -> dict[str, Path]:
    """Per-pair metrics, dataset summary, and raw per-instance areas.

    The areas file carries one row per instance so area distributions
    can be plotted externally.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs_path = out_dir / "gt_pairs.csv"
    summary_path = out_dir / "gt_summary.csv"
    areas_path = out_dir / "gt_areas.csv"

    with pairs_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PAIR_FIELDS)
        for pair_id, c in results:
            w.writerow([
                pair_id, f"{c.iou:.4f}", f"{c.bg_mismatch_o:.4f}", f"{c.bg_mismatch_n:.4f}",
                c.cell_count_o, c.cell_count_n,
                f"{np.mean(c.areas_o):.2f}" if c.areas_o else "",
                f"{np.mean(c.areas_n):.2f}" if c.areas_n else "",
            ])

    cols = {
        "iou": [c.iou for _, c in results],
        "bg_mismatch_o": [c.bg_mismatch_o for _, c in results],
        "bg_mismatch_n": [c.bg_mismatch_n for _, c in results],
        "mean_area_o": [np.mean(c.areas_o) for _, c in results if c.areas_o],
        "mean_area_n": [np.mean(c.areas_n) for _, c in results if c.areas_n],
        "cell_count_o": [c.cell_count_o for _, c in results],
        "cell_count_n": [c.cell_count_n for _, c in results],
    }
    with summary_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "mean", "p25", "median", "p75", "min", "max"])
        for name, vals in cols.items():
            if not vals:
                continue
            v = np.asarray(vals, dtype=np.float64)
            w.writerow([
                name, f"{v.mean():.4f}",
                f"{values_quantile(v, 0.25):.4f}", f"{values_quantile(v, 0.5):.4f}",
                f"{values_quantile(v, 0.75):.4f}", f"{v.min():.4f}", f"{v.max():.4f}",
            ])

    with areas_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair_id", "mask", "area"])
        for pair_id, c in results:
            for area in c.areas_o:
                w.writerow([pair_id, "old", area])
            for area in c.areas_n:
                w.writerow([pair_id, "new", area])

    return {"pairs": pairs_path, "summary": summary_path, "areas": areas_path}
