"""Enumerate preprocessing sequences and execute the full processing grid.

A preprocessing sequence is 1-3 operator acronyms with at most one
operator per family; order matters. The grid is the Cartesian product
videos x sequences x projections; with the default families (2 + 2 + 3
operators) there are 7 + 32 + 72 = 111 sequences and 666 pipelines per
video. Each cell preprocesses every frame, projects the stack, min-max
normalizes to 8-bit and writes a PNG under the canonical name; failures
are recorded per cell without aborting the rest of the grid.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import preprocess, stackio
from . import projections as prj
from .errors import MissingManifestError, OverlappingFamiliesError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocSequence:
    """An ordered chain of 1-3 operator acronyms, one per family at most."""

    ops: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= len(self.ops) <= 3:
            raise ValueError(f"sequence length must be 1-3, got {len(self.ops)}")
        fams = [preprocess.family_of(op) for op in self.ops]
        if len(set(fams)) != len(fams):
            raise ValueError(f"at most one operator per family: {self.ops}")

    @property
    def token(self) -> str:
        return "_".join(self.ops)


@dataclass(frozen=True)
class PipelineSpec:
    """One grid cell recipe: a preprocessing sequence plus a projection."""

    seq: PreprocSequence
    projection: str

    @property
    def token(self) -> str:
        return f"{self.projection}_{self.seq.token}"


def enumerate_sequences(
    families: Mapping[str, Sequence[str]] | None = None,
    lengths: Iterable[int] = (1, 2, 3),
) -> list[PreprocSequence]:
    """All valid operator chains in canonical order.

    Canonical order: singles, then pairs, then triples. Within a length,
    family combinations follow the declared family order, operators the
    declared in-family order, and each operator combination expands into
    its permutations in itertools order. Empty families simply contribute
    no operators; duplicated acronyms across families are an error.
    """
    fams = dict(families) if families is not None else dict(preprocess.DEFAULT_FAMILIES)
    names = list(fams)
    all_ops = [op for ops in fams.values() for op in ops]
    if len(set(all_ops)) != len(all_ops):
        raise OverlappingFamiliesError(f"duplicate acronyms across families: {all_ops}")
    wanted = set(lengths)

    out: list[PreprocSequence] = []
    if 1 in wanted:
        for name in names:
            out.extend(PreprocSequence((op,)) for op in fams[name])
    if 2 in wanted:
        for fa, fb in combinations(names, 2):
            for a in fams[fa]:
                for b in fams[fb]:
                    out.extend(PreprocSequence(p) for p in permutations((a, b)))
    if 3 in wanted and len(names) >= 3:
        for fa, fb, fc in combinations(names, 3):
            for a in fams[fa]:
                for b in fams[fb]:
                    for c in fams[fc]:
                        out.extend(PreprocSequence(p) for p in permutations((a, b, c)))
    return out


def sequence_count(*sizes: int) -> int:
    """Closed form for the number of sequences given family sizes."""
    singles = sum(sizes)
    pairs = 2 * sum(a * b for a, b in combinations(sizes, 2))
    triples = 6 * int(np.prod(sizes)) if len(sizes) == 3 else 0
    if len(sizes) > 3:
        raise ValueError("at most three families")
    return singles + pairs + triples


# ---------------------------------------------------------------------------
# grid execution

MANIFEST_NAME = "manifest.csv"
MANIFEST_FIELDS = ("video_id", "sequence", "projection", "path", "status", "error")


@dataclass
class ManifestRow:
    video_id: str
    sequence: str
    projection: str
    path: str
    status: str  # "ok" | "error"
    error: str = ""


@dataclass
class RunManifest:
    rows: list[ManifestRow] = field(default_factory=list)

    @property
    def failed(self) -> list[ManifestRow]:
        return [r for r in self.rows if r.status != "ok"]

    def write_csv(self, path: Path | str) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(MANIFEST_FIELDS)
            for r in self.rows:
                w.writerow([r.video_id, r.sequence, r.projection, r.path, r.status, r.error])
        return path

    @classmethod
    def read_csv(cls, path: Path | str) -> "RunManifest":
        path = Path(path)
        if not path.exists():
            raise MissingManifestError(f"manifest not found: {path}")
        rows = []
        with path.open(newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(
                    ManifestRow(
                        video_id=rec["video_id"],
                        sequence=rec["sequence"],
                        projection=rec["projection"],
                        path=rec["path"],
                        status=rec["status"],
                        error=rec.get("error", ""),
                    )
                )
        return cls(rows)


def _run_cell(
    stack: stackio.FrameStack,
    seq: PreprocSequence,
    projections: Sequence[str],
    out_dir: Path,
    q: float,
    params: Mapping[str, object],
) -> list[ManifestRow]:
    """Preprocess once, then emit one output per projection."""
    rows = []
    try:
        frames = np.stack(
            [preprocess.apply_sequence(f, seq.ops, params) for f in stack.frames()]
        )
    except Exception as exc:  # noqa: BLE001 - fault isolation per cell
        log.warning("preprocess failed for %s %s: %s", stack.video_id, seq.token, exc)
        for pid in projections:
            rows.append(
                ManifestRow(stack.video_id, seq.token, pid, "", "error", repr(exc))
            )
        return rows
    for pid in projections:
        try:
            img = prj.normalize_8bit(prj.project(frames, pid, q=q))
            path = stackio.write_image(img, out_dir, pid, stack.video_id, seq.ops)
            rows.append(ManifestRow(stack.video_id, seq.token, pid, str(path), "ok"))
        except Exception as exc:  # noqa: BLE001
            log.warning("projection %s failed for %s %s: %s", pid, stack.video_id, seq.token, exc)
            rows.append(
                ManifestRow(stack.video_id, seq.token, pid, "", "error", repr(exc))
            )
    return rows


def run_grid(
    videos: Sequence[stackio.FrameStack],
    sequences: Sequence[PreprocSequence],
    projections: Sequence[str],
    out_dir: Path | str,
    q: float = 0.75,
    params: Mapping[str, object] | None = None,
    jobs: int = 1,
) -> RunManifest:
    """Execute every (video, sequence, projection) cell and write outputs.

    Cells are independent; with jobs > 1 they run on a thread pool. The
    manifest is sorted into grid order before it is returned, so results
    do not depend on scheduling.
    """
    if not videos or not sequences or not projections:
        raise ValueError("videos, sequences and projections must be non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    projections = [prj.canonical_projection(p) for p in projections]
    params = preprocess.resolve_params() if params is None else params

    # output filenames are keyed by (video, sequence, projection); any
    # duplicate would silently overwrite another cell's result
    for label, keys in (
        ("video ids", [v.video_id for v in videos]),
        ("sequence tokens", [s.token for s in sequences]),
        ("projections", projections),
    ):
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate {label} in grid: {sorted(keys)}")

    cells = [(v, s) for v in videos for s in sequences]
    log.info(
        "running grid: %d videos x %d sequences x %d projections = %d outputs",
        len(videos), len(sequences), len(projections),
        len(videos) * len(sequences) * len(projections),
    )

    def work(cell):
        v, s = cell
        return _run_cell(v, s, projections, out_dir, q, params)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, cells))
    else:
        chunks = [work(c) for c in cells]

    seq_index = {s.token: i for i, s in enumerate(sequences)}
    proj_index = {p: i for i, p in enumerate(projections)}
    video_index = {v.video_id: i for i, v in enumerate(videos)}
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(
        key=lambda r: (video_index[r.video_id], seq_index[r.sequence], proj_index[r.projection])
    )
    manifest = RunManifest(rows)
    manifest.write_csv(out_dir / MANIFEST_NAME)
    if manifest.failed:
        log.warning("%d grid cells failed", len(manifest.failed))
    return manifest
