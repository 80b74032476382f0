"""Temporal projections: collapse a T x H x W stack to one H x W image.

Each projection reduces the stack per pixel along the temporal axis:

====  =========================================================
SP    sum of intensities (values may exceed 255 before scaling)
AP    mean
MIP   maximum
PDP   index of the maximum (first frame on ties)
SDP   population standard deviation
QP    linear-interpolation quantile, default q = 0.75
MDP   median (QP at q = 0.5)
IQR   inter-quartile range (Q75 - Q25)
====  =========================================================

Results are real-valued; :func:`normalize_8bit` min-max scales them to
[0, 255] for writing and scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownProjectionError
from .stackio import FrameStack

PROJECTIONS: tuple[str, ...] = ("SP", "AP", "MIP", "PDP", "SDP", "QP", "MDP", "IQR")

#: the default grid runs these six; MDP and IQR are available on request
DEFAULT_PROJECTIONS: tuple[str, ...] = ("SP", "AP", "MIP", "PDP", "SDP", "QP")

_ALIASES = {
    "sum": "SP",
    "mean": "AP",
    "average": "AP",
    "max": "MIP",
    "peak": "PDP",
    "argmax": "PDP",
    "stdev": "SDP",
    "std": "SDP",
    "stdp": "SDP",
    "quantile": "QP",
    "median": "MDP",
    "iqr": "IQR",
}

# Half-integer rounding ties must resolve identically for images that are
# positive rescalings of each other (e.g. a sum vs a mean projection), so
# the half-up rule gets a nudge well above float64 noise but far below the
# 1/(2*range) gap separating genuine ties from near-ties on integer stacks.
_TIE_EPS = 2.0**-26


def canonical_projection(token: str) -> str:
    """Resolve a projection token or alias to its canonical id."""
    t = token.strip()
    if t.upper() in PROJECTIONS:
        return t.upper()
    if t.lower() in _ALIASES:
        return _ALIASES[t.lower()]
    raise UnknownProjectionError(f"unknown projection {token!r}")


@dataclass
class ProjectedImage:
    """Real-valued fusion result plus how it was produced."""

    data: np.ndarray
    projection_id: str
    source_T: int
    quantile: float | None = None
    norm_record: tuple[float, float] | None = None


def _sequential_sum(frames: np.ndarray) -> np.ndarray:
    # plain left-to-right accumulation: bit-reproducible by a per-pixel loop
    acc = frames[0].astype(np.float64, copy=True)
    for t in range(1, frames.shape[0]):
        acc += frames[t]
    return acc


def stack_quantile(frames: np.ndarray, q: float) -> np.ndarray:
    """Per-pixel linear-interpolation quantile at rank q * (T - 1)."""
    s = np.sort(frames, axis=0)
    t = s.shape[0]
    rank = q * (t - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, t - 1)
    frac = rank - lo
    return s[lo] + frac * (s[hi] - s[lo])


def values_quantile(values, q: float) -> float:
    """The same quantile convention for a 1-D sample."""
    s = np.sort(np.asarray(values, dtype=np.float64).ravel())
    rank = q * (s.size - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, s.size - 1)
    frac = rank - lo
    return float(s[lo] + frac * (s[hi] - s[lo]))


def project(stack: FrameStack | np.ndarray, projection: str, q: float = 0.75) -> ProjectedImage:
    """Reduce the stack with the named projection.

    ``q`` only affects QP. SDP of a single frame is all zeros (population
    convention); PDP ties break toward the earliest frame.
    """
    pid = canonical_projection(projection)
    frames = stack.frames() if isinstance(stack, FrameStack) else np.asarray(stack, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[0] < 1:
        raise ValueError(f"expected a T x H x W stack, got shape {frames.shape}")
    t = frames.shape[0]

    if pid == "SP":
        data = _sequential_sum(frames)
    elif pid == "AP":
        data = _sequential_sum(frames) / t
    elif pid == "MIP":
        data = frames.max(axis=0)
    elif pid == "PDP":
        data = frames.argmax(axis=0).astype(np.float64)
    elif pid == "SDP":
        mean = _sequential_sum(frames) / t
        sq = (frames - mean) ** 2
        # ascending accumulation: frame order cannot leak into the result
        sq.sort(axis=0)
        acc = sq[0].copy()
        for k in range(1, t):
            acc += sq[k]
        data = np.sqrt(acc / t)
    elif pid == "QP":
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile must be in (0, 1), got {q}")
        data = stack_quantile(frames, q)
    elif pid == "MDP":
        data = stack_quantile(frames, 0.5)
    else:  # IQR
        data = stack_quantile(frames, 0.75) - stack_quantile(frames, 0.25)
    return ProjectedImage(
        data=data,
        projection_id=pid,
        source_T=t,
        quantile=q if pid == "QP" else None,
    )


def normalize_8bit(img: ProjectedImage | np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 255] and round half-up to uint8.

    Constant images map to all zeros. When given a ProjectedImage its
    ``norm_record`` is filled with the (min, max) used.
    """
    arr = img.data if isinstance(img, ProjectedImage) else np.asarray(img, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot normalize non-finite values")
    lo = float(arr.min())
    hi = float(arr.max())
    if isinstance(img, ProjectedImage):
        img.norm_record = (lo, hi)
    if hi == lo:
        return np.zeros(arr.shape, dtype=np.uint8)
    scaled = (arr - lo) * (255.0 / (hi - lo))
    return np.floor(scaled + 0.5 + _TIE_EPS).astype(np.uint8)
