"""Frame-stack ingestion and image output.

A video is represented on disk as a directory of single-channel frame
images (PNG/PGM/TIFF); decoding of video containers is delegated to an
external frame extractor. Frames are ordered by the numeric tokens in
their filenames so that shuffled directory listings load identically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EmptyStackError, GeometryMismatchError

# ITU-R BT.601 luma weights for collapsing RGB inputs.
_LUMA = np.array([0.299, 0.587, 0.114])

_DIGITS = re.compile(r"(\d+)")


@dataclass
class FrameStack:
    """An ordered T x H x W stack of 8-bit grayscale frames.

    Frame order equals temporal acquisition order. The pixel buffer is
    frozen after construction so a stack can be shared across workers.
    """

    data: np.ndarray
    video_id: str
    bit_depth: int = 8
    sources: tuple[Path, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise GeometryMismatchError(
                f"stack must be T x H x W, got shape {self.data.shape}"
            )
        if self.data.shape[0] < 1:
            raise EmptyStackError("stack needs at least one frame")
        hi = 2**self.bit_depth - 1
        if self.data.min() < 0 or self.data.max() > hi:
            raise DecodeError(f"pixel values outside [0, {hi}]")
        self.data.setflags(write=False)

    @property
    def depth(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def frames(self) -> np.ndarray:
        """The stack as float64, the working precision of the operators."""
        return self.data.astype(np.float64)


def natural_key(name: str) -> tuple:
    """Sort key treating digit runs as numbers ("f9" before "f10").

    Falls back to the raw string as a final tie-break so the order is
    total even for names like "frame_7" vs "frame_07".
    """
    parts = _DIGITS.split(name)
    key: list = []
    for i, part in enumerate(parts):
        if i % 2:  # digit run
            key.append((0, int(part), ""))
        elif part:
            key.append((1, 0, part))
    key.append((1, 0, name))
    return tuple(key)


def read_gray(path: Path | str, channel: int | None = None) -> np.ndarray:
    """Decode one image file as an 8-bit grayscale array.

    Multi-channel inputs collapse via BT.601 luma unless ``channel``
    selects a specific band. Raises DecodeError when the file is not an
    image or not representable as 8-bit grayscale.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    if arr.ndim == 3:
        if channel is not None:
            if channel >= arr.shape[2]:
                raise DecodeError(f"{path}: channel {channel} out of range")
            arr = arr[:, :, channel]
        else:
            rgb = arr[:, :, :3].astype(np.float64)
            arr = np.floor(rgb @ _LUMA + 0.5)
    if arr.ndim != 2:
        raise DecodeError(f"{path}: expected a 2-D image, got shape {arr.shape}")
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if np.issubdtype(arr.dtype, np.floating):
        arr = np.floor(arr + 0.5)
    if arr.min() < 0 or arr.max() > 255:
        raise DecodeError(f"{path}: values outside 8-bit range")
    return arr.astype(np.uint8)


def load_stack(
    directory: Path | str,
    pattern: str = "*.png",
    video_id: str | None = None,
    channel: int | None = None,
) -> FrameStack:
    """Load every frame matching ``pattern`` into a FrameStack.

    Frames sort by the numeric tokens in their filenames. All frames
    must share one geometry; a mismatch names the offending file.
    """
    directory = Path(directory)
    paths = sorted(directory.glob(pattern), key=lambda p: natural_key(p.name))
    if not paths:
        raise EmptyStackError(f"no files matching {pattern!r} in {directory}")
    frames = []
    for p in paths:
        frame = read_gray(p, channel=channel)
        if frames and frame.shape != frames[0].shape:
            raise GeometryMismatchError(
                f"{p.name}: {frame.shape} != {frames[0].shape} of {paths[0].name}"
            )
        frames.append(frame)
    return FrameStack(
        data=np.stack(frames),
        video_id=video_id if video_id is not None else directory.name,
        sources=tuple(paths),
    )


def output_name(projection: str, video_id: str, ops: tuple[str, ...] | list[str]) -> str:
    """Canonical output filename: ``<projection>_<videoid>[_<op>...].png``."""
    return "_".join([projection, video_id, *ops]) + ".png"


def write_image(
    img: np.ndarray,
    out_dir: Path | str,
    projection: str,
    video_id: str,
    ops: tuple[str, ...] | list[str] = (),
) -> Path:
    """Write an 8-bit image as lossless grayscale PNG under the canonical name."""
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise ValueError("write_image expects a 2-D uint8 array")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / output_name(projection, video_id, tuple(ops))
    Image.fromarray(img, mode="L").save(path, format="PNG")
    return path
