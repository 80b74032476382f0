"""Generate a synthetic demo dataset: videos of oscillating bright blobs.

Each video is a directory of 8-bit grayscale PNG frames. Blob intensity
oscillates with per-blob phase and frequency so that no single frame
shows every blob at full brightness, which is exactly the situation the
temporal projections are for.
"""

import argparse
from pathlib import Path

import numpy as np
from PIL import Image


def render_video(
    out_dir: Path, frames: int, size: int, n_blobs: int, rng: np.random.Generator
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    cx = rng.uniform(0.1 * size, 0.9 * size, n_blobs)
    cy = rng.uniform(0.1 * size, 0.9 * size, n_blobs)
    radius = rng.uniform(0.04 * size, 0.10 * size, n_blobs)
    amp = rng.uniform(120, 220, n_blobs)
    freq = rng.uniform(0.5, 2.0, n_blobs)
    phase = rng.uniform(0, 2 * np.pi, n_blobs)

    profiles = [
        np.exp(-((ys - cy[i]) ** 2 + (xs - cx[i]) ** 2) / (2 * radius[i] ** 2))
        for i in range(n_blobs)
    ]
    for t in range(frames):
        u = t / max(frames - 1, 1)
        img = np.full((size, size), 12.0)
        for i in range(n_blobs):
            osc = 0.5 + 0.5 * np.sin(2 * np.pi * freq[i] * u * frames / 10 + phase[i])
            img += amp[i] * osc * profiles[i]
        img += rng.normal(0, 6.0, img.shape)
        img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
        Image.fromarray(img, mode="L").save(out_dir / f"frame_{t:04d}.png")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_dataset")
    ap.add_argument("--videos", type=int, default=2)
    ap.add_argument("--frames", type=int, default=12)
    ap.add_argument("--size", type=int, default=96)
    ap.add_argument("--blobs", type=int, default=7)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    root = Path(args.out)
    for v in range(args.videos):
        rng = np.random.default_rng(args.seed + v)
        vdir = root / f"video{v:02d}"
        render_video(vdir, args.frames, args.size, args.blobs, rng)
        print(f"{vdir}: {args.frames} frames of {args.size}x{args.size}")


if __name__ == "__main__":
    main()
