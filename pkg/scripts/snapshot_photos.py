"""Snapshot the bundled photo set from scikit-image's sample data.

Writes the grayscale PNGs under src/stackfuse/data/. Only needed when
refreshing the bundled assets; scikit-image is not a package dependency.
"""

from pathlib import Path

import numpy as np
import skimage.data
from PIL import Image

DEST = Path(__file__).resolve().parents[1] / "src" / "stackfuse" / "data"
NAMES = ("camera", "moon", "coins", "text", "page", "clock", "brick", "grass")


def main() -> None:
    DEST.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        img = getattr(skimage.data, name)()
        if img.ndim == 3:
            img = np.floor(img[..., :3] @ [0.299, 0.587, 0.114] + 0.5).astype(np.uint8)
        Image.fromarray(img.astype(np.uint8), mode="L").save(DEST / f"{name}.png")
        print(f"{name}: {img.shape}")


if __name__ == "__main__":
    main()
