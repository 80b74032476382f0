"""Bundled assets: a small pristine-photo set and the default models.

The photos are classic public test photographs stored as 8-bit grayscale
PNGs; they seed the default naturalness model, train the bundled quality
regressor, and serve as known-good natural inputs in tests. Regenerate
the models with ``scripts/build_models.py``.
"""

from __future__ import annotations

from importlib import resources

import numpy as np
from PIL import Image

from .errors import ModelMissingError
from .iqa import BrisqueModel, NiqeModel

PHOTO_NAMES = ("camera", "moon", "coins", "text", "page", "clock", "brick", "grass")

NIQE_MODEL_FILE = "niqe_default.json"
BRISQUE_MODEL_FILE = "brisque_default.json"


def _data_root():
    return resources.files("stackfuse") / "data"


def _model_root():
    return resources.files("stackfuse") / "models"


def photo(name: str) -> np.ndarray:
    """One bundled grayscale photo as a uint8 array."""
    if name not in PHOTO_NAMES:
        raise KeyError(f"unknown photo {name!r}; available: {PHOTO_NAMES}")
    with resources.as_file(_data_root() / f"{name}.png") as path:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"))


def pristine_corpus() -> list[np.ndarray]:
    """Photos plus deterministic crops: the corpus behind the default models."""
    corpus = [photo(n) for n in PHOTO_NAMES]
    for name in ("camera", "moon", "brick", "grass"):
        img = photo(name)
        h, w = img.shape
        corpus.append(img[: h // 2, : w // 2].copy())
        corpus.append(img[h // 2 :, w // 2 :].copy())
    return corpus


def default_niqe_model() -> NiqeModel:
    path = _model_root() / NIQE_MODEL_FILE
    if not path.is_file():
        raise ModelMissingError(
            "bundled niqe model missing; run scripts/build_models.py"
        )
    with resources.as_file(path) as p:
        return NiqeModel.load(p)


def default_brisque_model() -> BrisqueModel:
    path = _model_root() / BRISQUE_MODEL_FILE
    if not path.is_file():
        raise ModelMissingError(
            "bundled brisque model missing; run scripts/build_models.py"
        )
    with resources.as_file(path) as p:
        return BrisqueModel.load(p)
