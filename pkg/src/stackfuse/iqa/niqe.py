"""Naturalness score: distance of an image's NSS statistics from a
model fitted on pristine images only (no subjective scores involved).

Features are the 18 per-patch AGGD statistics at full and half scale
(36 total). The model is the multivariate Gaussian of those features
over sharp patches of the pristine corpus; scoring computes the
Mahalanobis-type distance between the model and the test image's own
feature Gaussian.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import CorpusTooSmallError, ModelMissingError, TooSmallError
from .features import half_downsample, mscn_with_sigma, niqe_patch_features

FORMAT_NAME = "stackfuse-niqe-model"
FORMAT_VERSION = 1

DEFAULT_PATCH_SIZE = 96
DEFAULT_SHARPNESS_THRESHOLD = 0.75
MIN_CORPUS = 10

# covariance regularizer: eps = REG_SCALE * trace / dim
REG_SCALE = 1e-6


@dataclass
class NiqeModel:
    """Mean and covariance of pristine NSS features."""

    mean: np.ndarray
    cov: np.ndarray
    patch_size: int = DEFAULT_PATCH_SIZE
    sharpness_threshold: float = DEFAULT_SHARPNESS_THRESHOLD

    def save(self, path: Path | str) -> Path:
        path = Path(path)
        doc = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "patch_size": self.patch_size,
            "sharpness_threshold": self.sharpness_threshold,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }
        path.write_text(json.dumps(doc))
        return path

    @classmethod
    def load(cls, path: Path | str) -> "NiqeModel":
        path = Path(path)
        if not path.exists():
            raise ModelMissingError(f"niqe model not found: {path}")
        doc = json.loads(path.read_text())
        if doc.get("format") != FORMAT_NAME:
            raise ModelMissingError(f"{path}: not a niqe model file")
        if doc.get("version") != FORMAT_VERSION:
            raise ModelMissingError(f"{path}: unsupported version {doc.get('version')}")
        return cls(
            mean=np.array(doc["mean"], dtype=np.float64),
            cov=np.array(doc["cov"], dtype=np.float64),
            patch_size=int(doc["patch_size"]),
            sharpness_threshold=float(doc["sharpness_threshold"]),
        )


def _patch_grid(shape: tuple[int, int], size: int) -> list[tuple[int, int]]:
    ny, nx = shape[0] // size, shape[1] // size
    return [(i * size, j * size) for i in range(ny) for j in range(nx)]


def _image_features(img: np.ndarray, patch_size: int, select_sharp: bool, threshold: float) -> np.ndarray:
    """36-dim feature rows, one per patch; optionally only sharp patches."""
    img = np.asarray(img, dtype=np.float64)
    if min(img.shape) < patch_size:
        raise TooSmallError(f"image {img.shape} smaller than patch size {patch_size}")
    coeffs1, sigma1 = mscn_with_sigma(img)
    coeffs2, _ = mscn_with_sigma(half_downsample(img))

    cells = _patch_grid(img.shape, patch_size)
    if select_sharp:
        sharpness = np.array(
            [sigma1[y : y + patch_size, x : x + patch_size].mean() for y, x in cells]
        )
        keep = sharpness >= threshold * sharpness.max()
    else:
        keep = np.ones(len(cells), dtype=bool)

    half = patch_size // 2
    rows = []
    for use, (y, x) in zip(keep, cells):
        if not use:
            continue
        f1 = niqe_patch_features(coeffs1[y : y + patch_size, x : x + patch_size])
        f2 = niqe_patch_features(coeffs2[y // 2 : y // 2 + half, x // 2 : x // 2 + half])
        rows.append(np.concatenate([f1, f2]))
    return np.array(rows)


def fit_niqe_model(
    corpus: Sequence[np.ndarray],
    patch_size: int = DEFAULT_PATCH_SIZE,
    sharpness_threshold: float = DEFAULT_SHARPNESS_THRESHOLD,
) -> NiqeModel:
    """Fit the pristine-feature Gaussian over a corpus of images.

    Needs at least 10 images, each at least patch_size on both sides.
    Patch selection keeps, per image, the patches whose mean local sigma
    reaches the threshold fraction of the image's sharpest patch.
    """
    if len(corpus) < MIN_CORPUS:
        raise CorpusTooSmallError(f"need >= {MIN_CORPUS} images, got {len(corpus)}")
    rows = []
    for img in corpus:
        img = np.asarray(img, dtype=np.float64)
        if min(img.shape) < patch_size:
            raise CorpusTooSmallError(
                f"corpus image {img.shape} smaller than patch size {patch_size}"
            )
        rows.append(_image_features(img, patch_size, True, sharpness_threshold))
    feats = np.concatenate(rows, axis=0)
    mean = feats.mean(axis=0)
    cov = np.cov(feats, rowvar=False) if feats.shape[0] > 1 else np.zeros((36, 36))
    return NiqeModel(mean=mean, cov=cov, patch_size=patch_size, sharpness_threshold=sharpness_threshold)


def niqe(img: np.ndarray, model: NiqeModel) -> float:
    """Distance of the image's feature Gaussian from the pristine model."""
    if model is None:
        raise ModelMissingError("niqe requires a fitted model")
    feats = _image_features(
        np.asarray(img, dtype=np.float64), model.patch_size, False, model.sharpness_threshold
    )
    sample_mean = feats.mean(axis=0)
    sample_cov = (
        np.cov(feats, rowvar=False) if feats.shape[0] > 1 else np.zeros_like(model.cov)
    )
    pooled = (model.cov + sample_cov) / 2.0
    dim = pooled.shape[0]
    eps = REG_SCALE * np.trace(pooled) / dim
    pooled = pooled + eps * np.eye(dim)
    diff = model.mean - sample_mean
    dist_sq = diff @ np.linalg.pinv(pooled) @ diff
    return float(np.sqrt(max(dist_sq, 0.0)))
