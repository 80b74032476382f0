"""Block-wise perceptual quality score.

Works on 16x16 blocks of the MSCN field: blocks with enough spatial
activity are inspected for two local distortions, near-constant edge
segments (noticeable artifacts) and center/surround deviation imbalance
(noise). The per-block penalties pool into a 0-100 score where higher
means more distorted.
"""

from __future__ import annotations

import numpy as np

from ..errors import NoActiveBlocksError, TooSmallError
from .features import mscn

BLOCK_SIZE = 16
ACTIVITY_THRESHOLD = 0.1
IMPAIRED_THRESHOLD = 0.1
SEGMENT_LENGTH = 6


def _edge_segments(edge: np.ndarray) -> np.ndarray:
    n = edge.size - SEGMENT_LENGTH + 1
    return np.stack([edge[i : i + SEGMENT_LENGTH] for i in range(n)])


def _has_impaired_segment(block: np.ndarray) -> bool:
    """Any near-constant sliding segment on one of the four block edges."""
    for edge in (block[0, :], block[:, -1], block[-1, :], block[:, 0]):
        stds = _edge_segments(edge).std(axis=1, ddof=1)
        if np.any(stds < IMPAIRED_THRESHOLD):
            return True
    return False


def _noise_criterion(block: np.ndarray, block_var: float) -> bool:
    """Gaussian-noise flag from the center/surround deviation ratio."""
    sigma = np.sqrt(block_var)
    c1 = BLOCK_SIZE // 2 - 1
    center = np.concatenate([block[:, c1], block[:, c1 + 1]])
    surround = np.delete(block, (c1, c1 + 1), axis=1)
    sur_std = surround.std(ddof=1)
    cen_sur = center.std(ddof=1) / sur_std if sur_std > 0 else 0.0
    if np.isnan(cen_sur):
        cen_sur = 0.0
    beta = abs(sigma - cen_sur) / max(sigma, cen_sur)
    return sigma > 2.0 * beta


def piqe(img: np.ndarray) -> float:
    """Perception-based quality score in [0, 100]; lower is better.

    Raises NoActiveBlocksError for images with no spatially active block
    (e.g. constant images), where the score is undefined.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < BLOCK_SIZE:
        raise TooSmallError(f"piqe needs at least 16x16, got {img.shape}")

    pad_h = (-img.shape[0]) % BLOCK_SIZE
    pad_w = (-img.shape[1]) % BLOCK_SIZE
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w)), mode="symmetric")

    coeffs = mscn(img)
    n_active = 0
    dist_score = 0.0
    for i in range(0, coeffs.shape[0], BLOCK_SIZE):
        for j in range(0, coeffs.shape[1], BLOCK_SIZE):
            block = coeffs[i : i + BLOCK_SIZE, j : j + BLOCK_SIZE]
            block_var = float(block.var(ddof=1))
            if block_var <= ACTIVITY_THRESHOLD:
                continue
            n_active += 1
            if _has_impaired_segment(block):
                dist_score += 1.0 - block_var
            if _noise_criterion(block, block_var):
                dist_score += block_var
    if n_active == 0:
        raise NoActiveBlocksError("no spatially active 16x16 blocks")
    score = (dist_score + 1.0) / (1.0 + n_active) * 100.0
    return float(np.clip(score, 0.0, 100.0))
