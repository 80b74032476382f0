"""No-reference image quality metrics: PIQE, NIQE and BRISQUE.

All three operate on 8-bit grayscale images and share the same natural
scene statistics front-end (mean-subtracted contrast-normalized
coefficients); for all of them lower scores mean higher quality.
"""

from dataclasses import dataclass

from .brisque import BrisqueModel, brisque, brisque_features, fit_linear_brisque_model
from .features import mscn
from .niqe import NiqeModel, fit_niqe_model, niqe
from .piqe import piqe

METRICS = ("piqe", "niqe", "brisque")


@dataclass(frozen=True)
class QualityRecord:
    """One score: (image reference, metric id, value). Lower is better."""

    image: str
    metric: str
    score: float


__all__ = [
    "BrisqueModel",
    "NiqeModel",
    "QualityRecord",
    "METRICS",
    "brisque",
    "brisque_features",
    "fit_linear_brisque_model",
    "fit_niqe_model",
    "mscn",
    "niqe",
    "piqe",
]
