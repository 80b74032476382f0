"""Learning-based spatial quality score.

36 NSS features (GGD + paired-product AGGD statistics at two scales)
feed a trained regressor. The regressor ships as a model file: either an
RBF support-vector machine exported from an external trainer, or a plain
linear model fit on (features, score) pairs via
:func:`fit_linear_brisque_model`. Prediction is self-contained numpy and
deterministic; scores are unbounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ModelMissingError
from .features import brisque_scale_features, half_downsample, mscn

FORMAT_NAME = "stackfuse-brisque-model"
FORMAT_VERSION = 1

KIND_SVR = "svr-rbf"
KIND_LINEAR = "linear"

N_FEATURES = 36


def brisque_features(img: np.ndarray) -> np.ndarray:
    """36-dim NSS feature vector: 18 at full scale, 18 at half scale."""
    img = np.asarray(img, dtype=np.float64)
    f1 = brisque_scale_features(mscn(img))
    f2 = brisque_scale_features(mscn(half_downsample(img)))
    return np.concatenate([f1, f2])


@dataclass
class BrisqueModel:
    """Feature scaling ranges plus regressor parameters."""

    kind: str
    feature_lo: np.ndarray
    feature_hi: np.ndarray
    # svr-rbf
    support_vectors: np.ndarray | None = None
    dual_coef: np.ndarray | None = None
    rbf_gamma: float = 0.0
    # shared
    intercept: float = 0.0
    weights: np.ndarray | None = field(default=None)  # linear

    def scale(self, feats: np.ndarray) -> np.ndarray:
        """Map raw features into [-1, 1] using the training ranges."""
        span = self.feature_hi - self.feature_lo
        span = np.where(span == 0.0, 1.0, span)
        return 2.0 * (feats - self.feature_lo) / span - 1.0

    def predict(self, feats: np.ndarray) -> float:
        x = self.scale(np.asarray(feats, dtype=np.float64))
        if self.kind == KIND_SVR:
            d2 = np.sum((self.support_vectors - x) ** 2, axis=1)
            return float(self.dual_coef @ np.exp(-self.rbf_gamma * d2) + self.intercept)
        return float(self.weights @ x + self.intercept)

    def save(self, path: Path | str) -> Path:
        path = Path(path)
        doc = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "feature_lo": self.feature_lo.tolist(),
            "feature_hi": self.feature_hi.tolist(),
            "intercept": self.intercept,
        }
        if self.kind == KIND_SVR:
            doc["support_vectors"] = self.support_vectors.tolist()
            doc["dual_coef"] = self.dual_coef.tolist()
            doc["rbf_gamma"] = self.rbf_gamma
        else:
            doc["weights"] = self.weights.tolist()
        path.write_text(json.dumps(doc))
        return path

    @classmethod
    def load(cls, path: Path | str) -> "BrisqueModel":
        path = Path(path)
        if not path.exists():
            raise ModelMissingError(f"brisque model not found: {path}")
        doc = json.loads(path.read_text())
        if doc.get("format") != FORMAT_NAME:
            raise ModelMissingError(f"{path}: not a brisque model file")
        if doc.get("version") != FORMAT_VERSION:
            raise ModelMissingError(f"{path}: unsupported version {doc.get('version')}")
        kind = doc["kind"]
        if kind not in (KIND_SVR, KIND_LINEAR):
            raise ModelMissingError(f"{path}: unknown regressor kind {kind!r}")
        model = cls(
            kind=kind,
            feature_lo=np.array(doc["feature_lo"], dtype=np.float64),
            feature_hi=np.array(doc["feature_hi"], dtype=np.float64),
            intercept=float(doc["intercept"]),
        )
        if kind == KIND_SVR:
            model.support_vectors = np.array(doc["support_vectors"], dtype=np.float64)
            model.dual_coef = np.array(doc["dual_coef"], dtype=np.float64)
            model.rbf_gamma = float(doc["rbf_gamma"])
        else:
            model.weights = np.array(doc["weights"], dtype=np.float64)
        return model


def fit_linear_brisque_model(
    features: Sequence[np.ndarray], scores: Sequence[float]
) -> BrisqueModel:
    """Least-squares linear regressor on scaled features.

    The fallback trainer for when no externally trained SVR is
    available; any (features, score) pairs will do.
    """
    feats = np.asarray(features, dtype=np.float64)
    y = np.asarray(scores, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != N_FEATURES or feats.shape[0] != y.size:
        raise ValueError(f"expected (n, {N_FEATURES}) features and n scores")
    lo = feats.min(axis=0)
    hi = feats.max(axis=0)
    model = BrisqueModel(kind=KIND_LINEAR, feature_lo=lo, feature_hi=hi)
    x = model.scale(feats)
    design = np.hstack([x, np.ones((x.shape[0], 1))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    model.weights = coef[:-1]
    model.intercept = float(coef[-1])
    return model


def brisque(img: np.ndarray, model: BrisqueModel) -> float:
    """Predicted perceptual quality; lower is better, range unbounded."""
    if model is None:
        raise ModelMissingError("brisque requires a trained model")
    return model.predict(brisque_features(img))
