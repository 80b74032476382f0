"""Rebuild the bundled default models under src/stackfuse/models/.

The naturalness model is fit on the bundled pristine corpus. The quality
regressor is an RBF support-vector machine trained (via scikit-learn,
script-time only) on distorted versions of the corpus with targets that
grow with distortion strength, then exported to the package's own model
format so prediction needs nothing beyond numpy.
"""

from pathlib import Path

import numpy as np
from sklearn.svm import SVR

from stackfuse import assets
from stackfuse.iqa import BrisqueModel, brisque_features, fit_niqe_model
from stackfuse.iqa.brisque import KIND_SVR

MODEL_DIR = Path(__file__).resolve().parents[1] / "src" / "stackfuse" / "models"

NOISE_SIGMAS = (2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0)
BLUR_SIGMAS = (0.75, 1.5, 3.0)


def add_noise(img: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    noisy = img.astype(np.float64) + rng.normal(0.0, sigma, img.shape)
    return np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)


def blur(img: np.ndarray, sigma: float) -> np.ndarray:
    from scipy import ndimage

    out = ndimage.gaussian_filter(img.astype(np.float64), sigma, mode="nearest")
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def training_set(corpus: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    feats, targets = [], []
    for idx, img in enumerate(corpus):
        feats.append(brisque_features(img))
        targets.append(0.0)
        for sigma in NOISE_SIGMAS:
            rng = np.random.default_rng(1000 * idx + int(sigma * 10))
            feats.append(brisque_features(add_noise(img, sigma, rng)))
            targets.append(sigma)
        for sigma in BLUR_SIGMAS:
            feats.append(brisque_features(blur(img, sigma)))
            targets.append(8.0 * sigma)
    return np.array(feats), np.array(targets)


def export_svr(svr: SVR, lo: np.ndarray, hi: np.ndarray) -> BrisqueModel:
    return BrisqueModel(
        kind=KIND_SVR,
        feature_lo=lo,
        feature_hi=hi,
        support_vectors=svr.support_vectors_.copy(),
        dual_coef=svr.dual_coef_.ravel().copy(),
        rbf_gamma=float(svr._gamma),
        intercept=float(svr.intercept_[0]),
    )


def main() -> None:
    MODEL_DIR.mkdir(parents=True, exist_ok=True)
    corpus = assets.pristine_corpus()

    print(f"fitting niqe model on {len(corpus)} pristine images ...")
    niqe_model = fit_niqe_model(corpus)
    path = niqe_model.save(MODEL_DIR / assets.NIQE_MODEL_FILE)
    print(f"  wrote {path}")

    print("building brisque training set ...")
    feats, targets = training_set(corpus)
    lo, hi = feats.min(axis=0), feats.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scaled = 2.0 * (feats - lo) / span - 1.0
    svr = SVR(kernel="rbf", C=100.0, gamma="scale", epsilon=0.5)
    svr.fit(scaled, targets)
    model = export_svr(svr, lo, hi)
    # sanity: exported predictor must reproduce sklearn on the training set
    ours = np.array([model.predict(f) for f in feats])
    theirs = svr.predict(scaled)
    assert np.allclose(ours, theirs, atol=1e-8), "export mismatch"
    path = model.save(MODEL_DIR / assets.BRISQUE_MODEL_FILE)
    print(f"  wrote {path} ({len(model.dual_coef)} support vectors, "
          f"train rmse {np.sqrt(np.mean((ours - targets) ** 2)):.2f})")


if __name__ == "__main__":
    main()
