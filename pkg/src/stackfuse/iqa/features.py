"""Natural-scene-statistics front-end shared by the quality metrics.

MSCN coefficients, generalized Gaussian fits (symmetric and asymmetric)
and the per-scale feature vectors consumed by the NIQE and BRISQUE
scorers. The asymmetric fit uses the standard moment-matching estimator
with the shape parameter looked up on a dense grid (0.2 to 10, step
1e-3), which keeps results deterministic and easy to cross-check.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from ..errors import TooSmallError

MSCN_C = 1.0
_WINDOW_RADIUS = 3  # 7x7 window
_WINDOW_SIGMA = 7.0 / 6.0

_SHAPE_GRID = np.arange(0.2, 10.0 + 1e-3, 0.001)
# AGGD moment ratio r(a) = gamma(2/a)^2 / (gamma(1/a) gamma(3/a))
_R_AGGD = gamma_fn(2.0 / _SHAPE_GRID) ** 2 / (
    gamma_fn(1.0 / _SHAPE_GRID) * gamma_fn(3.0 / _SHAPE_GRID)
)
# GGD moment ratio rho(a) = gamma(1/a) gamma(3/a) / gamma(2/a)^2
_R_GGD = 1.0 / _R_AGGD

# limiting values reported for zero-energy inputs (e.g. constant images)
DEGENERATE_SHAPE = float(_SHAPE_GRID[-1])


def gaussian_window(radius: int = _WINDOW_RADIUS, sigma: float = _WINDOW_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is the outer product."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def mscn(img: np.ndarray) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients.

    ``(I - mu) / (sigma + 1)`` with 7x7 Gaussian-weighted local moments,
    border replicated. Requires H, W >= 7.
    """
    out, _ = mscn_with_sigma(img)
    return out


def mscn_with_sigma(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """MSCN coefficients plus the local sigma field (used for sharpness)."""
    img = np.asarray(img, dtype=np.float64)
    size = 2 * _WINDOW_RADIUS + 1
    if img.ndim != 2 or min(img.shape) < size:
        raise TooSmallError(f"mscn needs a 2-D image at least 7x7, got {img.shape}")
    w = gaussian_window()
    mu = ndimage.correlate1d(img, w, axis=0, mode="nearest")
    mu = ndimage.correlate1d(mu, w, axis=1, mode="nearest")
    m2 = ndimage.correlate1d(img * img, w, axis=0, mode="nearest")
    m2 = ndimage.correlate1d(m2, w, axis=1, mode="nearest")
    sigma = np.sqrt(np.abs(m2 - mu * mu))
    num = img - mu
    # a constant window has numerator and sigma exactly 0; clear the
    # last-ulp residue the normalized taps leave behind
    flat = ndimage.maximum_filter(img, size=size, mode="nearest") == ndimage.minimum_filter(
        img, size=size, mode="nearest"
    )
    num[flat] = 0.0
    sigma[flat] = 0.0
    return num / (sigma + MSCN_C), sigma


def half_downsample(img: np.ndarray) -> np.ndarray:
    """Halve resolution by 2x2 mean pooling (odd edges cropped)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[0] // 2 * 2, img.shape[1] // 2 * 2
    v = img[:h, :w]
    return (v[0::2, 0::2] + v[0::2, 1::2] + v[1::2, 0::2] + v[1::2, 1::2]) / 4.0


def paired_products(coeffs: np.ndarray) -> tuple[np.ndarray, ...]:
    """Horizontal, vertical and the two diagonal neighbor products.

    Neighbors come from cyclic shifts, matching the usual formulation;
    the wrapped border rows/columns are a negligible fraction of the
    samples entering the fits.
    """
    h = coeffs * np.roll(coeffs, 1, axis=1)
    v = coeffs * np.roll(coeffs, 1, axis=0)
    d1 = coeffs * np.roll(np.roll(coeffs, 1, axis=0), 1, axis=1)
    d2 = coeffs * np.roll(np.roll(coeffs, 1, axis=0), -1, axis=1)
    return h, v, d1, d2


def ggd_fit(vec: np.ndarray) -> tuple[float, float]:
    """Symmetric generalized Gaussian fit: (shape, variance)."""
    vec = np.asarray(vec, dtype=np.float64).ravel()
    var = float(np.mean(vec * vec))
    mean_abs = float(np.mean(np.abs(vec)))
    if var == 0.0 or mean_abs == 0.0:
        return DEGENERATE_SHAPE, 0.0
    rho = var / mean_abs**2
    shape = float(_SHAPE_GRID[np.argmin((_R_GGD - rho) ** 2)])
    return shape, var


def aggd_fit(vec: np.ndarray) -> tuple[float, float, float]:
    """Asymmetric generalized Gaussian fit: (shape, beta_left, beta_right).

    Moment matching on the two one-sided second moments; a zero-energy
    input returns the degenerate limiting values (grid max, 0, 0).
    """
    vec = np.asarray(vec, dtype=np.float64).ravel()
    left = vec[vec < 0]
    right = vec[vec > 0]
    left_sq = float(np.mean(left * left)) if left.size else 0.0
    right_sq = float(np.mean(right * right)) if right.size else 0.0
    mean_sq = float(np.mean(vec * vec))
    if mean_sq == 0.0:
        return DEGENERATE_SHAPE, 0.0, 0.0
    left_std = np.sqrt(left_sq)
    right_std = np.sqrt(right_sq)
    if right_std > 0.0:
        gamma_hat = left_std / right_std
    else:
        gamma_hat = np.inf
    r_hat = float(np.mean(np.abs(vec))) ** 2 / mean_sq
    if np.isinf(gamma_hat):
        r_hat_norm = r_hat
    else:
        r_hat_norm = (
            r_hat * (gamma_hat**3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat**2 + 1.0) ** 2
        )
    shape = float(_SHAPE_GRID[np.argmin((_R_AGGD - r_hat_norm) ** 2)])
    ratio = np.sqrt(gamma_fn(1.0 / shape) / gamma_fn(3.0 / shape))
    return shape, float(left_std * ratio), float(right_std * ratio)


def aggd_mean(shape: float, beta_left: float, beta_right: float) -> float:
    """Mean parameter eta of the asymmetric fit."""
    return (beta_right - beta_left) * (gamma_fn(2.0 / shape) / gamma_fn(1.0 / shape))


def niqe_patch_features(coeffs: np.ndarray) -> np.ndarray:
    """18 features of one MSCN patch: AGGD of the field + 4 products."""
    shape, bl, br = aggd_fit(coeffs)
    feats = [shape, (bl + br) / 2.0]
    for prod in paired_products(coeffs):
        s, l, r = aggd_fit(prod)
        feats.extend([s, aggd_mean(s, l, r), l, r])
    return np.array(feats)


def brisque_scale_features(coeffs: np.ndarray) -> np.ndarray:
    """18 features of one MSCN field: GGD of the field + 4 products."""
    shape, var = ggd_fit(coeffs)
    feats = [shape, var]
    for prod in paired_products(coeffs):
        s, l, r = aggd_fit(prod)
        feats.extend([s, aggd_mean(s, l, r), l * l, r * r])
    return np.array(feats)
