"""Per-frame enhancement operators.

Three families, applied frame-wise before projection:

* equalisation -- tile-based contrast-limited histogram equalisation
  (``CL`` mild, ``CH`` aggressive),
* remap -- gamma intensity remapping (``GL`` brightens, ``GH`` darkens),
* filter -- median blur ``MB``, bilateral ``BF``, non-local means ``NF``.

Operators consume and produce H x W float64 rasters whose values live in
[0, 255]. The mathematical mappings below return real-valued outputs;
chained execution re-quantizes to integer levels between operators via
:func:`quantize8` so a chain's result does not depend on accumulated
sub-level residue from earlier steps.

All neighborhood filters replicate the border. Every operator is a pure
function of (image, params), safe for data-parallel maps across frames.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Callable, Mapping

import numpy as np
from scipy import ndimage

from .errors import BadGeometryError, BadKernelError, BadWindowError


def quantize8(img: np.ndarray) -> np.ndarray:
    """Round half-up to integer gray levels, clipped to [0, 255]."""
    return np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0.0, 255.0)


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class ClaheParams:
    clip_limit: float = 1.0
    tile_size: tuple[int, int] = (16, 16)
    gray_levels: int = 256

    def __post_init__(self):
        if self.clip_limit <= 0:
            raise ValueError("clip_limit must be positive")
        if min(self.tile_size) < 1:
            raise ValueError("tile_size entries must be >= 1")
        if self.gray_levels < 2:
            raise ValueError("gray_levels must be >= 2")


@dataclass(frozen=True)
class GammaParams:
    gamma: float = 1.0
    max_intensity: float = 255.0

    def __post_init__(self):
        if self.gamma <= 0 or self.max_intensity <= 0:
            raise ValueError("gamma and max_intensity must be positive")


@dataclass(frozen=True)
class MedianParams:
    size: int = 5


@dataclass(frozen=True)
class BilateralParams:
    diameter: int = 3
    sigma_color: float = 25.0
    sigma_space: float = 50.0

    def __post_init__(self):
        if self.diameter < 1:
            raise ValueError("diameter must be >= 1")
        if self.sigma_color <= 0 or self.sigma_space <= 0:
            raise ValueError("sigmas must be positive")


@dataclass(frozen=True)
class NlMeansParams:
    strength: float = 10.0
    template_window: int = 3
    search_window: int = 7

    def __post_init__(self):
        if self.strength <= 0:
            raise ValueError("strength must be positive")


# ---------------------------------------------------------------------------
# equalisation

def _tiled_bins(img: np.ndarray, p: ClaheParams):
    """Reflection-pad to whole tiles and bin pixel values per tile."""
    h, w = img.shape
    th, tw = p.tile_size
    if h < th or w < tw:
        raise BadGeometryError(f"image {h}x{w} smaller than one {th}x{tw} tile")
    work = np.pad(img, ((0, (-h) % th), (0, (-w) % tw)), mode="reflect")
    nty, ntx = work.shape[0] // th, work.shape[1] // tw
    nb = p.gray_levels
    bins = np.minimum((work.astype(np.int64) * nb) // 256, nb - 1)
    tiles = bins.reshape(nty, th, ntx, tw).transpose(0, 2, 1, 3).reshape(nty, ntx, -1)
    return bins, tiles, nty, ntx


def _clipped_histograms(tiles: np.ndarray, clip: int, nb: int) -> np.ndarray:
    """Per-tile histograms with bins capped at ``clip`` and the excess
    spread uniformly, remainder round-robin from bin 0."""
    nty, ntx, tile_pixels = tiles.shape
    offsets = (np.arange(nty * ntx) * nb)[:, None]
    flat = (tiles.reshape(nty * ntx, tile_pixels) + offsets).ravel()
    hists = np.bincount(flat, minlength=nty * ntx * nb).reshape(nty, ntx, nb)
    hists = np.minimum(hists, clip, dtype=np.int64)
    # each tile's histogram sums to tile_pixels, so what clipping removed
    # is the difference from that total
    excess = tile_pixels - hists.sum(axis=2)
    hists += (excess // nb)[:, :, None]
    rem = (excess % nb)[:, :, None]
    hists += np.arange(nb)[None, None, :] < rem
    return hists


def _clip_count(p: ClaheParams) -> int:
    tile_pixels = p.tile_size[0] * p.tile_size[1]
    return max(1, int(np.floor(p.clip_limit * tile_pixels / p.gray_levels + 0.5)))


def clahe(img: np.ndarray, p: ClaheParams) -> np.ndarray:
    """Contrast-limited adaptive histogram equalisation.

    The image is padded by reflection so non-overlapping tiles of
    ``p.tile_size`` cover it exactly. Each tile's histogram is clipped at
    ``max(1, round(clip_limit * tile_pixels / gray_levels))`` with the
    excess redistributed uniformly. Per-pixel output is the bilinear
    blend of the four surrounding tiles' equalisation maps.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    th, tw = p.tile_size
    bins, tiles, nty, ntx = _tiled_bins(img, p)
    nb = p.gray_levels
    clip = _clip_count(p)
    tile_pixels = th * tw

    # per-tile clipped histograms -> lookup tables (bin -> output level)
    hists = _clipped_histograms(tiles, clip, nb)
    luts = 255.0 * np.cumsum(hists, axis=2) / tile_pixels

    # bilinear blend between the four nearest tile mappings
    hp, wp = bins.shape
    fy = (np.arange(hp) + 0.5) / th - 0.5
    fx = (np.arange(wp) + 0.5) / tw - 0.5
    iy0 = np.clip(np.floor(fy).astype(np.int64), 0, nty - 1)
    ix0 = np.clip(np.floor(fx).astype(np.int64), 0, ntx - 1)
    iy1 = np.minimum(iy0 + 1, nty - 1)
    ix1 = np.minimum(ix0 + 1, ntx - 1)
    wy = np.clip(fy - np.floor(fy), 0.0, 1.0)[:, None]
    wx = np.clip(fx - np.floor(fx), 0.0, 1.0)[None, :]

    iy0 = iy0[:, None]
    iy1 = iy1[:, None]
    ix0 = ix0[None, :]
    ix1 = ix1[None, :]
    v00 = luts[iy0, ix0, bins]
    v01 = luts[iy0, ix1, bins]
    v10 = luts[iy1, ix0, bins]
    v11 = luts[iy1, ix1, bins]
    out = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11)
    return out[:h, :w]


def clahe_tile_histograms(img: np.ndarray, p: ClaheParams) -> tuple[np.ndarray, int, int]:
    """Clipped-and-redistributed per-tile histograms, plus (clip, nbins).

    Exposed for verification: after redistribution no bin may exceed
    clip + excess // nbins + 1.
    """
    img = np.asarray(img, dtype=np.float64)
    _, tiles, _, _ = _tiled_bins(img, p)
    nb = p.gray_levels
    clip = _clip_count(p)
    return _clipped_histograms(tiles, clip, nb), clip, nb


# ---------------------------------------------------------------------------
# pixel intensity re-mapping

def gamma_correct(img: np.ndarray, p: GammaParams) -> np.ndarray:
    """Remap intensities by ``out = I_m * (in / I_m) ** gamma``.

    Monotone with fixed endpoints: 0 -> 0 and I_m -> I_m. gamma < 1
    brightens, gamma > 1 darkens.
    """
    img = np.asarray(img, dtype=np.float64)
    return p.max_intensity * (img / p.max_intensity) ** p.gamma


# ---------------------------------------------------------------------------
# noise filters

def median_blur(img: np.ndarray, size: int = 5) -> np.ndarray:
    """Median over a size x size neighborhood, border replicated."""
    img = np.asarray(img, dtype=np.float64)
    if size % 2 == 0 or size < 1:
        raise BadKernelError(f"kernel size must be odd and positive, got {size}")
    if size > min(img.shape):
        raise BadKernelError(f"kernel size {size} exceeds image {img.shape}")
    return ndimage.median_filter(img, size=size, mode="nearest")


def bilateral(
    img: np.ndarray,
    diameter: int = 3,
    sigma_color: float = 25.0,
    sigma_space: float = 50.0,
) -> np.ndarray:
    """Edge-preserving weighted mean over a diameter-d square window.

    Weight of neighbor q for center p:
    ``exp(-(I_q - I_p)^2 / (2 sc^2)) * exp(-|q - p|^2 / (2 ss^2))``.
    Even diameters use the next odd window. Border replicated.
    """
    img = np.asarray(img, dtype=np.float64)
    r = diameter // 2
    padded = np.pad(img, r, mode="edge")
    num = np.zeros_like(img)
    den = np.zeros_like(img)
    inv2sc = 1.0 / (2.0 * sigma_color**2)
    inv2ss = 1.0 / (2.0 * sigma_space**2)
    h, w = img.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = padded[r + dy : r + dy + h, r + dx : r + dx + w]
            wgt = np.exp(-((shifted - img) ** 2) * inv2sc) * np.exp(
                -(dy * dy + dx * dx) * inv2ss
            )
            num += wgt * shifted
            den += wgt
    return num / den


def nl_means(
    img: np.ndarray,
    strength: float = 10.0,
    template_window: int = 3,
    search_window: int = 7,
) -> np.ndarray:
    """Non-local means: patch-similarity weighted average over a search window.

    The distance between two pixels is the mean squared difference of
    their template_window patches; the weight is ``exp(-dist / h^2)``
    (noise floor sigma = 0). The center pixel participates with weight 1.
    Border replicated.
    """
    img = np.asarray(img, dtype=np.float64)
    tws, sws, h2 = template_window, search_window, float(strength) ** 2
    if tws % 2 == 0 or sws % 2 == 0 or tws < 1 or sws < 1:
        raise BadWindowError(f"windows must be odd, got tws={tws} sws={sws}")
    if tws > sws:
        raise BadWindowError(f"template window {tws} exceeds search window {sws}")

    sr, pr = sws // 2, tws // 2
    hh, ww = img.shape
    work = np.pad(img, sr + pr, mode="edge")
    # patch field around each core pixel, including the template margin
    base = work[sr : sr + hh + 2 * pr, sr : sr + ww + 2 * pr]
    patch_n = tws * tws
    num = np.zeros_like(img)
    den = np.zeros_like(img)
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            cand = work[
                sr + dy : sr + dy + hh + 2 * pr, sr + dx : sr + dx + ww + 2 * pr
            ]
            sq = (base - cand) ** 2
            dist = np.zeros_like(img)
            for py in range(tws):
                for px in range(tws):
                    dist += sq[py : py + hh, px : px + ww]
            dist /= patch_n
            wgt = np.exp(-dist / h2)
            num += wgt * cand[pr : pr + hh, pr : pr + ww]
            den += wgt
    return num / den


# ---------------------------------------------------------------------------
# operator registry (acronym -> family, default parameters, callable)

FAMILY_EQUALISATION = "equalisation"
FAMILY_REMAP = "remap"
FAMILY_FILTER = "filter"

DEFAULT_FAMILIES: dict[str, tuple[str, ...]] = {
    FAMILY_EQUALISATION: ("CL", "CH"),
    FAMILY_REMAP: ("GL", "GH"),
    FAMILY_FILTER: ("MB", "BF", "NF"),
}

DEFAULT_PARAMS: dict[str, object] = {
    "CL": ClaheParams(clip_limit=1.0, tile_size=(16, 16)),
    "CH": ClaheParams(clip_limit=4.0, tile_size=(4, 4)),
    "GL": GammaParams(gamma=0.75),
    "GH": GammaParams(gamma=1.25),
    "MB": MedianParams(size=5),
    "BF": BilateralParams(diameter=3, sigma_color=25.0, sigma_space=50.0),
    "NF": NlMeansParams(strength=10.0, template_window=3, search_window=7),
}

_APPLY: dict[str, Callable[[np.ndarray, object], np.ndarray]] = {
    "CL": clahe,
    "CH": clahe,
    "GL": gamma_correct,
    "GH": gamma_correct,
    "MB": lambda img, p: median_blur(img, p.size),
    "BF": lambda img, p: bilateral(img, p.diameter, p.sigma_color, p.sigma_space),
    "NF": lambda img, p: nl_means(img, p.strength, p.template_window, p.search_window),
}


def family_of(acronym: str) -> str:
    for fam, ops in DEFAULT_FAMILIES.items():
        if acronym in ops:
            return fam
    raise KeyError(f"unknown operator acronym {acronym!r}")


def resolve_params(overrides: Mapping[str, Mapping[str, object]] | None = None) -> dict:
    """Default parameter table with per-acronym field overrides applied."""
    table = dict(DEFAULT_PARAMS)
    for acr, kv in (overrides or {}).items():
        if acr not in table:
            raise KeyError(f"unknown operator acronym {acr!r}")
        valid = {f.name for f in fields(table[acr])}
        bad = set(kv) - valid
        if bad:
            raise KeyError(f"unknown parameter(s) {sorted(bad)} for {acr}")
        kv = {
            k: tuple(v) if isinstance(v, list) else v for k, v in kv.items()
        }
        table[acr] = replace(table[acr], **kv)
    return table


def apply_operator(img: np.ndarray, acronym: str, params: Mapping[str, object] | None = None) -> np.ndarray:
    """Run one operator by acronym; real-valued output, no quantization."""
    table = DEFAULT_PARAMS if params is None else params
    if acronym not in _APPLY:
        raise KeyError(f"unknown operator acronym {acronym!r}")
    return _APPLY[acronym](img, table[acronym])


def apply_sequence(
    frame: np.ndarray,
    ops: tuple[str, ...] | list[str],
    params: Mapping[str, object] | None = None,
) -> np.ndarray:
    """Chain operators over one frame, re-quantizing after each step."""
    out = np.asarray(frame, dtype=np.float64)
    for acr in ops:
        out = quantize8(apply_operator(out, acr, params))
    return out
