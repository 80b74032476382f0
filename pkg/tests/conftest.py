import numpy as np
import pytest

from stackfuse import assets


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def photos():
    """The three natural test photographs used by the metric tests."""
    return {name: assets.photo(name) for name in ("camera", "coins", "moon")}


@pytest.fixture(scope="session")
def niqe_model():
    return assets.default_niqe_model()


@pytest.fixture(scope="session")
def brisque_model():
    return assets.default_brisque_model()


def add_gaussian_noise(img: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    gen = np.random.default_rng(seed)
    noisy = img.astype(np.float64) + gen.normal(0.0, sigma, img.shape)
    return np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)
