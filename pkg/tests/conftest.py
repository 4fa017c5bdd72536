import numpy as np
import pytest

from lfrefocus import LightField


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_field(shape=(7, 7, 32, 32, 3), seed=0):
    rng = np.random.default_rng(seed)
    return LightField(rng.random(shape, dtype=np.float32))


def smooth_texture(s, t, channels=3, seed=0, sigma=1.5):
    """Band-limited periodic texture in [0.1, 0.9]; friendly to interpolation."""
    from scipy.ndimage import gaussian_filter

    rng = np.random.default_rng(seed)
    base = rng.random((s, t, channels))
    base = gaussian_filter(base, sigma=(sigma, sigma, 0), mode="wrap")
    lo, hi = base.min(), base.max()
    return (0.1 + 0.8 * (base - lo) / (hi - lo)).astype(np.float32)


def plane_field(disparity, n_u=7, n_v=7, s=64, t=64, seed=0):
    """Scene plane at integer disparity d: views are periodic translations."""
    base = smooth_texture(s, t, seed=seed)
    uc, vc = (n_u - 1) // 2, (n_v - 1) // 2
    arr = np.empty((n_u, n_v, s, t, 3), dtype=np.float32)
    for u in range(n_u):
        for v in range(n_v):
            arr[u, v] = np.roll(base, (disparity * (u - uc), disparity * (v - vc)), axis=(0, 1))
    return LightField(arr)


def fractional_plane_field(disparity, n_u=7, n_v=7, s=64, t=64, seed=0):
    """Plane at fractional disparity via exact periodic (Fourier) translation."""
    base = smooth_texture(s, t, seed=seed).astype(np.float64)
    uc, vc = (n_u - 1) / 2.0, (n_v - 1) / 2.0
    freq_r = np.fft.fftfreq(s)[:, None]
    freq_c = np.fft.fftfreq(t)[None, :]
    spec = np.fft.fft2(base, axes=(0, 1))
    arr = np.empty((n_u, n_v, s, t, 3), dtype=np.float32)
    for u in range(n_u):
        for v in range(n_v):
            dy, dx = disparity * (u - uc), disparity * (v - vc)
            phase = np.exp(-2j * np.pi * (freq_r * dy + freq_c * dx))
            shifted = np.fft.ifft2(spec * phase[:, :, None], axes=(0, 1)).real
            arr[u, v] = np.clip(shifted, 0.0, 1.0)
    return LightField(arr)
