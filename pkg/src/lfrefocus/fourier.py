"""Fourier-slice refocusing.

One 4-D FFT per color channel is the preprocessing step; afterwards every
refocused image is a 2-D slice of the 4-D spectrum followed by an inverse 2-D
FFT, at a per-image cost of Theta(S*T*log(S*T)) independent of the number of
views.

Writing the shift-and-sum average in the frequency domain gives the slice

    E_hat(w_s, w_t) = (1 / (U*V)) * L_hat(d*w_s, d*w_t, w_s, w_t)

with ``d = kappa * (1 - 1/alpha)`` and ``L_hat`` the 4-D transform of the
light field with the angular origin at the grid center. On the discrete grid
the angular slice coordinate in bin units is ``rho * (1 - 1/alpha) * k`` with
``rho_u = U*kappa/S`` and ``rho_v = V*kappa/T``; the spatial coordinates land
exactly on the output bins, so only the angular axes need interpolation
(linear, zero outside the sampled band). At ``alpha = 1`` the slice passes
through the angular DC plane on-grid and reproduces the view mean up to FFT
round-off.

Conventions: forward transforms are unnormalized, the slice is scaled by
``1/(U*V)``, and the inverse 2-D FFT divides by ``S*T``. The angular axes of
the stored spectrum carry the phase that re-centers the view grid on
``(uc, vc) = ((U-1)/2, (V-1)/2)``; DC sits at index 0 on every axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import container
from .types import FocalStack, LightField
from .validation import check_alpha, check_alphas, check_light_field

__all__ = ["FourierRefocuser", "LFSpectrum", "fft4", "fourier_slice", "refocus_fourier"]


@dataclass(frozen=True)
class LFSpectrum:
    """Complex 4-D frequency representation of a light field, one per channel.

    ``coefficients`` has shape (U, V, S, T, C), complex64, DC at index 0.
    ``source_dims`` records the dims of the producing light field. Because the
    input is real, the spectrum is Hermitian: the coefficient at any frequency
    equals the conjugate at the negated frequency.
    """

    coefficients: np.ndarray
    source_dims: tuple[int, int, int, int, int]

    def __post_init__(self) -> None:
        coeffs = np.ascontiguousarray(self.coefficients, dtype=np.complex64)
        if coeffs.ndim != 5:
            raise ValueError(f"spectrum needs 5 axes (u, v, s, t, c), got {coeffs.ndim}")
        if tuple(self.source_dims) != coeffs.shape:
            raise ValueError(
                f"source_dims {tuple(self.source_dims)} do not match "
                f"coefficient shape {coeffs.shape}"
            )
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "source_dims", tuple(self.source_dims))
        self.coefficients.setflags(write=False)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.coefficients.shape[:4]

    def hermitian_error(self, n_pairs: int = 256, seed: int = 0) -> float:
        """Max relative mismatch |H(w) - conj(H(-w))| over sampled frequency pairs.

        On even-length angular axes the Nyquist bin is its own negation and
        carries the half-sample grid-centering phase, so it is not a proper
        conjugate pair; sampling draws angular indices away from it.
        """
        rng = np.random.default_rng(seed)
        shape = self.coefficients.shape

        def draw(n: int, angular: bool) -> np.ndarray:
            picks = rng.integers(0, n, size=n_pairs)
            if angular and n % 2 == 0:
                picks = np.where(picks == n // 2, 0, picks)
            return picks

        idx = tuple(draw(n, ax < 2) for ax, n in enumerate(shape[:4]))
        chan = rng.integers(0, shape[4], size=n_pairs)
        neg = tuple((-ax) % n for ax, n in zip(idx, shape[:4]))
        fwd = self.coefficients[idx + (chan,)]
        rev = self.coefficients[neg + (chan,)]
        scale = np.maximum(np.abs(fwd), 1e-12)
        return float(np.max(np.abs(fwd - np.conj(rev)) / scale))

    def save(self, path) -> None:
        """Write the coefficients to an LFS1 cache file (bit-exact round trip)."""
        container.save_spectrum_coefficients(self.coefficients, path)

    @classmethod
    def load(cls, path) -> "LFSpectrum":
        coeffs = container.load_spectrum_coefficients(path)
        return cls(coefficients=coeffs, source_dims=coeffs.shape)


def _center_phase(n: int) -> np.ndarray:
    """Per-bin phase moving the angular origin to the grid center (n-1)/2."""
    bins = np.fft.fftfreq(n, d=1.0 / n)  # signed bin values
    return np.exp(2j * np.pi * bins * ((n - 1) / 2.0) / n).astype(np.complex64)


def fft4(lf) -> LFSpectrum:
    """Unnormalized forward 4-D DFT of each color channel.

    Composed from 1-D transforms along each axis (no 4-D-capable transform is
    required); runs in Theta(N log N) for N = U*V*S*T per channel. Single
    precision throughout: the result is complex64.
    """
    lf = check_light_field(lf)
    n_u, n_v = lf.dims[:2]
    coeffs = lf.samples.astype(np.complex64)
    for axis in range(4):
        coeffs = np.fft.fft(coeffs, axis=axis).astype(np.complex64, copy=False)
    coeffs *= _center_phase(n_u)[:, None, None, None, None]
    coeffs *= _center_phase(n_v)[None, :, None, None, None]
    return LFSpectrum(coefficients=coeffs, source_dims=lf.dims)


def _angular_taps(positions: np.ndarray, n: int):
    """Linear interpolation taps along one angular axis of the spectrum.

    ``positions`` are fractional signed-bin coordinates. Each tap is
    (storage_index, weight) where weight is zeroed outside the sampled band
    [-(n//2), (n-1)//2]; the spectrum is treated as zero beyond the band
    rather than periodic.
    """
    lo, hi = -(n // 2), (n - 1) // 2
    b0 = np.floor(positions).astype(np.int64)
    frac = positions - b0
    taps = []
    for b, w in ((b0, 1.0 - frac), (b0 + 1, frac)):
        inband = (b >= lo) & (b <= hi)
        taps.append((np.where(inband, b % n, 0), np.where(inband, w, 0.0)))
    return taps


def fourier_slice(spectrum: LFSpectrum, alpha: float, kappa: float = 1.0) -> np.ndarray:
    """Extract one refocused image from a precomputed spectrum.

    Returns a float32 (S, T, C) image: the 2-D spectrum slice is inverse
    transformed, the real part taken, and the result clamped to [0, 1]
    (angular interpolation can leave a small imaginary residue and
    overshoot).
    """
    alpha = check_alpha(alpha)
    if not np.isfinite(kappa):
        raise ValueError(f"pixels-per-view scale must be finite, got {kappa}")
    n_u, n_v, s, t = spectrum.dims
    beta = 1.0 - 1.0 / alpha
    ks = np.fft.fftfreq(s, d=1.0 / s)
    kt = np.fft.fftfreq(t, d=1.0 / t)
    mu = (n_u * kappa / s) * beta * ks
    mv = (n_v * kappa / t) * beta * kt

    rows = np.arange(s)[:, None]
    cols = np.arange(t)[None, :]
    sl = np.zeros((s, t, spectrum.coefficients.shape[4]), dtype=np.complex64)
    for iu, wu in _angular_taps(mu, n_u):
        for iv, wv in _angular_taps(mv, n_v):
            w = np.multiply.outer(wu, wv)
            if not np.any(w):
                continue
            sl += spectrum.coefficients[iu[:, None], iv[None, :], rows, cols] \
                * w[:, :, None].astype(np.complex64)
    sl /= np.complex64(n_u * n_v)
    image = np.fft.ifft2(sl, axes=(0, 1)).real
    return np.clip(image, 0.0, 1.0).astype(np.float32)


def refocus_fourier(lf, alphas=None, kappa: float = 1.0) -> FocalStack:
    """Full pipeline: one fft4, then one slice per alpha, as an aligned stack."""
    lf = check_light_field(lf)
    alphas = check_alphas(alphas)
    spectrum = fft4(lf)
    images = np.stack([fourier_slice(spectrum, a, kappa) for a in alphas])
    return FocalStack(alphas=alphas, images=images)


class FourierRefocuser(BaseEstimator, TransformerMixin):
    """Transformer with the 4-D FFT as its fitted state.

    ``fit`` runs the expensive preprocessing (the 4-D transform); ``transform``
    then extracts the whole focal stack at slice cost. Transforming the same
    array that was fitted reuses the cached spectrum; any other input gets a
    fresh one-shot spectrum without disturbing the fitted state.
    """

    def __init__(self, alphas=None, kappa: float = 1.0):
        self.alphas = alphas
        self.kappa = kappa

    def fit(self, X, y=None):
        lf = check_light_field(X)
        check_alphas(self.alphas)
        self.spectrum_ = fft4(lf)
        self._fitted_samples = lf.samples
        return self

    def transform(self, X) -> FocalStack:
        lf = check_light_field(X)
        alphas = check_alphas(self.alphas)
        spectrum = getattr(self, "spectrum_", None)
        if spectrum is None or lf.samples is not self._fitted_samples:
            spectrum = fft4(lf)
        images = np.stack([fourier_slice(spectrum, a, self.kappa) for a in alphas])
        return FocalStack(alphas=alphas, images=images)
