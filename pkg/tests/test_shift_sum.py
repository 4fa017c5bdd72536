import numpy as np
import pytest
from scipy.ndimage import map_coordinates
from sklearn.base import clone

from lfrefocus import (
    FocalStack,
    LightField,
    ShiftSumRefocuser,
    default_alphas,
    focal_stack_shift_sum,
    shift_and_sum,
)

from conftest import make_field


def oracle_shift_sum(lf: LightField, alpha: float, kappa: float = 1.0) -> np.ndarray:
    """Independent reference: per-view resampling through scipy, then average.

    Gathers view (u, v) at (s - d*(u-uc), t - d*(v-vc)) with d = kappa*(1-1/alpha),
    bilinear, edge-replicated.
    """
    n_u, n_v, s, t, c = lf.dims
    uc, vc = (n_u - 1) / 2.0, (n_v - 1) / 2.0
    d = kappa * (1.0 - 1.0 / alpha)
    rows = np.arange(s, dtype=np.float64)
    cols = np.arange(t, dtype=np.float64)
    grid_r, grid_c = np.meshgrid(rows, cols, indexing="ij")
    acc = np.zeros((s, t, c), dtype=np.float64)
    for u in range(n_u):
        for v in range(n_v):
            coords = [grid_r - d * (u - uc), grid_c - d * (v - vc)]
            for ch in range(c):
                acc[:, :, ch] += map_coordinates(
                    lf.samples[u, v, :, :, ch].astype(np.float64),
                    coords, order=1, mode="nearest",
                )
    return acc / (n_u * n_v)


def test_alpha_one_is_exact_view_mean():
    lf = make_field((7, 7, 24, 24, 3), seed=11)
    out = shift_and_sum(lf, 1.0)
    assert np.array_equal(out, lf.view_mean())
    # twice in a row: bit-for-bit reproducible
    assert np.array_equal(out, shift_and_sum(lf, 1.0))


def test_constant_field_all_alphas():
    lf = LightField(np.full((7, 7, 16, 16, 3), 0.37, dtype=np.float32))
    for alpha in default_alphas():
        out = shift_and_sum(lf, alpha)
        assert np.max(np.abs(out - 0.37)) < 1e-6


def test_impulse_focus_brute_force():
    # View (u, v) holds a single 1.0 at (8 + d*(u-1), 8 + d*(v-1)) with d=1;
    # the sweep must be sharpest at alpha = 1 / (1 + d) = 0.5.
    d = 1
    samples = np.zeros((3, 3, 17, 17, 1), dtype=np.float32)
    for u in range(3):
        for v in range(3):
            samples[u, v, 8 + d * (u - 1), 8 + d * (v - 1), 0] = 1.0
    lf = LightField(samples)
    alphas = default_alphas()
    peaks = []
    for alpha in alphas:
        out = shift_and_sum(lf, alpha)
        ref = oracle_shift_sum(lf, alpha)
        assert np.max(np.abs(out.astype(np.float64) - ref)) < 1e-6
        peaks.append(out.max())
    assert alphas[int(np.argmax(peaks))] == 0.5
    assert peaks[int(np.argmax(peaks))] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.8, 1.3, 2.0])
def test_matches_oracle_random_field(alpha):
    lf = make_field((5, 5, 20, 26, 3), seed=21)
    out = shift_and_sum(lf, alpha)
    ref = oracle_shift_sum(lf, alpha)
    assert np.max(np.abs(out.astype(np.float64) - ref)) < 1e-6


def test_linearity():
    rng = np.random.default_rng(31)
    x1 = rng.random((5, 5, 18, 18, 3), dtype=np.float32)
    x2 = rng.random((5, 5, 18, 18, 3), dtype=np.float32)
    a = 0.4
    for alpha in (0.5, 1.75):
        lhs = shift_and_sum(LightField(a * x1 + (1 - a) * x2), alpha)
        rhs = a * shift_and_sum(LightField(x1), alpha) \
            + (1 - a) * shift_and_sum(LightField(x2), alpha)
        assert np.max(np.abs(lhs - rhs)) < 1e-5


def test_shift_symmetry_under_field_flip():
    # Flipping the angular grid and every view spatially must flip the output.
    lf = make_field((5, 5, 16, 16, 1), seed=41)
    flipped = LightField(lf.samples[::-1, ::-1, ::-1, ::-1, :])
    for alpha in (0.5, 2.0):
        out = shift_and_sum(lf, alpha)
        out_f = shift_and_sum(flipped, alpha)
        assert np.max(np.abs(out_f - out[::-1, ::-1, :])) < 1e-6


def test_output_range_clamp_edge():
    lf = make_field((7, 7, 16, 16, 3), seed=51)
    for alpha in (0.125, 0.5, 2.0):
        out = shift_and_sum(lf, alpha)
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_zero_renorm_constant_field():
    lf = LightField(np.full((5, 5, 12, 12, 1), 0.6, dtype=np.float32))
    for alpha in default_alphas():
        out = shift_and_sum(lf, alpha, boundary="zero-renorm")
        assert np.max(np.abs(out - 0.6)) < 1e-6


def test_boundary_modes_differ_at_edges():
    lf = make_field((5, 5, 16, 16, 1), seed=61)
    a = shift_and_sum(lf, 0.25, boundary="clamp-edge")
    b = shift_and_sum(lf, 0.25, boundary="zero-renorm")
    assert not np.array_equal(a, b)


def test_invalid_inputs():
    lf = make_field((2, 2, 8, 8, 1))
    for alpha in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            shift_and_sum(lf, alpha)
    with pytest.raises(ValueError, match="boundary"):
        shift_and_sum(lf, 0.5, boundary="wrap")
    with pytest.raises(ValueError, match="kernel"):
        shift_and_sum(lf, 0.5, kernel="bicubic")
    with pytest.raises(ValueError, match="finite"):
        shift_and_sum(lf, 0.5, kappa=float("nan"))


class TestFocalStack:
    def test_default_stack_has_16_images(self):
        lf = make_field((3, 3, 12, 12, 1), seed=71)
        stack = focal_stack_shift_sum(lf)
        assert len(stack) == 16
        assert np.array_equal(stack.alphas, default_alphas())

    def test_single_alpha_stack_is_view_mean(self):
        lf = make_field((3, 3, 12, 12, 3), seed=81)
        stack = focal_stack_shift_sum(lf, [1.0])
        assert np.array_equal(stack.images[0], lf.view_mean())

    def test_stack_matches_standalone_calls(self):
        lf = make_field((3, 3, 12, 12, 3), seed=91)
        alphas = [0.5, 1.0, 1.5]
        stack = focal_stack_shift_sum(lf, alphas)
        for i, alpha in enumerate(alphas):
            assert np.array_equal(stack.images[i], shift_and_sum(lf, alpha))


class TestEstimator:
    def test_get_set_params_and_clone(self):
        est = ShiftSumRefocuser(alphas=[0.5, 1.0], kappa=2.0, boundary="zero-renorm")
        params = est.get_params()
        assert params == {"alphas": [0.5, 1.0], "kappa": 2.0, "boundary": "zero-renorm"}
        est2 = clone(est)
        assert est2.get_params() == params
        est2.set_params(kappa=1.0)
        assert est2.kappa == 1.0 and est.kappa == 2.0

    def test_transform_matches_function(self):
        lf = make_field((3, 3, 12, 12, 3), seed=101)
        est = ShiftSumRefocuser(alphas=[0.5, 1.0])
        stack = est.fit(lf).transform(lf)
        assert isinstance(stack, FocalStack)
        ref = focal_stack_shift_sum(lf, [0.5, 1.0])
        assert np.array_equal(stack.images, ref.images)

    def test_accepts_bare_arrays(self):
        arr = np.random.default_rng(0).random((3, 3, 12, 12, 3), dtype=np.float32)
        stack = ShiftSumRefocuser(alphas=[1.0]).fit_transform(arr)
        assert np.array_equal(stack.images[0], LightField(arr).view_mean())
