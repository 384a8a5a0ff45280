"""Color, DCT, padding, quantization, and zigzag behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rdthumb.autodiff as ad
from rdthumb.planar import ColorSpace, PlanarImage, ValueRange, crop, pad_to_blocks
from rdthumb.jpeg import (annex_k_tables, dequantize, fdct8x8, idct8x8,
                          quantize_hard, quantize_soft_grid, rgb_to_ycbcr,
                          unzigzag, ycbcr_to_rgb, zigzag)
from rdthumb.jpeg.blocks import CoeffKind, DctBlockGrid, image_to_raw_grid, split_blocks
from rdthumb.jpeg.quantize import quantize_soft
from rdthumb.jpeg.tables import ZIGZAG_ORDER, QuantTableSet, TableForm

from oracles import finite_difference, max_rel_err, naive_dct2


def rgb(arr):
    return PlanarImage(np.asarray(arr, dtype=np.float64), ColorSpace.RGB, ValueRange.BYTE)


class TestColor:
    def test_black_maps_to_neutral_chroma(self):
        out = rgb_to_ycbcr(rgb(np.zeros((3, 2, 2))))
        assert np.allclose(out.samples[0], 0)
        assert np.allclose(out.samples[1], 128)
        assert np.allclose(out.samples[2], 128)

    def test_white_is_achromatic(self):
        out = rgb_to_ycbcr(rgb(np.full((3, 2, 2), 255.0)))
        assert np.allclose(out.samples[0], 255)
        assert np.allclose(out.samples[1], 128)
        assert np.allclose(out.samples[2], 128)

    def test_neutral_gray_inverse(self):
        ycc = PlanarImage(np.full((3, 2, 2), 128.0), ColorSpace.YCBCR, ValueRange.BYTE)
        out = ycbcr_to_rgb(ycc)
        assert np.allclose(out.samples, 128)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(0)
        img = rgb(rng.uniform(0, 255, size=(3, 5, 7)))
        back = ycbcr_to_rgb(rgb_to_ycbcr(img))
        assert np.abs(back.samples - img.samples).max() < 1e-12

    def test_out_of_gamut_clamps(self):
        ycc = PlanarImage(np.array([[[255.0]], [[255.0]], [[255.0]]]),
                          ColorSpace.YCBCR, ValueRange.BYTE)
        out = ycbcr_to_rgb(ycc, clamp=True)
        assert out.samples.min() >= 0.0 and out.samples.max() <= 255.0

    def test_wrong_space_rejected(self):
        ycc = PlanarImage(np.zeros((3, 2, 2)), ColorSpace.YCBCR, ValueRange.BYTE)
        with pytest.raises(ValueError):
            rgb_to_ycbcr(ycc)
        with pytest.raises(ValueError):
            ycbcr_to_rgb(rgb(np.zeros((3, 2, 2))))


class TestPad:
    def test_aligned_input_unchanged(self):
        img = rgb(np.random.default_rng(1).uniform(0, 255, (3, 16, 16)))
        out = pad_to_blocks(img)
        assert out.samples is img.samples

    def test_edge_replication(self):
        img = rgb(np.random.default_rng(2).uniform(0, 255, (3, 17, 9)))
        out = pad_to_blocks(img)
        assert (out.height, out.width) == (24, 16)
        assert np.array_equal(out.samples[:, 17:, :9],
                              np.broadcast_to(img.samples[:, 16:17, :9], (3, 7, 9)))
        assert np.array_equal(out.samples[:, :17, 9:],
                              np.broadcast_to(img.samples[:, :17, 8:9], (3, 17, 7)))

    def test_crop_inverts_pad(self):
        img = rgb(np.random.default_rng(3).uniform(0, 255, (3, 10, 13)))
        out = crop(pad_to_blocks(img), 10, 13)
        assert np.array_equal(out.samples, img.samples)


class TestDct:
    def test_zero_block(self):
        assert np.allclose(fdct8x8(np.zeros((8, 8))), 0)
        assert np.allclose(idct8x8(np.zeros((8, 8))), 0)

    def test_constant_block_dc(self):
        c = 3.25
        out = fdct8x8(np.full((8, 8), c))
        assert abs(out[0, 0] - 8 * c) < 1e-12
        assert np.abs(out.reshape(-1)[1:]).max() < 1e-12

    def test_dc_only_inverse(self):
        coeffs = np.zeros((8, 8))
        coeffs[0, 0] = 8 * 5.5
        assert np.allclose(idct8x8(coeffs), 5.5, atol=1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            block = rng.uniform(-128, 127, size=(8, 8))
            assert np.abs(fdct8x8(block) - naive_dct2(block)).max() < 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            block = rng.uniform(-128, 127, size=(8, 8))
            se = (block ** 2).sum()
            ce = (fdct8x8(block) ** 2).sum()
            assert abs(se - ce) / se < 1e-9

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        blocks = rng.uniform(-128, 127, size=(20, 8, 8))
        assert np.abs(idct8x8(fdct8x8(blocks)) - blocks).max() < 1e-10


class TestZigzag:
    def test_first_positions(self):
        # (0,0) -> 0, (0,1) -> 1, (1,0) -> 2 in scan order
        assert ZIGZAG_ORDER[0] == 0
        assert ZIGZAG_ORDER[1] == 1
        assert ZIGZAG_ORDER[2] == 8

    def test_is_permutation(self):
        assert sorted(ZIGZAG_ORDER.tolist()) == list(range(64))

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip(self, seed):
        block = np.random.default_rng(seed).integers(-100, 100, size=(8, 8))
        assert np.array_equal(unzigzag(zigzag(block)), block)

    def test_known_diagonal_walk(self):
        block = np.arange(64).reshape(8, 8)
        z = zigzag(block)
        assert z[:10].tolist() == [0, 1, 8, 16, 9, 2, 3, 10, 17, 24]


class TestQuantize:
    def grid_of(self, y):
        n = y.shape[0]
        return DctBlockGrid(y, np.zeros_like(y), np.zeros_like(y), 1, n, CoeffKind.RAW)

    def test_exact_division(self):
        y = np.zeros((1, 8, 8))
        y[0, 0, 1] = 16.0
        q = annex_k_tables()
        q.q_luma[:] = 8.0
        out = quantize_hard(self.grid_of(y), q)
        assert out.y[0, 0, 1] == 2

    def test_half_away_from_zero(self):
        y = np.zeros((1, 8, 8))
        y[0, 0, 1] = -13.0
        q = annex_k_tables()
        q.q_luma[:] = 8.0
        out = quantize_hard(self.grid_of(y), q)
        assert out.y[0, 0, 1] == -2              # -1.625 rounds away from zero

    def test_all_ones_table_is_round(self):
        rng = np.random.default_rng(7)
        y = rng.uniform(-100, 100, size=(3, 8, 8))
        ones = QuantTableSet(np.ones((8, 8)), np.ones((8, 8)), TableForm.INTEGER)
        out = quantize_hard(self.grid_of(y), ones)
        assert np.array_equal(out.y, np.sign(y) * np.floor(np.abs(y) + 0.5))

    def test_dequantize_examples(self):
        q = annex_k_tables()
        q.q_luma[:] = 8.0
        y = np.zeros((1, 8, 8))
        y[0, 0, 1] = 2
        grid = DctBlockGrid(y, np.zeros_like(y), np.zeros_like(y), 1, 1,
                            CoeffKind.QUANTIZED)
        out = dequantize(grid, q)
        assert out.y[0, 0, 1] == 16
        assert out.cb.sum() == 0

    def test_reconstruction_error_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            y = rng.uniform(-800, 800, size=(4, 8, 8))
            grid = self.grid_of(y)
            q = annex_k_tables()
            hard = quantize_hard(grid, q)
            deq = dequantize(hard, q)
            bound = q.q_luma / 2 + 0.5
            assert np.all(np.abs(deq.y - y) <= bound + 1e-9)

    def test_soft_zero_noise_is_plain_division(self):
        rng = np.random.default_rng(9)
        y = rng.uniform(-500, 500, size=(2, 8, 8))
        grid = self.grid_of(y)
        q = annex_k_tables(TableForm.CONTINUOUS)
        out = quantize_soft_grid(grid, q, rng=None)
        assert np.allclose(out.y, y / q.q_luma)
        assert out.kind is CoeffKind.NOISY

    def test_soft_noise_moments_match_hard_error(self):
        # the rounding error of C/Q and the additive U(-1/2,1/2) noise
        # should agree in mean and variance
        rng = np.random.default_rng(10)
        n = 200_000
        vals = rng.uniform(-400, 400, size=n)
        q = 12.0
        hard_err = np.round(vals / q) - vals / q
        noise = rng.uniform(-0.5, 0.5, size=n)
        assert abs(hard_err.mean() - noise.mean()) < 0.05 * noise.std()
        assert abs(hard_err.var() / noise.var() - 1.0) < 0.05

    def test_soft_gradient_wrt_table(self):
        rng = np.random.default_rng(11)
        c = rng.uniform(-200, 200, size=(2, 64))
        q0 = rng.uniform(4, 60, size=(1, 64))

        def build(t):
            denom = ad.expand(t[1], (2, 64))
            return quantize_soft(t[0], denom, None)

        ct, qt = ad.parameter(c.copy()), ad.parameter(q0.copy())
        out = build([ct, qt])
        ad.backward(ad.sum_(out))

        def f(qv):
            return float(ad.sum_(build([ad.Tensor(c), ad.Tensor(qv)])).data)

        fd = finite_difference(f, q0.copy())
        assert max_rel_err(qt.grad, fd) < 1e-4


class TestGridInvariants:
    def test_channel_count_consistency(self):
        with pytest.raises(ValueError):
            DctBlockGrid(np.zeros((2, 8, 8)), np.zeros((1, 8, 8)),
                         np.zeros((2, 8, 8)), 1, 2, CoeffKind.RAW)

    def test_integer_kind_rejects_fractional(self):
        y = np.full((1, 8, 8), 0.5)
        with pytest.raises(ValueError):
            DctBlockGrid(y, y, y, 1, 1, CoeffKind.QUANTIZED)

    def test_raw_range_after_level_shift(self):
        rng = np.random.default_rng(12)
        img = rgb(rng.uniform(0, 255, (3, 16, 16)))
        grid = image_to_raw_grid(img)
        for ch in grid.channels():
            assert ch.min() >= -1024 - 1e-9
            assert ch.max() <= 1016 + 1e-9

    def test_split_blocks_requires_alignment(self):
        with pytest.raises(ValueError):
            split_blocks(np.zeros((10, 16)))
