"""Bicubic resampling against a direct-summation oracle."""

import numpy as np

import rdthumb.autodiff as ad
from rdthumb.planar import ColorSpace, PlanarImage, ValueRange
from rdthumb.rescaler import bicubic_downsample, bicubic_upsample_graph

from oracles import naive_bicubic_downsample


def unit_img(arr):
    return PlanarImage(arr, ColorSpace.RGB, ValueRange.UNIT)


class TestDownsample:
    def test_constant_preserved(self):
        img = unit_img(np.full((3, 16, 16), 0.37))
        out = bicubic_downsample(img, 4)
        assert out.samples.shape == (3, 4, 4)
        assert np.allclose(out.samples, 0.37, atol=1e-12)

    def test_scale_one_is_identity(self):
        rng = np.random.default_rng(0)
        img = unit_img(rng.uniform(size=(3, 8, 8)))
        out = bicubic_downsample(img, 1)
        assert np.array_equal(out.samples, img.samples)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(1)
        for s in (2, 4):
            plane = rng.uniform(size=(4 * s, 6 * s))
            img = unit_img(np.stack([plane] * 3))
            out = bicubic_downsample(img, s)
            want = naive_bicubic_downsample(plane, s)
            assert np.abs(out.samples[0] - want).max() < 1e-6

    def test_rejects_unaligned(self):
        img = unit_img(np.zeros((3, 10, 8)))
        try:
            bicubic_downsample(img, 4)
            assert False, "expected ValueError"
        except ValueError:
            pass


class TestUpsampleGraph:
    def test_constant_preserved(self):
        t = ad.Tensor(np.full((1, 3, 4, 4), 0.6))
        out = bicubic_upsample_graph(t, 4)
        assert out.shape == (1, 3, 16, 16)
        assert np.abs(out.data - 0.6).max() < 1e-12

    def test_interior_matches_pointwise_kernel(self):
        # center outputs away from borders must equal the direct formula
        rng = np.random.default_rng(2)
        plane = rng.uniform(size=(8, 8))
        t = ad.Tensor(plane[None, None])
        out = bicubic_upsample_graph(t, 2).data[0, 0]
        from oracles import cubic_kernel
        for oy in range(6, 10):
            for ox in range(6, 10):
                cy = (oy + 0.5) / 2 - 0.5
                cx = (ox + 0.5) / 2 - 0.5
                acc = 0.0
                for jy in range(int(np.floor(cy)) - 1, int(np.floor(cy)) + 3):
                    for jx in range(int(np.floor(cx)) - 1, int(np.floor(cx)) + 3):
                        acc += (cubic_kernel(cy - jy) * cubic_kernel(cx - jx)
                                * plane[jy, jx])
                assert abs(out[oy, ox] - acc) < 1e-10

    def test_gradient_flows(self):
        t = ad.parameter(np.random.default_rng(3).uniform(size=(1, 3, 4, 4)))
        out = bicubic_upsample_graph(t, 2)
        ad.backward(ad.sum_(out))
        # partition of unity: each input contributes its replication count
        assert t.grad is not None
        assert abs(t.grad.sum() - out.size) < 1e-8
