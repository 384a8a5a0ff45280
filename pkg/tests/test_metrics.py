"""PSNR, report records, CSV round trips, rank correlation."""

import numpy as np
import pytest

from rdthumb.metrics import (PSNR_CAP, RdReport, psnr_rgb, read_reports_csv,
                             spearman_rho, write_reports_csv)

from oracles import loop_psnr, spearman_rho as oracle_rho


class TestPsnr:
    def test_identical_is_capped(self):
        img = np.random.default_rng(0).uniform(0, 255, size=(3, 6, 6))
        assert psnr_rgb(img, img) == PSNR_CAP

    def test_unit_mse_value(self):
        a = np.zeros((3, 8, 8))
        b = np.ones((3, 8, 8))
        assert abs(psnr_rgb(a, b) - 48.13080361) < 1e-6

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            a = rng.uniform(0, 255, size=(3, 7, 5))
            b = rng.uniform(0, 255, size=(3, 7, 5))
            assert abs(psnr_rgb(a, b) - loop_psnr(a, b)) < 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr_rgb(np.zeros((3, 4, 4)), np.zeros((3, 4, 5)))


class TestReports:
    def make(self, i=0):
        return RdReport(image_id=f"img{i}", mode="fixed", quality_scale=1.0,
                        bpp=0.5 + i, lr_psnr_db=30.0, hr_psnr_db=25.0,
                        encode_ms=1.0, decode_ms=2.0)

    def test_csv_round_trip(self, tmp_path):
        reports = [self.make(i) for i in range(3)]
        path = tmp_path / "rd.csv"
        write_reports_csv(path, reports)
        back = read_reports_csv(path)
        assert back == reports
        header = path.read_text().splitlines()[0]
        assert header == ("image_id,mode,quality_scale,bpp,lr_psnr_db,"
                          "hr_psnr_db,encode_ms,decode_ms")

    def test_invalid_bpp_rejected(self):
        with pytest.raises(ValueError):
            RdReport("x", "fixed", 1.0, 0.0, 30.0, 25.0, 1.0, 1.0)

    def test_nonfinite_psnr_rejected(self):
        with pytest.raises(ValueError):
            RdReport("x", "fixed", 1.0, 0.5, float("inf"), 25.0, 1.0, 1.0)


class TestSpearman:
    def test_monotone_is_one(self):
        x = [1.0, 2.0, 5.0, 9.0]
        y = [0.1, 0.4, 0.5, 3.0]
        assert abs(spearman_rho(x, y) - 1.0) < 1e-12

    def test_reversed_is_minus_one(self):
        x = [1.0, 2.0, 3.0]
        assert abs(spearman_rho(x, x[::-1]) + 1.0) < 1e-12

    def test_matches_oracle_with_ties(self):
        rng = np.random.default_rng(2)
        a = rng.integers(0, 5, size=30).astype(float)
        b = a + rng.normal(0, 1, size=30)
        assert abs(spearman_rho(a, b) - oracle_rho(a, b)) < 1e-12

    def test_constant_input_rejected(self):
        with pytest.raises(ValueError):
            spearman_rho([1.0, 1.0], [2.0, 3.0])
