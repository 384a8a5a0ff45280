"""Checkpoint container round trips and validation."""

import numpy as np
import pytest

from rdthumb.rescaler import (TrainConfig, TrainedModel, load_checkpoint,
                              load_model, save_checkpoint, save_model)


class TestContainer:
    def test_array_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {
            "a.w": rng.normal(size=(3, 4)),
            "b.bias": rng.normal(size=(7,)).astype(np.float32),
            "scalar": np.asarray(2.5),
        }
        path = tmp_path / "ck.bin"
        save_checkpoint(path, arrays, {"note": 1})
        back, meta = load_checkpoint(path)
        assert meta == {"note": 1}
        assert set(back) == set(arrays)
        for k in arrays:
            assert back[k].dtype == arrays[k].dtype
            assert np.array_equal(back[k], arrays[k])

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOPE" + bytes(32))
        with pytest.raises(ValueError, match="magic"):
            load_checkpoint(p)

    def test_version_checked(self, tmp_path):
        p = tmp_path / "ck.bin"
        save_checkpoint(p, {"x": np.zeros(2)})
        data = bytearray(p.read_bytes())
        data[4] = 99
        p.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="version"):
            load_checkpoint(p)


class TestModelCheckpoint:
    def test_model_round_trip(self, tmp_path):
        cfg = TrainConfig(encoder_base=8, extractor_blocks=1, decoder_blocks=1,
                          qpm_hidden=16)
        model = TrainedModel(cfg)
        path = tmp_path / "model.bin"
        save_model(path, model)
        back = load_model(path)
        assert back.cfg == cfg
        for (n1, t1), (n2, t2) in zip(model.named_params(), back.named_params()):
            assert n1 == n2
            assert np.array_equal(t1.data, t2.data)
