"""Neural rescaling: encoder, frequency extractor, decoder, training."""

from .bicubic import bicubic_downsample, bicubic_upsample_graph, cubic_weight
from .checkpoint import (CHECKPOINT_VERSION, load_checkpoint, load_model,
                         save_checkpoint, save_model)
from .nets import (FREQ_CHANNELS, FREQ_FEATURES, DecoderNet, EncoderNet,
                   FreqExtractor, ResConvBlock, ResidualDenseBlock, RRDB)
from .pipeline import (SoftJpegResult, TrainConfig, coeff_tensor_from_grid,
                       decode_hr, encode_lr, extract_freq_features, guide_loss,
                       recon_loss, simulate_jpeg_soft, total_loss)
from .train import (DecodeResult, EncodeResult, StepReport, TrainedModel,
                    decode_with_model, encode_with_model, init_model,
                    testtime_finetune, train_loop, train_step)

__all__ = [
    "bicubic_downsample", "bicubic_upsample_graph", "cubic_weight",
    "CHECKPOINT_VERSION", "load_checkpoint", "load_model", "save_checkpoint",
    "save_model",
    "FREQ_CHANNELS", "FREQ_FEATURES", "DecoderNet", "EncoderNet",
    "FreqExtractor", "ResConvBlock", "ResidualDenseBlock", "RRDB",
    "SoftJpegResult", "TrainConfig", "coeff_tensor_from_grid", "decode_hr",
    "encode_lr", "extract_freq_features", "guide_loss", "recon_loss",
    "simulate_jpeg_soft", "total_loss",
    "DecodeResult", "EncodeResult", "StepReport", "TrainedModel",
    "decode_with_model", "encode_with_model", "init_model",
    "testtime_finetune", "train_loop", "train_step",
]
