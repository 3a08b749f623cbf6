"""Toy-scale recurrent and transformer classifiers trained with Adam."""

from .optim import AdamState, adam_step, bce_loss
from .rnn import RNNModel
from .tokens import (
    CLS_ID, N_SPECIAL, PAD_ID, SEP_ID, UNK_ID, PaddedBatch, SpecialTokens, add_special_tokens,
    encode_tokens, pad_and_mask,
)
from .training import (
    EpochHistory, EpochRecord, TrainConfig, build_model, grad_check, predict_sequences,
    steps_per_epoch, train_neural,
)
from .transformer import TransformerModel

__all__ = [
    "AdamState", "CLS_ID", "EpochHistory", "EpochRecord", "N_SPECIAL", "PAD_ID", "PaddedBatch",
    "RNNModel", "SEP_ID", "SpecialTokens", "TrainConfig", "TransformerModel", "UNK_ID",
    "adam_step", "add_special_tokens", "bce_loss", "build_model", "encode_tokens", "grad_check",
    "pad_and_mask", "predict_sequences", "steps_per_epoch", "train_neural",
]
