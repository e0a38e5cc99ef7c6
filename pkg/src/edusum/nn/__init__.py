"""Numeric core: autograd tensors, the scoring model, Adam, and training."""

from .autograd import Tensor, concat, softmax
from .model import (
    ModelConfig,
    ParamStore,
    Vocab,
    bce_loss,
    dge_layer_forward,
    embed_tokens,
    forward_document,
    fuse_graphs,
    init_params,
    load_checkpoint,
    predict_scores,
    save_checkpoint,
    span_extract,
)
from .optim import AdamState, adam_step
from .train import TrainResult, TrainingDiverged, train

__all__ = [
    "Tensor",
    "concat",
    "softmax",
    "ModelConfig",
    "ParamStore",
    "Vocab",
    "bce_loss",
    "dge_layer_forward",
    "embed_tokens",
    "forward_document",
    "fuse_graphs",
    "init_params",
    "load_checkpoint",
    "predict_scores",
    "save_checkpoint",
    "span_extract",
    "AdamState",
    "adam_step",
    "TrainResult",
    "TrainingDiverged",
    "train",
]
