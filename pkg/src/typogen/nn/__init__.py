from .tensor import (
    ShapeError,
    Tensor,
    concat,
    embedding,
    gelu,
    layer_norm,
    log_softmax,
    no_grad,
    softmax,
)
from .blocks import (
    DecoderBlock,
    EncoderBlock,
    Embedding,
    FeedForward,
    LayerNorm,
    Linear,
    MultiHeadAttention,
    ParameterStore,
)
from .optim import AdamW, OptimError
from .checkpoint import CheckpointError, load_params, save_params

__all__ = [
    "AdamW",
    "CheckpointError",
    "DecoderBlock",
    "Embedding",
    "EncoderBlock",
    "FeedForward",
    "LayerNorm",
    "Linear",
    "MultiHeadAttention",
    "OptimError",
    "ParameterStore",
    "ShapeError",
    "Tensor",
    "concat",
    "embedding",
    "gelu",
    "layer_norm",
    "load_params",
    "log_softmax",
    "no_grad",
    "save_params",
    "softmax",
]
