"""Python bindings for the coinfer decision engine."""

from ._coinfer import (
    Action,
    ChannelMode,
    ConfigError,
    Environment,
    EvalResult,
    EvaluationError,
    HuffmanError,
    ModelProfile,
    ProfileError,
    SystemModel,
    compressed_size,
    dequantize,
    huffman_encode,
    huffman_roundtrip,
    load_profile,
    oracle_best,
    quantize,
    sweep,
    synthetic_feature_map,
    train,
    validate_profile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
