"""Audiovisual token compression and compression-aware advantage shaping.

Frame, position and audio indices are zero-based throughout the Python API.
"""

from ._omac import (
    CompressionConfig,
    GuidanceMode,
    MarcConfig,
    OmacError,
    allocate_budget,
    cgrpo_loss,
    clipped_ratio,
    compress,
    compress_video,
    contrast_scores,
    cosine,
    degradation,
    distill_weight,
    frame_memory_token,
    frame_scores,
    frame_summaries,
    generate_synthetic,
    grpo_advantages,
    kl_estimate,
    load_bundle,
    mean_pool,
    merge_anchor,
    merge_weight,
    normalize_contrast,
    save_synthetic,
    select_frame_tokens,
    select_key_frames,
    shaped_advantage,
    softmax_weights,
)

__all__ = [name for name in dir() if not name.startswith("_")]
