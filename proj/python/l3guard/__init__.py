"""Python bindings for the l3guard Layer-3 SDL manipulation testbed."""

from ._l3guard import (
    AeModel,
    ConfigError,
    EncodingError,
    L3GuardError,
    SdlStore,
    apply_hypoglyphs,
    build_prompt,
    catalog,
    compute_metrics,
    contains_hypoglyph,
    default_map,
    forge,
    parse_verdict,
    read_dataset,
    run_ae,
    run_llm,
    skeleton,
    sweep_ae,
    sweep_llm,
    train_autoencoder,
    write_dataset,
)

__all__ = [
    "AeModel",
    "ConfigError",
    "EncodingError",
    "L3GuardError",
    "SdlStore",
    "apply_hypoglyphs",
    "build_prompt",
    "catalog",
    "compute_metrics",
    "contains_hypoglyph",
    "default_map",
    "forge",
    "parse_verdict",
    "read_dataset",
    "run_ae",
    "run_llm",
    "skeleton",
    "sweep_ae",
    "sweep_llm",
    "train_autoencoder",
    "write_dataset",
]
