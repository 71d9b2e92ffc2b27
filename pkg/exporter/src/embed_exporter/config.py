"""Exporter configuration and validation."""

from __future__ import annotations

from dataclasses import dataclass

POOLING_KINDS = ("mean", "cls")


class ExporterError(RuntimeError):
    """Raised for configuration, checkpoint or resource failures."""


@dataclass(frozen=True)
class ExporterConfig:
    """Settings for one export run.

    ``checkpoint`` is any Hugging Face model name or local checkpoint
    directory. ``pooling`` selects how per-token encodings collapse to
    one vector and is echoed into the emitted manifest.
    """

    checkpoint: str
    pooling: str = "mean"
    batch_size: int = 16
    max_length: int = 128
    device: str = "cpu"

    def __post_init__(self):
        if not self.checkpoint:
            raise ExporterError("checkpoint name or path is required")
        if self.pooling not in POOLING_KINDS:
            raise ExporterError(
                f"pooling must be one of {POOLING_KINDS}, got {self.pooling!r}"
            )
        if self.batch_size < 1:
            raise ExporterError("batch_size must be >= 1")
        if self.max_length < 16:
            raise ExporterError("max_length must be >= 16")
