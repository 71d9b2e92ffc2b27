"""Pooled sentence-embedding exporter emitting the fusion JSONL format."""

from .config import ExporterConfig, ExporterError
from .corpus import load_corpus
from .export import cls_pool, export_embeddings, mean_pool, write_embedding_file
from .finetune import finetune_then_export

__version__ = "0.1.0"
