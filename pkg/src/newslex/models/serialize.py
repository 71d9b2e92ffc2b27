"""Versioned JSON serialization for trained detectors.

The payload carries the model kind tag, the constructor hyperparameters
and the fitted state (tree structures / weight matrices as nested
arrays). Floats round-trip exactly through json's repr-based encoding,
and dumps are byte-stable (sorted keys, fixed separators), so
serialize(load(serialize(m))) is bit-identical.
"""

from __future__ import annotations

import json

from ..documents import write_text_atomic
from .boosting import GradientBoostingDetector
from .forest import RandomForestDetector
from .linear import LinearSvmDetector
from .mlp import MlpDetector
from .tree import DecisionTreeDetector

FORMAT_NAME = "newslex-model"
FORMAT_VERSION = 1

MODEL_CLASSES = {
    cls.model_kind: cls
    for cls in (
        DecisionTreeDetector,
        RandomForestDetector,
        GradientBoostingDetector,
        LinearSvmDetector,
        MlpDetector,
    )
}


class ModelFormatError(ValueError):
    """Raised for unreadable or mismatched model files."""


def _jsonable_params(model):
    params = {}
    for key, value in model.get_params().items():
        if isinstance(value, tuple):
            value = list(value)
        params[key] = value
    return params


def model_to_dict(model):
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": model.model_kind,
        "params": _jsonable_params(model),
        "state": model.get_state(),
    }


def model_from_dict(data):
    if data.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"not a {FORMAT_NAME} payload: {data.get('format')!r}")
    if data.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {data.get('version')!r}")
    kind = data.get("kind")
    cls = MODEL_CLASSES.get(kind)
    if cls is None:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    params = dict(data["params"])
    for key, value in params.items():
        if isinstance(value, list):
            params[key] = tuple(value)
    model = cls(**params)
    model.set_state(data["state"])
    return model


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model, path):
    write_text_atomic(path, dumps_model(model))


def load_model(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ModelFormatError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON: {exc}") from exc
    return model_from_dict(data)
