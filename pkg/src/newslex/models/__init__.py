"""The five detector estimators plus importance, rule export and
serialization helpers."""

from .boosting import GradientBoostingDetector, ImportanceReport, gain_importance
from .forest import RandomForestDetector
from .linear import LinearSvmDetector
from .mlp import MlpDetector
from .serialize import (
    MODEL_CLASSES,
    ModelFormatError,
    dumps_model,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .tree import DecisionTreeDetector, RuleExportError, TreeNode, export_rule

__all__ = [
    "DecisionTreeDetector",
    "RandomForestDetector",
    "GradientBoostingDetector",
    "LinearSvmDetector",
    "MlpDetector",
    "TreeNode",
    "ImportanceReport",
    "gain_importance",
    "export_rule",
    "RuleExportError",
    "ModelFormatError",
    "MODEL_CLASSES",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "save_model",
    "load_model",
]
