from .extractor import ConvStackExtractor
from .patches import PatchSet, patchify, extract_patch_array
from .model import (
    QualityModel,
    patch_distance,
    image_quality,
    image_quality_multiview,
    predict_mos,
    save_model,
    load_model,
    mean_squared_feature_diffs,
)
from .train import TrainConfig, train, kfold_split, loss_and_gradients, FeatureCache

__all__ = [
    "ConvStackExtractor",
    "PatchSet",
    "patchify",
    "extract_patch_array",
    "QualityModel",
    "patch_distance",
    "image_quality",
    "image_quality_multiview",
    "predict_mos",
    "save_model",
    "load_model",
    "mean_squared_feature_diffs",
    "TrainConfig",
    "train",
    "kfold_split",
    "loss_and_gradients",
    "FeatureCache",
]
