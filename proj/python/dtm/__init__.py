"""Deformable template matching toolkit."""

from ._core import (
    Anchor,
    BBox,
    BaselineConfig,
    BaselineScore,
    DtmConfig,
    FeatureGrid,
    GrayImage,
    Homography,
    MatchResult,
    Placement,
    SiftDescriptor,
    SiftKeypoint,
    conventional_sift_similarity,
    crop,
    deformable_sift_similarity,
    detect_sift,
    estimate_homography_dlt,
    hog,
    hog1,
    hog2,
    load_pgm,
    resize_bilinear,
    roc_auc,
    sad,
    sad1,
    sad2,
    save_pgm,
    sift_descriptor,
    total_score,
)

__all__ = [
    "Anchor",
    "BBox",
    "BaselineConfig",
    "BaselineScore",
    "DtmConfig",
    "FeatureGrid",
    "GrayImage",
    "Homography",
    "MatchResult",
    "Placement",
    "SiftDescriptor",
    "SiftKeypoint",
    "conventional_sift_similarity",
    "crop",
    "deformable_sift_similarity",
    "detect_sift",
    "estimate_homography_dlt",
    "hog",
    "hog1",
    "hog2",
    "load_pgm",
    "resize_bilinear",
    "roc_auc",
    "sad",
    "sad1",
    "sad2",
    "save_pgm",
    "sift_descriptor",
    "total_score",
]
