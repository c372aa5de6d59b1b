"""featx: embed directories of images into FVEC feature files.

A thin bridge between image folders and feature-space evaluation tools.
Pick a backbone, point at a directory, and get a binary feature matrix
plus a JSON manifest mapping filenames to rows.
"""

from .backbones import (
    BACKBONE_INCEPTION,
    BACKBONE_VIT,
    WEIGHTS_PRETRAINED,
    WEIGHTS_RANDOM,
    Backbone,
    backbone_dim,
    backbone_input_size,
    build_backbone,
)
from .errors import ConfigError, DataError, ExtractorError, WeightsError
from .extract import (
    IMAGE_SUFFIXES,
    MANIFEST_SCHEMA,
    RESIZE_BICUBIC_ANTIALIAS,
    ExtractionJob,
    ExtractionResult,
    extract,
    list_images,
    load_image,
)
from .fvec import write_fvec

__all__ = [
    "BACKBONE_INCEPTION",
    "BACKBONE_VIT",
    "WEIGHTS_PRETRAINED",
    "WEIGHTS_RANDOM",
    "Backbone",
    "backbone_dim",
    "backbone_input_size",
    "build_backbone",
    "ConfigError",
    "DataError",
    "ExtractorError",
    "WeightsError",
    "IMAGE_SUFFIXES",
    "MANIFEST_SCHEMA",
    "RESIZE_BICUBIC_ANTIALIAS",
    "ExtractionJob",
    "ExtractionResult",
    "extract",
    "list_images",
    "load_image",
    "write_fvec",
]
