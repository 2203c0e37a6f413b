"""
Networks
FPN generator, conditional discriminator and their parameter archives.
"""

from .archive import ArchiveError, load_archive, load_module_arrays, module_arrays, save_archive
from .backbones import STRIDES, Backbone, build_backbone
from .discriminator import ConditionedSample, Discriminator, DiscriminatorConfig, instance_norm
from .generator import FeaturePyramid, Generator, GeneratorConfig, ShapeError

__all__ = [
    "ArchiveError",
    "load_archive",
    "load_module_arrays",
    "module_arrays",
    "save_archive",
    "STRIDES",
    "Backbone",
    "build_backbone",
    "ConditionedSample",
    "Discriminator",
    "DiscriminatorConfig",
    "instance_norm",
    "FeaturePyramid",
    "Generator",
    "GeneratorConfig",
    "ShapeError",
]
